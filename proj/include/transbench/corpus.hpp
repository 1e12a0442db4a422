#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "transbench/error.hpp"
#include "transbench/language.hpp"

namespace transbench {

class CorpusError : public Error {
 public:
  using Error::Error;
};

/// One stdin -> expected stdout pair. `truncated` is derived from the raw
/// expected output: it ends with "..." once trailing whitespace is trimmed.
struct TestCase {
  std::string input;
  std::string expected_output;
  bool truncated = false;
  /// Manifest-relative file names; empty for in-memory tests.
  std::string in_file;
  std::string out_file;

  static TestCase make(std::string input, std::string expected_output);
};

/// True when `expected` ends with the "..." truncation marker (trailing
/// whitespace ignored).
bool has_truncation_marker(std::string_view expected);

struct CodeSample {
  std::string sample_id;
  SubjectLanguage language;
  std::string source_text;
  std::vector<TestCase> tests;
  std::string dataset_id;
  /// Manifest-relative source file name; empty for in-memory samples.
  std::string source_file;
};

struct Exclusion {
  std::string sample_id;
  std::string reason;
};

struct Corpus {
  std::string dataset_id;
  std::vector<CodeSample> samples;  // sorted by sample_id
  std::vector<Exclusion> excluded;

  const CodeSample* find(std::string_view sample_id) const;
};

inline constexpr std::string_view kReasonNoValidTest = "no valid test case";
inline constexpr std::string_view kReasonUncompilable = "source uncompilable";

/// Reads `<root>/manifest.json` plus the referenced source and test files, and
/// `<root>/excluded.json` when present.
/// Errors: MissingManifest, MalformedManifest, DuplicateSampleId, InvalidEncoding.
Corpus load_manifest(const std::filesystem::path& root);

/// Writes the corpus in manifest layout under `root` (sources as
/// `<sample_id>.<ext>`, tests as `tests/<sample_id>_<n>.in|out`). Exclusions
/// go to `<root>/excluded.json` when present.
void save_manifest(const Corpus& corpus, const std::filesystem::path& root);

/// Result of executing an original program on each of its test inputs.
struct ExecutedTest {
  std::string actual_output;
  bool timed_out = false;
  bool failed = false;  // nonzero exit or signal
};

struct SourceRun {
  bool compiled = true;
  std::string diagnostics;
  std::vector<ExecutedTest> tests;  // one per sample test, same order
};

/// Anything able to build and run an original corpus program.
class ProgramRunner {
 public:
  virtual ~ProgramRunner() = default;
  virtual SourceRun run_source(const CodeSample& sample) const = 0;
};

enum class ValidationVerdict { Exact, PrefixRepairable, Mismatch };
std::string_view to_string(ValidationVerdict v);

struct TestValidation {
  ValidationVerdict verdict = ValidationVerdict::Mismatch;
  std::string actual_output;
  bool timed_out = false;
};

struct ValidationReport {
  std::string sample_id;
  bool source_compiled = true;
  std::string diagnostics;
  std::vector<TestValidation> tests;

  bool all_exact() const;
  bool has_mismatch() const;
};

/// Verdict of a single test given the original program's actual output.
ValidationVerdict judge_test(const TestCase& test, std::string_view actual_output);

/// Runs the original source on every test input and judges each output.
/// A source that fails to build yields source_compiled=false (never throws for it).
ValidationReport validate_sample(const CodeSample& sample, const ProgramRunner& runner);

/// Applies validation reports: rewrites prefix-repairable outputs, excludes
/// samples that have a mismatching test or an uncompilable source.
/// Errors: ReportSampleMismatch.
Corpus repair_corpus(const Corpus& corpus, const std::vector<ValidationReport>& reports);

}  // namespace transbench
