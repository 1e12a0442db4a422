#include "transbench/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "json.hpp"

#include "transbench/normalize.hpp"
#include "transbench/text.hpp"

namespace transbench {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMarker = "...";

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw CorpusError("MalformedManifest", where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string() || v.get_ref<const std::string&>().empty())
    malformed(where, std::string("field '") + key + "' must be a non-empty string");
  return v.get<std::string>();
}

std::string read_utf8(const fs::path& root, const std::string& rel, const std::string& where) {
  const fs::path p = root / rel;
  if (!fs::is_regular_file(p)) malformed(where, "file not found: " + rel);
  std::string data = text::read_file(p);
  if (!text::is_valid_utf8(data)) throw CorpusError("InvalidEncoding", where + ": " + rel + " is not valid UTF-8");
  return data;
}

}  // namespace

bool has_truncation_marker(std::string_view expected) {
  auto trimmed = text::rtrim(expected);
  return trimmed.size() >= kMarker.size() && trimmed.substr(trimmed.size() - kMarker.size()) == kMarker;
}

TestCase TestCase::make(std::string input, std::string expected_output) {
  TestCase t;
  t.truncated = has_truncation_marker(expected_output);
  t.input = std::move(input);
  t.expected_output = std::move(expected_output);
  return t;
}

const CodeSample* Corpus::find(std::string_view sample_id) const {
  for (const auto& s : samples)
    if (s.sample_id == sample_id) return &s;
  return nullptr;
}

Corpus load_manifest(const fs::path& root) {
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::is_regular_file(manifest_path))
    throw CorpusError("MissingManifest", "no manifest.json under " + root.string());

  json doc;
  try {
    doc = json::parse(text::read_file(manifest_path));
  } catch (const json::parse_error& e) {
    malformed("manifest.json", e.what());
  }

  Corpus corpus;
  corpus.dataset_id = require_string(doc, "dataset_id", "manifest.json");
  const json& samples = require(doc, "samples", "manifest.json");
  if (!samples.is_array()) malformed("manifest.json", "'samples' must be an array");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string where = "samples[" + std::to_string(i) + "]";
    const json& entry = samples[i];
    CodeSample sample;
    sample.sample_id = require_string(entry, "sample_id", where);
    if (!seen.insert(sample.sample_id).second)
      throw CorpusError("DuplicateSampleId", "duplicate sample_id '" + sample.sample_id + "'");
    sample.language = SubjectLanguage(require_string(entry, "language", where));
    sample.source_file = require_string(entry, "source_file", where);
    sample.source_text = read_utf8(root, sample.source_file, where);
    sample.dataset_id = corpus.dataset_id;

    const json& tests = require(entry, "tests", where);
    if (!tests.is_array()) malformed(where, "'tests' must be an array");
    for (std::size_t t = 0; t < tests.size(); ++t) {
      const std::string twhere = where + ".tests[" + std::to_string(t) + "]";
      std::string in_file = require_string(tests[t], "in_file", twhere);
      std::string out_file = require_string(tests[t], "out_file", twhere);
      TestCase tc = TestCase::make(read_utf8(root, in_file, twhere), read_utf8(root, out_file, twhere));
      tc.in_file = std::move(in_file);
      tc.out_file = std::move(out_file);
      sample.tests.push_back(std::move(tc));
    }
    corpus.samples.push_back(std::move(sample));
  }
  std::sort(corpus.samples.begin(), corpus.samples.end(),
            [](const CodeSample& a, const CodeSample& b) { return a.sample_id < b.sample_id; });

  const fs::path excluded_path = root / "excluded.json";
  if (fs::is_regular_file(excluded_path)) {
    json ex;
    try {
      ex = json::parse(text::read_file(excluded_path));
    } catch (const json::parse_error& e) {
      malformed("excluded.json", e.what());
    }
    if (!ex.is_array()) malformed("excluded.json", "must be an array");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const std::string where = "excluded.json[" + std::to_string(i) + "]";
      Exclusion e{require_string(ex[i], "sample_id", where), require_string(ex[i], "reason", where)};
      if (seen.count(e.sample_id)) malformed(where, "'" + e.sample_id + "' is both admitted and excluded");
      corpus.excluded.push_back(std::move(e));
    }
  }
  return corpus;
}

void save_manifest(const Corpus& corpus, const fs::path& root) {
  json samples = json::array();
  for (const auto& s : corpus.samples) {
    const std::string source_file =
        s.source_file.empty() ? s.sample_id + "." + s.language.file_extension() : s.source_file;
    text::write_file(root / source_file, s.source_text);
    json tests = json::array();
    for (std::size_t i = 0; i < s.tests.size(); ++i) {
      const auto& t = s.tests[i];
      const std::string stem = "tests/" + s.sample_id + "_" + std::to_string(i);
      const std::string in_file = t.in_file.empty() ? stem + ".in" : t.in_file;
      const std::string out_file = t.out_file.empty() ? stem + ".out" : t.out_file;
      text::write_file(root / in_file, t.input);
      text::write_file(root / out_file, t.expected_output);
      tests.push_back({{"in_file", in_file}, {"out_file", out_file}});
    }
    samples.push_back(
        {{"sample_id", s.sample_id}, {"language", s.language.id()}, {"source_file", source_file}, {"tests", tests}});
  }
  json doc{{"dataset_id", corpus.dataset_id}, {"samples", samples}};
  text::write_file(root / "manifest.json", doc.dump(2) + "\n");

  const fs::path excluded_path = root / "excluded.json";
  if (!corpus.excluded.empty()) {
    json ex = json::array();
    for (const auto& e : corpus.excluded) ex.push_back({{"sample_id", e.sample_id}, {"reason", e.reason}});
    text::write_file(excluded_path, ex.dump(2) + "\n");
  } else {
    fs::remove(excluded_path);
  }
}

std::string_view to_string(ValidationVerdict v) {
  switch (v) {
    case ValidationVerdict::Exact: return "Exact";
    case ValidationVerdict::PrefixRepairable: return "PrefixRepairable";
    case ValidationVerdict::Mismatch: return "Mismatch";
  }
  return "?";
}

bool ValidationReport::all_exact() const {
  return source_compiled &&
         std::all_of(tests.begin(), tests.end(), [](const auto& t) { return t.verdict == ValidationVerdict::Exact; });
}

bool ValidationReport::has_mismatch() const {
  return std::any_of(tests.begin(), tests.end(), [](const auto& t) { return t.verdict == ValidationVerdict::Mismatch; });
}

ValidationVerdict judge_test(const TestCase& test, std::string_view actual_output) {
  if (normalize_output(actual_output) == normalize_output(test.expected_output)) return ValidationVerdict::Exact;
  if (!test.truncated) return ValidationVerdict::Mismatch;

  auto trimmed = text::rtrim(test.expected_output);
  const std::string prefix = unify_newlines(trimmed.substr(0, trimmed.size() - kMarker.size()));
  const std::string actual = unify_newlines(actual_output);
  if (actual.compare(0, prefix.size(), prefix) == 0 && actual.size() >= prefix.size())
    return ValidationVerdict::PrefixRepairable;
  return ValidationVerdict::Mismatch;
}

ValidationReport validate_sample(const CodeSample& sample, const ProgramRunner& runner) {
  ValidationReport report;
  report.sample_id = sample.sample_id;
  SourceRun run = runner.run_source(sample);
  report.source_compiled = run.compiled;
  report.diagnostics = std::move(run.diagnostics);
  if (!run.compiled) return report;
  if (run.tests.size() != sample.tests.size())
    throw CorpusError("ReportSampleMismatch", "runner returned " + std::to_string(run.tests.size()) +
                                                  " results for " + std::to_string(sample.tests.size()) +
                                                  " tests of '" + sample.sample_id + "'");
  for (std::size_t i = 0; i < sample.tests.size(); ++i) {
    TestValidation tv;
    tv.actual_output = std::move(run.tests[i].actual_output);
    tv.timed_out = run.tests[i].timed_out;
    if (run.tests[i].timed_out || run.tests[i].failed)
      tv.verdict = ValidationVerdict::Mismatch;
    else
      tv.verdict = judge_test(sample.tests[i], tv.actual_output);
    report.tests.push_back(std::move(tv));
  }
  return report;
}

Corpus repair_corpus(const Corpus& corpus, const std::vector<ValidationReport>& reports) {
  std::map<std::string_view, const ValidationReport*> by_id;
  for (const auto& r : reports) {
    if (!corpus.find(r.sample_id))
      throw CorpusError("ReportSampleMismatch", "report references unknown sample '" + r.sample_id + "'");
    by_id[r.sample_id] = &r;
  }

  Corpus out;
  out.dataset_id = corpus.dataset_id;
  out.excluded = corpus.excluded;
  for (const auto& sample : corpus.samples) {
    auto it = by_id.find(sample.sample_id);
    if (it == by_id.end())
      throw CorpusError("ReportSampleMismatch", "no validation report for sample '" + sample.sample_id + "'");
    const ValidationReport& report = *it->second;

    if (!report.source_compiled) {
      out.excluded.push_back({sample.sample_id, std::string(kReasonUncompilable)});
      continue;
    }
    if (report.tests.size() != sample.tests.size())
      throw CorpusError("ReportSampleMismatch", "report for '" + sample.sample_id + "' covers " +
                                                    std::to_string(report.tests.size()) + " of " +
                                                    std::to_string(sample.tests.size()) + " tests");
    if (sample.tests.empty() || report.has_mismatch()) {
      out.excluded.push_back({sample.sample_id, std::string(kReasonNoValidTest)});
      continue;
    }
    CodeSample repaired = sample;
    for (std::size_t i = 0; i < repaired.tests.size(); ++i) {
      if (report.tests[i].verdict == ValidationVerdict::PrefixRepairable) {
        repaired.tests[i].expected_output = report.tests[i].actual_output;
        repaired.tests[i].truncated = false;
      }
    }
    out.samples.push_back(std::move(repaired));
  }
  return out;
}

}  // namespace transbench
