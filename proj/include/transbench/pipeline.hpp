#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "transbench/corpus.hpp"
#include "transbench/gateway.hpp"
#include "transbench/harness.hpp"
#include "transbench/prompting.hpp"
#include "transbench/repair.hpp"

namespace transbench::pipeline {

/// Codes: GatewayFailure, TruncatedResponse, EmptySpecification, InvalidAttempt.
class PipelineError : public Error {
 public:
  using Error::Error;
};

enum class Approach { SourceOnly, SpecOnly, SpecPlusSource };

/// CLI spelling: "source", "spec", "spec+source".
std::string_view to_string(Approach a);
Approach approach_from_string(std::string_view s);
inline bool needs_specification(Approach a) { return a != Approach::SourceOnly; }

struct TranslationAttempt {
  std::string dataset_id;
  std::string sample_id;
  Approach approach = Approach::SourceOnly;
  SubjectLanguage source_language;
  SubjectLanguage target_language;
  std::optional<prompting::Specification> spec;
  std::string candidate_code;
  CompileStatus initial_compile = CompileStatus::Error;
  std::optional<repair::RepairTrace> repair;
  std::string final_code;
  Outcome pre_repair_outcome = Outcome::CompilationError;
  Outcome outcome = Outcome::CompilationError;  // post-repair
  std::vector<TestVerdict> test_verdicts;      // of final_code, empty when it never ran
  std::vector<std::string> request_digests;
  bool empty_extraction = false;
  bool environment_error = false;
  std::optional<std::string> error;
};

nlohmann::json to_json(const TranslationAttempt& a);
TranslationAttempt attempt_from_json(const nlohmann::json& j);

/// One JSON object per line, in the order given.
std::string to_jsonl(const std::vector<TranslationAttempt>& attempts);
std::vector<TranslationAttempt> read_results(const std::filesystem::path& path);

/// Stable ordering used for result files: (sample, approach, target).
void sort_attempts(std::vector<TranslationAttempt>& attempts);

/// Receives attempts as they finish; implementations must be thread-safe.
class ResultSink {
 public:
  virtual ~ResultSink() = default;
  virtual void append(const TranslationAttempt& attempt) = 0;
};

/// Appends JSON lines to a file in completion order (crash-safe progress log).
class JsonlSink : public ResultSink {
 public:
  explicit JsonlSink(std::filesystem::path path);
  void append(const TranslationAttempt& attempt) override;

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

struct PipelineConfig {
  gateway::ChatRequest request_template;  // temperature, model, token budget
  repair::RepairPolicy repair_policy;
  bool repair_enabled = true;
  unsigned jobs = 1;
};

struct ExperimentPlan {
  std::vector<Approach> approaches;
  std::vector<SubjectLanguage> targets;
};

/// Number of attempts a plan produces on a corpus.
std::size_t planned_attempts(const Corpus& corpus, const ExperimentPlan& plan);

class Pipeline {
 public:
  Pipeline(const Harness& harness, gateway::Gateway& gateway, const prompting::TemplateSet& templates,
           PipelineConfig config);

  /// Throws PipelineError (GatewayFailure / TruncatedResponse / EmptySpecification)
  /// with the sample id in the message.
  prompting::Specification generate_specification(const CodeSample& sample);

  /// Renders the approach's prompt, makes one gateway call and extracts code.
  /// `digest_out` receives the request digest. Throws PipelineError or
  /// PromptError("EmptyExtraction").
  std::string translate(const CodeSample& sample, const prompting::Specification* spec, Approach approach,
                        const SubjectLanguage& target, std::string* digest_out = nullptr);

  /// Compile, repair on failure, test, classify. `attempt.candidate_code` must be set.
  TranslationAttempt evaluate_attempt(TranslationAttempt attempt, const CodeSample& sample);

  /// Full translate + evaluate for one (sample, approach, target); never throws
  /// for per-attempt failures.
  TranslationAttempt run_attempt(const CodeSample& sample, Approach approach, const SubjectLanguage& target,
                                 const prompting::Specification* spec, const std::optional<std::string>& spec_error);

  /// Every admitted sample x approach x (target != source). Results come back
  /// sorted by (sample, approach, target) regardless of worker scheduling.
  std::vector<TranslationAttempt> run_experiment(const Corpus& corpus, const ExperimentPlan& plan,
                                                 ResultSink* sink = nullptr);

 private:
  const Harness& harness_;
  gateway::Gateway& gateway_;
  const prompting::TemplateSet& templates_;
  PipelineConfig config_;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace transbench::pipeline
