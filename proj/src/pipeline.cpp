#include "transbench/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "transbench/text.hpp"

namespace transbench::pipeline {

using nlohmann::json;

std::string_view to_string(Approach a) {
  switch (a) {
    case Approach::SourceOnly: return "source";
    case Approach::SpecOnly: return "spec";
    case Approach::SpecPlusSource: return "spec+source";
  }
  return "?";
}

Approach approach_from_string(std::string_view s) {
  for (Approach a : {Approach::SourceOnly, Approach::SpecOnly, Approach::SpecPlusSource})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown approach '" + std::string(s) + "' (expected source, spec or spec+source)");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

CompileStatus compile_status_from_string(std::string_view s) {
  for (CompileStatus c : {CompileStatus::Ok, CompileStatus::Error, CompileStatus::ToolMissing})
    if (to_string(c) == s) return c;
  throw Error("MalformedResults", "unknown compile status '" + std::string(s) + "'");
}

TestVerdict verdict_from_string(std::string_view s) {
  for (TestVerdict v : {TestVerdict::Pass, TestVerdict::Mismatch, TestVerdict::RuntimeError, TestVerdict::Timeout})
    if (to_string(v) == s) return v;
  throw Error("MalformedResults", "unknown test verdict '" + std::string(s) + "'");
}

json trace_to_json(const repair::RepairTrace& t) {
  json attempts = json::array();
  for (const auto& a : t.attempts) {
    attempts.push_back({{"code_before", a.code_before},
                        {"diagnostics", a.diagnostics},
                        {"code_after", a.code_after},
                        {"compile_status", to_string(a.compile_status)},
                        {"compile_diagnostics", a.compile_diagnostics},
                        {"request_digest", a.request_digest},
                        {"empty_extraction", a.empty_extraction}});
  }
  json j = {{"attempts", std::move(attempts)},
            {"final_code", t.final_code},
            {"fixed", t.fixed},
            {"iterations_used", t.iterations_used}};
  j["gateway_error"] = t.gateway_error ? json(*t.gateway_error) : json(nullptr);
  return j;
}

repair::RepairTrace trace_from_json(const json& j) {
  repair::RepairTrace t;
  for (const auto& a : j.at("attempts")) {
    repair::RepairAttempt r;
    r.code_before = a.at("code_before").get<std::string>();
    r.diagnostics = a.at("diagnostics").get<std::string>();
    r.code_after = a.at("code_after").get<std::string>();
    r.compile_status = compile_status_from_string(a.at("compile_status").get<std::string>());
    r.compile_diagnostics = a.at("compile_diagnostics").get<std::string>();
    r.request_digest = a.at("request_digest").get<std::string>();
    r.empty_extraction = a.at("empty_extraction").get<bool>();
    t.attempts.push_back(std::move(r));
  }
  t.final_code = j.at("final_code").get<std::string>();
  t.fixed = j.at("fixed").get<bool>();
  t.iterations_used = j.at("iterations_used").get<int>();
  if (!j.at("gateway_error").is_null()) t.gateway_error = j.at("gateway_error").get<std::string>();
  return t;
}

}  // namespace

json to_json(const TranslationAttempt& a) {
  json j;
  j["dataset"] = a.dataset_id;
  j["sample_id"] = a.sample_id;
  j["approach"] = to_string(a.approach);
  j["source_language"] = a.source_language.id();
  j["target_language"] = a.target_language.id();
  if (a.spec) {
    j["spec"] = {{"text", a.spec->text}, {"request_digest", a.spec->request_digest}};
  } else {
    j["spec"] = nullptr;
  }
  j["candidate_code"] = a.candidate_code;
  j["initial_compile"] = to_string(a.initial_compile);
  j["repair"] = a.repair ? trace_to_json(*a.repair) : json(nullptr);
  j["final_code"] = a.final_code;
  j["pre_repair_outcome"] = to_string(a.pre_repair_outcome);
  j["outcome"] = to_string(a.outcome);
  json verdicts = json::array();
  for (auto v : a.test_verdicts) verdicts.push_back(to_string(v));
  j["test_verdicts"] = std::move(verdicts);
  j["request_digests"] = a.request_digests;
  j["empty_extraction"] = a.empty_extraction;
  j["environment_error"] = a.environment_error;
  j["error"] = a.error ? json(*a.error) : json(nullptr);
  return j;
}

TranslationAttempt attempt_from_json(const json& j) {
  try {
    TranslationAttempt a;
    a.dataset_id = j.at("dataset").get<std::string>();
    a.sample_id = j.at("sample_id").get<std::string>();
    a.approach = approach_from_string(j.at("approach").get<std::string>());
    a.source_language = SubjectLanguage(j.at("source_language").get<std::string>());
    a.target_language = SubjectLanguage(j.at("target_language").get<std::string>());
    if (!j.at("spec").is_null()) {
      a.spec = prompting::Specification{.sample_id = a.sample_id,
                                        .text = j["spec"].at("text").get<std::string>(),
                                        .source_language = a.source_language,
                                        .request_digest = j["spec"].at("request_digest").get<std::string>()};
    }
    a.candidate_code = j.at("candidate_code").get<std::string>();
    a.initial_compile = compile_status_from_string(j.at("initial_compile").get<std::string>());
    if (!j.at("repair").is_null()) a.repair = trace_from_json(j["repair"]);
    a.final_code = j.at("final_code").get<std::string>();
    a.pre_repair_outcome = outcome_from_string(j.at("pre_repair_outcome").get<std::string>());
    a.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    for (const auto& v : j.at("test_verdicts")) a.test_verdicts.push_back(verdict_from_string(v.get<std::string>()));
    a.request_digests = j.at("request_digests").get<std::vector<std::string>>();
    a.empty_extraction = j.at("empty_extraction").get<bool>();
    a.environment_error = j.at("environment_error").get<bool>();
    if (!j.at("error").is_null()) a.error = j.at("error").get<std::string>();
    return a;
  } catch (const json::exception& e) {
    throw Error("MalformedResults", std::string("bad result record: ") + e.what());
  } catch (const ConfigError& e) {
    throw Error("MalformedResults", std::string("bad result record: ") + e.what());
  }
}

std::string to_jsonl(const std::vector<TranslationAttempt>& attempts) {
  std::string out;
  for (const auto& a : attempts) out.append(to_json(a).dump()).push_back('\n');
  return out;
}

std::vector<TranslationAttempt> read_results(const std::filesystem::path& path) {
  const std::string data = text::read_file(path);
  std::vector<TranslationAttempt> out;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(data)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error("MalformedResults", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(attempt_from_json(j));
  }
  return out;
}

void sort_attempts(std::vector<TranslationAttempt>& attempts) {
  std::stable_sort(attempts.begin(), attempts.end(), [](const TranslationAttempt& a, const TranslationAttempt& b) {
    return std::tie(a.dataset_id, a.sample_id, a.approach, a.target_language) <
           std::tie(b.dataset_id, b.sample_id, b.approach, b.target_language);
  });
}

JsonlSink::JsonlSink(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void JsonlSink::append(const TranslationAttempt& attempt) {
  const std::string line = to_json(attempt).dump() + "\n";
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << line;
  if (!out) throw IoError("cannot append to " + path_.string());
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  {
    std::vector<std::jthread> workers;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    for (unsigned w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::size_t planned_attempts(const Corpus& corpus, const ExperimentPlan& plan) {
  std::size_t n = 0;
  for (const auto& s : corpus.samples)
    for (const auto& t : plan.targets)
      if (t != s.language) n += plan.approaches.size();
  return n;
}

Pipeline::Pipeline(const Harness& harness, gateway::Gateway& gateway, const prompting::TemplateSet& templates,
                   PipelineConfig config)
    : harness_(harness), gateway_(gateway), templates_(templates), config_(std::move(config)) {
  config_.repair_policy.validate();
}

namespace {

/// Calls the gateway, re-raising its errors as PipelineError with context.
gateway::ModelResponse call_model(gateway::Gateway& gw, const gateway::ChatRequest& request,
                                  const std::string& context) {
  try {
    return gw.complete(request);
  } catch (const gateway::GatewayError& e) {
    const std::string code = e.code() == "TruncatedResponse" ? "TruncatedResponse" : "GatewayFailure";
    throw PipelineError(code, context + ": " + e.code() + ": " + e.what());
  }
}

}  // namespace

prompting::Specification Pipeline::generate_specification(const CodeSample& sample) {
  gateway::ChatRequest request = config_.request_template;
  request.prompt_text = templates_.render(prompting::TemplateId::SpecGen,
                                          {{"source_code", sample.source_text},
                                           {"source_language", sample.language.display_name()}});
  auto response = call_model(gateway_, request, "specification for " + sample.sample_id);
  if (text::is_blank(response.raw_text))
    throw PipelineError("EmptySpecification", "specification for " + sample.sample_id + " is empty");
  return {.sample_id = sample.sample_id,
          .text = response.raw_text,
          .source_language = sample.language,
          .request_digest = response.request_digest};
}

std::string Pipeline::translate(const CodeSample& sample, const prompting::Specification* spec, Approach approach,
                                const SubjectLanguage& target, std::string* digest_out) {
  if (needs_specification(approach) && spec == nullptr)
    throw PipelineError("InvalidAttempt", "approach " + std::string(to_string(approach)) + " needs a specification");
  prompting::Bindings b{{"source_language", sample.language.display_name()},
                        {"target_language", target.display_name()}};
  prompting::TemplateId id = prompting::TemplateId::TranslateSourceOnly;
  switch (approach) {
    case Approach::SourceOnly:
      b.emplace("source_code", sample.source_text);
      break;
    case Approach::SpecOnly:
      id = prompting::TemplateId::TranslateSpecOnly;
      b.emplace("pseudocode_content", spec->text);
      break;
    case Approach::SpecPlusSource:
      id = prompting::TemplateId::TranslateSpecPlusSource;
      b.emplace("source_code", sample.source_text);
      b.emplace("pseudocode_content", spec->text);
      break;
  }
  gateway::ChatRequest request = config_.request_template;
  request.prompt_text = templates_.render(id, b);
  if (digest_out) *digest_out = gateway::fixture_key(request);
  auto response = call_model(gateway_, request,
                             "translation of " + sample.sample_id + " to " + target.id());
  return prompting::extract_code(response.raw_text, target);
}

TranslationAttempt Pipeline::evaluate_attempt(TranslationAttempt attempt, const CodeSample& sample) {
  if (attempt.candidate_code.empty())
    throw PipelineError("InvalidAttempt", "attempt for " + attempt.sample_id + " has no candidate code");
  const SubjectLanguage target = attempt.target_language;
  attempt.final_code = attempt.candidate_code;

  auto mark_tool_missing = [&](const std::string& diagnostics) {
    attempt.environment_error = true;
    attempt.error = "ToolMissing: " + diagnostics;
    attempt.outcome = Outcome::RuntimeError;
  };
  auto run_final = [&](const Harness::Build& build) {
    auto run = harness_.test(build, target, sample.tests);
    for (const auto& t : run.per_test) attempt.test_verdicts.push_back(t.verdict);
    return classify(build.result, &run);
  };

  Harness::Build first = harness_.build(attempt.candidate_code, target);
  attempt.initial_compile = first.result.status;

  if (first.result.status == CompileStatus::ToolMissing) {
    mark_tool_missing(first.result.diagnostics);
    attempt.pre_repair_outcome = attempt.outcome;
    return attempt;
  }
  if (first.result.status == CompileStatus::Ok) {
    attempt.outcome = attempt.pre_repair_outcome = run_final(first);
    return attempt;
  }

  attempt.pre_repair_outcome = Outcome::CompilationError;
  attempt.outcome = Outcome::CompilationError;
  if (!config_.repair_enabled) return attempt;

  // Keep the sandbox of the last successful build so the tested binary is
  // exactly the trace's final code.
  std::optional<Harness::Build> last_ok;
  repair::CompileFn compile_fn = [&](std::string_view code) {
    Harness::Build b = harness_.build(code, target);
    CompileResult r = b.result;
    if (r.status == CompileStatus::Ok) last_ok.emplace(std::move(b));
    return r;
  };
  auto trace = repair::repair(attempt.candidate_code, first.result.diagnostics, target, compile_fn, gateway_,
                              templates_, config_.request_template, config_.repair_policy);
  for (const auto& a : trace.attempts) attempt.request_digests.push_back(a.request_digest);
  attempt.final_code = trace.final_code;
  if (trace.gateway_error) attempt.error = "GatewayFailure: " + *trace.gateway_error;

  if (trace.fixed && last_ok) {
    attempt.outcome = run_final(*last_ok);
  } else if (!trace.attempts.empty() && trace.attempts.back().compile_status == CompileStatus::ToolMissing) {
    mark_tool_missing(trace.attempts.back().compile_diagnostics);
  }
  attempt.repair = std::move(trace);
  return attempt;
}

TranslationAttempt Pipeline::run_attempt(const CodeSample& sample, Approach approach, const SubjectLanguage& target,
                                         const prompting::Specification* spec,
                                         const std::optional<std::string>& spec_error) {
  TranslationAttempt attempt;
  attempt.dataset_id = sample.dataset_id;
  attempt.sample_id = sample.sample_id;
  attempt.approach = approach;
  attempt.source_language = sample.language;
  attempt.target_language = target;
  attempt.pre_repair_outcome = attempt.outcome = Outcome::CompilationError;
  if (spec) {
    attempt.spec = *spec;
    attempt.request_digests.push_back(spec->request_digest);
  }

  if (needs_specification(approach) && spec == nullptr) {
    attempt.error = spec_error.value_or("specification unavailable");
    return attempt;
  }

  try {
    std::string digest;
    try {
      attempt.candidate_code = translate(sample, spec, approach, target, &digest);
      attempt.request_digests.push_back(digest);
    } catch (const prompting::PromptError& e) {
      if (!digest.empty()) attempt.request_digests.push_back(digest);
      if (e.code() != "EmptyExtraction") throw;
      attempt.empty_extraction = true;
      attempt.error = e.code() + ": " + e.what();
      return attempt;
    } catch (const PipelineError& e) {
      if (!digest.empty()) attempt.request_digests.push_back(digest);
      attempt.error = e.code() + ": " + e.what();
      return attempt;
    }
    return evaluate_attempt(std::move(attempt), sample);
  } catch (const Error& e) {
    // sandbox and process failures: the environment, not the translation
    attempt.environment_error = true;
    attempt.pre_repair_outcome = attempt.outcome = Outcome::RuntimeError;
    attempt.error = e.code() + ": " + e.what();
    return attempt;
  }
}

std::vector<TranslationAttempt> Pipeline::run_experiment(const Corpus& corpus, const ExperimentPlan& plan,
                                                         ResultSink* sink) {
  for (const auto& t : plan.targets) {
    if (!harness_.registry().contains(t.id()))
      throw ConfigError("unknown target '" + t.id() + "' (no toolchain entry)");
    if (!harness_.registry().resolvable(t.id()))
      throw ConfigError("toolchain for target '" + t.id() + "' is not installed");
  }
  if (plan.approaches.empty()) throw ConfigError("no approach selected");

  const bool want_spec = std::any_of(plan.approaches.begin(), plan.approaches.end(), needs_specification);

  struct Job {
    std::size_t sample;
    Approach approach;
    SubjectLanguage target;
  };
  std::vector<Job> jobs;
  std::vector<std::size_t> spec_samples;
  for (std::size_t s = 0; s < corpus.samples.size(); ++s) {
    bool used = false;
    for (Approach a : plan.approaches) {
      for (const auto& t : plan.targets) {
        if (t == corpus.samples[s].language) continue;
        jobs.push_back({s, a, t});
        used = used || needs_specification(a);
      }
    }
    if (want_spec && used) spec_samples.push_back(s);
  }

  // One specification per sample, shared by every spec-based attempt.
  std::vector<std::optional<prompting::Specification>> specs(corpus.samples.size());
  std::vector<std::optional<std::string>> spec_errors(corpus.samples.size());
  parallel_for(spec_samples.size(), config_.jobs, [&](std::size_t i) {
    const std::size_t s = spec_samples[i];
    try {
      specs[s] = generate_specification(corpus.samples[s]);
    } catch (const Error& e) {
      spec_errors[s] = e.code() + ": " + e.what();
    }
  });

  std::vector<TranslationAttempt> results(jobs.size());
  parallel_for(jobs.size(), config_.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    const auto& sample = corpus.samples[job.sample];
    const prompting::Specification* spec =
        needs_specification(job.approach) && specs[job.sample] ? &*specs[job.sample] : nullptr;
    results[i] = run_attempt(sample, job.approach, job.target, spec, spec_errors[job.sample]);
    if (sink) sink->append(results[i]);
  });

  sort_attempts(results);
  return results;
}

}  // namespace transbench::pipeline
