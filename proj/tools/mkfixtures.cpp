// Builds a replay fixture file for a corpus from hand-written programs.
//
// Layout of --src:
//   specs/<sample_id>.txt            pseudocode returned for the spec prompt
//   programs/<task>.<ext>            correct translation of <task> (sample id minus its language prefix)
//   programs/<task>.<variant>.<ext>  alternative answers referenced by scenarios
//   scenarios.json                   "<sample>/<approach>/<target>" -> scenario
//
// Scenarios: "ok" (default), "compile_fix_<k>", "compile_fail", "variant:<name>", "empty".
// Broken answers carry a tag line that is a syntax error in every subject
// language and lets repair prompts be traced back to their attempt.

#include <filesystem>
#include <iostream>
#include <map>
#include <regex>

#include "CLI11.hpp"
#include "json.hpp"

#include "transbench/corpus.hpp"
#include "transbench/gateway.hpp"
#include "transbench/harness.hpp"
#include "transbench/pipeline.hpp"
#include "transbench/prompting.hpp"
#include "transbench/text.hpp"

namespace fs = std::filesystem;
using namespace transbench;

namespace {

struct Script {
  fs::path src;
  const Corpus* corpus = nullptr;
  std::map<std::string, std::string> specs;
  std::map<std::string, std::string> scenarios;

  std::string task_of(const std::string& sample_id) const { return sample_id.substr(sample_id.find('_') + 1); }

  std::string program(const std::string& sample_id, const SubjectLanguage& target, const std::string& variant) const {
    std::string name = task_of(sample_id) + (variant.empty() ? "" : "." + variant) + "." + target.file_extension();
    return std::string(text::rtrim(text::read_file(src / "programs" / name)));
  }

  static std::string sentinel(const SubjectLanguage& target) {
    return target.id() == "python" ? "# End of Code" : "// End of Code";
  }

  /// Alternates between a fenced answer and a bare one so both extraction paths are exercised.
  static std::string wrap(const std::string& code, const SubjectLanguage& target, bool fenced) {
    if (fenced) return "```" + target.id() + "\n" + code + "\n" + sentinel(target) + "\n```\n";
    return code + "\n" + sentinel(target) + "\n";
  }

  static std::string broken(const std::string& code, const std::string& key, int iter) {
    return code + "\nBROKEN attempt=" + key + " iter=" + std::to_string(iter);
  }

  const CodeSample* by_source_prefix(const std::string& prompt) const {
    for (const auto& s : corpus->samples)
      if (prompt.starts_with(s.source_text + "\n")) return &s;
    return nullptr;
  }

  const CodeSample* by_spec_prefix(const std::string& prompt) const {
    for (const auto& [id, spec] : specs)
      if (prompt.starts_with(spec + "\n")) return corpus->find(id);
    return nullptr;
  }

  static SubjectLanguage language_named(const std::string& display) {
    for (const auto& l : default_languages())
      if (l.display_name() == display) return l;
    throw Error("ScriptError", "unknown language name '" + display + "'");
  }

  std::string answer(const std::string& key, const CodeSample& sample, const SubjectLanguage& target,
                     int next_iter) const {
    auto it = scenarios.find(key);
    const std::string scenario = it == scenarios.end() ? "ok" : it->second;
    const bool fenced = text::sha256_hex(key).back() < '8';
    const std::string good = program(sample.sample_id, target, "");
    if (scenario == "ok") return wrap(good, target, fenced);
    if (scenario == "empty") return "```" + target.id() + "\n```\n";
    if (scenario.starts_with("variant:")) return wrap(program(sample.sample_id, target, scenario.substr(8)), target, fenced);
    if (scenario == "compile_fail") return wrap(broken(good, key, next_iter), target, fenced);
    if (scenario.starts_with("compile_fix_")) {
      const int k = std::stoi(scenario.substr(12));
      return next_iter >= k ? wrap(good, target, fenced) : wrap(broken(good, key, next_iter), target, fenced);
    }
    throw Error("ScriptError", "unknown scenario '" + scenario + "' for " + key);
  }

  std::string respond(const gateway::ChatRequest& request) const {
    const std::string& p = request.prompt_text;
    static const std::regex tag(R"(BROKEN attempt=(\S+)/(\S+)/(\S+) iter=(\d+))");
    std::smatch m;
    if (p.find("has compilation errors") != std::string::npos) {
      if (!std::regex_search(p, m, tag)) throw Error("ScriptError", "repair prompt without an attempt tag");
      const CodeSample* sample = corpus->find(m[1].str());
      const std::string key = m[1].str() + "/" + m[2].str() + "/" + m[3].str();
      return answer(key, *sample, SubjectLanguage(m[3].str()), std::stoi(m[4].str()) + 1);
    }
    if (p.find("Give pseudocode for the above") != std::string::npos) {
      const CodeSample* sample = by_source_prefix(p);
      if (!sample) throw Error("ScriptError", "spec prompt for an unknown sample");
      return specs.at(sample->sample_id);
    }

    std::string approach;
    const CodeSample* sample = nullptr;
    std::smatch name;
    if (p.find("Translate the above") != std::string::npos) {
      approach = "source";
      sample = by_source_prefix(p);
      std::regex_search(p, name, std::regex(R"(code to (\S+) code\.)"));
    } else {
      approach = p.find("\nThis is a ") != std::string::npos ? "spec+source" : "spec";
      sample = approach == "spec" ? by_spec_prefix(p) : by_source_prefix(p);
      std::regex_search(p, name, std::regex(R"(similar (\S+) code using)"));
    }
    if (!sample || name.empty()) throw Error("ScriptError", "cannot attribute translation prompt");
    const SubjectLanguage target = language_named(name[1].str());
    return answer(sample->sample_id + "/" + approach + "/" + target.id(), *sample, target, 0);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate replay fixtures for a corpus from scripted answers", "mkfixtures"};
  std::string corpus_root, src, out, approaches = "source,spec,spec+source", targets = "c,cpp,go,python";
  int deadline_ms = 2000;
  app.add_option("--corpus", corpus_root)->required();
  app.add_option("--src", src)->required();
  app.add_option("--out", out)->required();
  app.add_option("--approach", approaches);
  app.add_option("--targets", targets);
  app.add_option("--deadline-ms", deadline_ms);
  CLI11_PARSE(app, argc, argv);

  try {
    Corpus corpus = load_manifest(corpus_root);
    Script script;
    script.src = src;
    script.corpus = &corpus;
    for (const auto& s : corpus.samples) {
      const fs::path spec = fs::path(src) / "specs" / (s.sample_id + ".txt");
      if (fs::exists(spec)) script.specs[s.sample_id] = std::string(text::rtrim(text::read_file(spec)));
    }
    const fs::path scen = fs::path(src) / "scenarios.json";
    if (fs::exists(scen)) script.scenarios = nlohmann::json::parse(text::read_file(scen)).get<std::map<std::string, std::string>>();

    fs::remove(out);
    auto recorder = std::make_shared<gateway::FixtureLog>(out);
    gateway::Gateway gw(std::make_unique<gateway::ScriptedBackend>(
                            [&](const gateway::ChatRequest& r) { return script.respond(r); }),
                        gateway::RetryPolicy{.attempts = 1}, recorder);

    RunLimits limits;
    limits.wall_deadline = std::chrono::milliseconds(deadline_ms);
    Harness harness(ToolchainRegistry::defaults(), limits);
    auto templates = prompting::TemplateSet::builtin();
    pipeline::PipelineConfig config;
    config.jobs = 1;  // keeps the fixture file in a stable order
    pipeline::Pipeline pipe(harness, gw, templates, config);

    pipeline::ExperimentPlan plan;
    for (const auto& a : text::split(approaches, ',')) plan.approaches.push_back(pipeline::approach_from_string(a));
    for (const auto& t : text::split(targets, ',')) plan.targets.emplace_back(t);
    auto attempts = pipe.run_experiment(corpus, plan);

    std::size_t errors = 0;
    for (const auto& a : attempts) {
      if (a.error && !a.empty_extraction) {
        std::cerr << a.sample_id << "/" << pipeline::to_string(a.approach) << "/" << a.target_language.id() << ": "
                  << *a.error << '\n';
        ++errors;
      }
    }
    std::cout << "attempts: " << attempts.size() << " fixtures: " << recorder->size() << '\n';
    return errors == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  }
}
