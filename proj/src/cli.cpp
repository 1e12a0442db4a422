#include "transbench/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "transbench/config.hpp"
#include "transbench/corpus.hpp"
#include "transbench/gateway.hpp"
#include "transbench/harness.hpp"
#include "transbench/metrics.hpp"
#include "transbench/pipeline.hpp"
#include "transbench/prompting.hpp"
#include "transbench/quality.hpp"
#include "transbench/text.hpp"

namespace transbench::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ToolchainRegistry registry_for(const fs::path& toolchains) {
  return toolchains.empty() ? ToolchainRegistry::defaults() : ToolchainRegistry::load(toolchains);
}

std::string join_list(const std::vector<std::string>& v) { return text::join(v, ","); }

// ---------------------------------------------------------------------------

struct ValidateOpts {
  std::string root;
  bool repair = false;
  bool write = false;
  std::string toolchains;
  int deadline_ms = 10'000;
};

int cmd_corpus_validate(const ValidateOpts& o, std::ostream& out) {
  Corpus corpus = load_manifest(o.root);
  RunLimits limits;
  limits.wall_deadline = std::chrono::milliseconds(o.deadline_ms);
  Harness harness(registry_for(o.toolchains), limits);

  // Samples whose toolchain is not installed cannot be judged; they are
  // reported and carried over unchanged instead of being excluded.
  Corpus checked{corpus.dataset_id, {}, corpus.excluded};
  std::vector<CodeSample> skipped;
  std::vector<ValidationReport> reports;
  std::size_t exact = 0, repairable = 0, invalid = 0;
  for (const auto& sample : corpus.samples) {
    const auto& lang = sample.language.id();
    if (!harness.registry().contains(lang) || !harness.registry().resolvable(lang)) {
      out << sample.sample_id << ": skipped (no toolchain for " << lang << ")\n";
      skipped.push_back(sample);
      continue;
    }
    auto report = validate_sample(sample, harness);
    std::size_t pr = 0, mm = 0;
    for (const auto& t : report.tests) {
      if (t.verdict == ValidationVerdict::PrefixRepairable) ++pr;
      if (t.verdict == ValidationVerdict::Mismatch) ++mm;
    }
    if (!report.source_compiled) {
      auto lines = text::split_lines(report.diagnostics);
      out << sample.sample_id << ": uncompilable: " << (lines.empty() ? std::string_view("no diagnostics") : lines.front())
          << '\n';
      ++invalid;
    } else if (mm > 0 || report.tests.empty()) {
      out << sample.sample_id << ": mismatch (" << mm << " of " << report.tests.size() << " tests)\n";
      ++invalid;
    } else if (pr > 0) {
      out << sample.sample_id << ": prefix-repairable (" << pr << " of " << report.tests.size() << " tests)\n";
      ++repairable;
    } else {
      out << sample.sample_id << ": ok\n";
      ++exact;
    }
    checked.samples.push_back(sample);
    reports.push_back(std::move(report));
  }
  out << "samples: " << corpus.samples.size() << " ok: " << exact << " repairable: " << repairable
      << " invalid: " << invalid << " skipped: " << skipped.size() << '\n';

  if (o.repair) {
    Corpus repaired = repair_corpus(checked, reports);
    for (auto& s : skipped) repaired.samples.push_back(std::move(s));
    std::sort(repaired.samples.begin(), repaired.samples.end(),
              [](const CodeSample& a, const CodeSample& b) { return a.sample_id < b.sample_id; });
    out << "admitted: " << repaired.samples.size() << " excluded: " << repaired.excluded.size() << '\n';
    for (const auto& e : repaired.excluded) out << "excluded " << e.sample_id << ": " << e.reason << '\n';
    if (o.write) {
      save_manifest(repaired, o.root);
      out << "wrote " << (fs::path(o.root) / "manifest.json").string() << '\n';
    }
  }
  return 0;
}

int cmd_doctor(const std::string& toolchains, std::ostream& out, std::ostream& err) {
  auto registry = registry_for(toolchains);
  std::vector<std::string> missing;
  for (const auto& id : registry.ids()) {
    auto version = registry.probe_version(id);
    if (version && registry.resolvable(id)) {
      out << id << ": " << *version << '\n';
    } else {
      out << id << ": missing\n";
      missing.push_back(id);
    }
  }
  if (!missing.empty()) {
    err << "error: ToolMissing: no working toolchain for " << join_list(missing) << '\n';
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------

std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& c, std::shared_ptr<gateway::FixtureLog>* log_out) {
  if (c.backend == "replay") {
    if (!fs::is_regular_file(c.fixtures))
      throw ConfigError("fixture file " + c.fixtures.string() + " does not exist");
    auto log = std::make_shared<gateway::FixtureLog>(c.fixtures);
    *log_out = log;
    return std::make_unique<gateway::Gateway>(std::make_unique<gateway::ReplayBackend>(log));
  }
  std::shared_ptr<gateway::FixtureLog> recorder;
  if (c.record) {
    recorder = std::make_shared<gateway::FixtureLog>(c.fixtures);
    *log_out = recorder;
  }
  return std::make_unique<gateway::Gateway>(
      std::make_unique<gateway::LiveBackend>(gateway::LiveOptions::from_env()), gateway::RetryPolicy{}, recorder);
}

json run_manifest(const RunConfig& c, const ToolchainRegistry& registry, const Corpus& corpus,
                  const prompting::TemplateSet& templates, std::size_t attempts) {
  json toolchains = json::object();
  std::vector<std::string> langs = c.targets;
  for (const auto& s : corpus.samples) langs.push_back(s.language.id());
  std::sort(langs.begin(), langs.end());
  langs.erase(std::unique(langs.begin(), langs.end()), langs.end());
  for (const auto& id : langs) {
    auto v = registry.contains(id) ? registry.probe_version(id) : std::nullopt;
    toolchains[id] = v ? json(*v) : json(nullptr);
  }
  json tpl = json::object();
  for (auto id : prompting::kAllTemplates)
    tpl[std::string(prompting::file_name(id))] = text::sha256_hex(templates.body(id));
  json fixture_digest = nullptr;
  if (!c.fixtures.empty() && fs::is_regular_file(c.fixtures)) fixture_digest = text::sha256_hex(text::read_file(c.fixtures));
  return {{"config", to_json(c)},
          {"dataset", corpus.dataset_id},
          {"samples", corpus.samples.size()},
          {"attempts", attempts},
          {"toolchain_versions", std::move(toolchains)},
          {"templates_sha256", std::move(tpl)},
          {"fixtures_sha256", std::move(fixture_digest)}};
}

int cmd_run(RunConfig c, std::ostream& out, std::ostream& err) {
  auto registry = registry_for(c.toolchains);
  for (const auto& t : c.targets)
    if (!registry.contains(t)) throw ConfigError("unknown target '" + t + "' (no toolchain entry)");
  c.validate();
  Corpus corpus = load_manifest(c.corpus_root);

  RunLimits limits;
  limits.wall_deadline = std::chrono::milliseconds(c.deadline_ms);
  limits.memory_cap = static_cast<std::size_t>(c.memory_mb) << 20;
  Harness harness(registry, limits);
  auto templates = c.template_dir.empty() ? prompting::TemplateSet::builtin()
                                          : prompting::TemplateSet::load_dir(c.template_dir);
  std::shared_ptr<gateway::FixtureLog> log;
  auto gw = make_gateway(c, &log);

  pipeline::PipelineConfig pc;
  pc.request_template.model_id = c.model;
  pc.request_template.temperature = c.temperature;
  pc.request_template.max_output = c.max_output;
  pc.repair_policy.max_iterations = c.max_repair_iters;
  pc.repair_enabled = c.repair;
  pc.jobs = c.effective_jobs();
  pipeline::Pipeline pipe(harness, *gw, templates, pc);

  pipeline::ExperimentPlan plan;
  for (const auto& a : c.approaches) plan.approaches.push_back(pipeline::approach_from_string(a));
  for (const auto& t : c.targets) plan.targets.emplace_back(t);

  // Completion-order progress log; replaced by the sorted file at the end.
  fs::path partial = c.out;
  partial += ".partial";
  fs::remove(partial);
  pipeline::JsonlSink sink(partial);
  auto attempts = pipe.run_experiment(corpus, plan, &sink);

  text::write_file(c.out, pipeline::to_jsonl(attempts));
  fs::remove(partial);
  auto matrix = metrics::PassRateMatrix::from_attempts(attempts);
  metrics::emit_report(matrix, metrics::ReportFormat::Markdown, c.report_path());
  text::write_file(c.manifest_path(), run_manifest(c, registry, corpus, templates, attempts.size()).dump(2) + "\n");

  std::size_t success = 0, env = 0;
  for (const auto& a : attempts) {
    if (a.outcome == Outcome::Success) ++success;
    if (a.environment_error) ++env;
  }
  out << "attempts: " << attempts.size() << " success: " << success << " environment errors: " << env
      << " backend calls: " << gw->backend_calls() << '\n';
  out << "results: " << c.out.string() << "\nreport: " << c.report_path().string() << '\n';
  if (env > 0) err << "warning: " << env << " attempts hit environment errors (see results)\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out_path, std::ostream& out) {
  auto attempts = pipeline::read_results(in);
  auto matrix = metrics::PassRateMatrix::from_attempts(attempts);
  auto fmt = metrics::report_format_from_string(format);
  if (out_path.empty() || out_path == "-") {
    out << metrics::render_report(matrix, fmt);
  } else {
    metrics::emit_report(matrix, fmt, out_path);
  }
  return 0;
}

struct QualityOpts {
  std::string issues;
  std::string compiled;
  std::string out = "quality.csv";
  std::string export_code;
  std::size_t top = 10;
};

int cmd_quality(const QualityOpts& o, std::ostream& out) {
  auto attempts = pipeline::read_results(o.compiled);
  auto files = quality::compiled_files(attempts);
  if (!o.export_code.empty()) {
    quality::export_compiled_code(files, o.export_code);
    out << "exported " << files.size() << " files to " << o.export_code << '\n';
  }
  std::vector<quality::Issue> issues;
  if (!o.issues.empty()) issues = quality::load_export(o.issues);
  auto report = quality::build_report(files, issues, o.top);

  const fs::path base(o.out);
  fs::path stem = base.parent_path() / base.stem();
  text::write_file(base, quality::to_csv(report));
  text::write_file(fs::path(stem.string() + "_distribution.csv"), quality::distribution_csv(report));
  text::write_file(fs::path(stem.string() + "_top_messages.csv"), quality::top_messages_csv(report));
  out << "files: " << files.size() << " quality: " << base.string() << '\n';
  for (const auto& m : report.top) {
    char share[32];
    std::snprintf(share, sizeof share, "%.2f%%", 100.0 * m.share);
    out << share << "  " << m.message << '\n';
  }
  return 0;
}

int cmd_gateway_ping(const std::string& model, std::ostream& out) {
  gateway::Gateway gw(std::make_unique<gateway::LiveBackend>(gateway::LiveOptions::from_env()));
  gateway::ChatRequest request;
  request.model_id = model;
  request.max_output = 16;
  request.prompt_text = "Reply with the single word: pong";
  auto response = gw.complete(request);
  out << "ok: " << text::trim(response.raw_text) << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Specification-driven code translation benchmark", "bench"};
  app.require_subcommand(1);

  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus maintenance");
  corpus_cmd->require_subcommand(1);
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "Execute original programs against their tests");
  ValidateOpts vopts;
  validate_cmd->add_option("root", vopts.root, "Corpus directory containing manifest.json")->required();
  validate_cmd->add_flag("--repair", vopts.repair, "Rewrite truncated outputs and exclude invalid samples");
  validate_cmd->add_flag("--write", vopts.write, "Save the repaired manifest (with --repair)");
  validate_cmd->add_option("--toolchains", vopts.toolchains, "toolchains.json overriding the defaults");
  validate_cmd->add_option("--deadline-ms", vopts.deadline_ms, "Per-test wall deadline");

  auto* doctor_cmd = app.add_subcommand("doctor", "Print resolved toolchain versions");
  std::string doctor_toolchains;
  doctor_cmd->add_option("--toolchains", doctor_toolchains, "toolchains.json overriding the defaults");

  RunConfig rc;
  std::string config_file, approaches_csv, targets_csv;
  std::string fixtures, out_path, report_path, template_dir, toolchains, corpus_root;
  int max_iters = 3, deadline_ms = 10'000, memory_mb = 512, max_output = 4096;
  unsigned jobs = 0;
  double temperature = 0.7;
  bool record = false, no_repair = false;
  std::string backend, model;
  auto* run_cmd = app.add_subcommand("run", "Translate, evaluate and repair a corpus");
  run_cmd->add_option("--config", config_file, "JSON run configuration (flags win)");
  auto* o_corpus = run_cmd->add_option("--corpus", corpus_root, "Corpus directory");
  auto* o_approach = run_cmd->add_option("--approach", approaches_csv, "Comma list of source, spec, spec+source");
  auto* o_targets = run_cmd->add_option("--targets", targets_csv, "Comma list of target language ids");
  auto* o_backend = run_cmd->add_option("--backend", backend, "replay or live");
  auto* o_fixtures = run_cmd->add_option("--fixtures", fixtures, "Fixture JSON-lines file");
  auto* o_record = run_cmd->add_flag("--record", record, "Record live responses into --fixtures");
  auto* o_model = run_cmd->add_option("--model", model, "Model id");
  auto* o_temp = run_cmd->add_option("--temperature", temperature, "Sampling temperature");
  auto* o_maxout = run_cmd->add_option("--max-output", max_output, "Token budget per response");
  auto* o_iters = run_cmd->add_option("--max-repair-iters", max_iters, "Repair iteration budget");
  auto* o_norepair = run_cmd->add_flag("--no-repair", no_repair, "Skip compilation-error repair");
  auto* o_deadline = run_cmd->add_option("--deadline-ms", deadline_ms, "Per-test wall deadline");
  auto* o_memory = run_cmd->add_option("--memory-mb", memory_mb, "Per-test memory cap");
  auto* o_jobs = run_cmd->add_option("--jobs", jobs, "Worker threads (default: logical cores)");
  auto* o_out = run_cmd->add_option("--out", out_path, "Results JSON-lines file");
  auto* o_report = run_cmd->add_option("--report", report_path, "Markdown report (default: next to --out)");
  auto* o_tpl = run_cmd->add_option("--template-dir", template_dir, "Directory overriding prompt templates");
  auto* o_tc = run_cmd->add_option("--toolchains", toolchains, "toolchains.json overriding the defaults");

  auto* report_cmd = app.add_subcommand("report", "Aggregate results into pass-rate tables");
  std::string report_in, report_format = "markdown", report_out;
  report_cmd->add_option("--in", report_in, "Results JSON-lines file")->required();
  report_cmd->add_option("--format", report_format, "json, csv or markdown");
  report_cmd->add_option("--out", report_out, "Output file (default: stdout)");

  auto* quality_cmd = app.add_subcommand("quality", "Issue density of compiled translations");
  QualityOpts qopts;
  quality_cmd->add_option("--issues", qopts.issues, "Analyzer export {issues:[...]}");
  quality_cmd->add_option("--compiled", qopts.compiled, "Results JSON-lines file")->required();
  quality_cmd->add_option("--out", qopts.out, "Quality CSV");
  quality_cmd->add_option("--export-code", qopts.export_code, "Write compiled programs here for analysis");
  quality_cmd->add_option("--top", qopts.top, "Number of top messages");

  auto* gateway_cmd = app.add_subcommand("gateway", "Model gateway utilities");
  gateway_cmd->require_subcommand(1);
  auto* ping_cmd = gateway_cmd->add_subcommand("ping", "Send one tiny request to the live endpoint");
  std::string ping_model = "gpt-4";
  ping_cmd->add_option("--model", ping_model, "Model id");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << '\n';
    // help of the deepest selected subcommand
    CLI::App* sub = &app;
    while (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
    err << sub->help();
    return 2;
  }

  try {
    if (*validate_cmd) return cmd_corpus_validate(vopts, out);
    if (*doctor_cmd) return cmd_doctor(doctor_toolchains, out, err);
    if (*run_cmd) {
      if (!config_file.empty()) rc = load_config(config_file, rc);
      if (*o_corpus) rc.corpus_root = corpus_root;
      if (*o_approach) rc.approaches = text::split(approaches_csv, ',');
      if (*o_targets) rc.targets = text::split(targets_csv, ',');
      if (*o_backend) rc.backend = backend;
      if (*o_fixtures) rc.fixtures = fixtures;
      if (*o_record) rc.record = record;
      if (*o_model) rc.model = model;
      if (*o_temp) rc.temperature = temperature;
      if (*o_maxout) rc.max_output = max_output;
      if (*o_iters) rc.max_repair_iters = max_iters;
      if (*o_norepair) rc.repair = !no_repair;
      if (*o_deadline) rc.deadline_ms = deadline_ms;
      if (*o_memory) rc.memory_mb = memory_mb;
      if (*o_jobs) rc.jobs = jobs;
      if (*o_out) rc.out = out_path;
      if (*o_report) rc.report = report_path;
      if (*o_tpl) rc.template_dir = template_dir;
      if (*o_tc) rc.toolchains = toolchains;
      return cmd_run(rc, out, err);
    }
    if (*report_cmd) return cmd_report(report_in, report_format, report_out, out);
    if (*quality_cmd) return cmd_quality(qopts, out);
    if (*ping_cmd) return cmd_gateway_ping(ping_model, out);
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace transbench::cli
