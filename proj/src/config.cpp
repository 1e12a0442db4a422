#include "transbench/config.hpp"

#include <set>
#include <thread>

#include "transbench/text.hpp"

namespace transbench {

using nlohmann::json;

void RunConfig::validate() const {
  if (corpus_root.empty()) throw ConfigError("corpus_root is required");
  if (approaches.empty()) throw ConfigError("approaches must not be empty");
  for (const auto& a : approaches)
    if (a != "source" && a != "spec" && a != "spec+source")
      throw ConfigError("unknown approach '" + a + "' (expected source, spec or spec+source)");
  if (targets.empty()) throw ConfigError("targets must not be empty");
  if (backend != "replay" && backend != "live")
    throw ConfigError("unknown backend '" + backend + "' (expected replay or live)");
  if (backend == "replay" && fixtures.empty()) throw ConfigError("the replay backend needs --fixtures");
  if (record && fixtures.empty()) throw ConfigError("--record needs --fixtures");
  if (!(temperature >= 0.0 && temperature <= 1.0)) throw ConfigError("temperature must be within [0, 1]");
  if (max_output < 1) throw ConfigError("max_output must be >= 1");
  if (max_repair_iters < 1) throw ConfigError("max_repair_iters must be >= 1");
  if (deadline_ms < 1) throw ConfigError("deadline_ms must be >= 1");
  if (memory_mb < 16) throw ConfigError("memory_mb must be >= 16");
}

unsigned RunConfig::effective_jobs() const {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::filesystem::path RunConfig::report_path() const {
  if (!report.empty()) return report;
  return out.parent_path() / "report.md";
}

std::filesystem::path RunConfig::manifest_path() const { return out.parent_path() / "run_manifest.json"; }

json to_json(const RunConfig& c) {
  return {{"corpus_root", c.corpus_root.string()},
          {"approaches", c.approaches},
          {"targets", c.targets},
          {"backend", c.backend},
          {"fixtures", c.fixtures.string()},
          {"record", c.record},
          {"model", c.model},
          {"temperature", c.temperature},
          {"max_output", c.max_output},
          {"max_repair_iters", c.max_repair_iters},
          {"repair", c.repair},
          {"deadline_ms", c.deadline_ms},
          {"memory_mb", c.memory_mb},
          {"jobs", c.jobs},
          {"out", c.out.string()},
          {"report", c.report.string()},
          {"template_dir", c.template_dir.string()},
          {"toolchains", c.toolchains.string()}};
}

RunConfig merge_config(RunConfig c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "corpus_root", "approaches", "targets",     "backend",  "fixtures", "record",       "model",
      "temperature", "max_output", "max_repair_iters", "repair", "deadline_ms", "memory_mb", "jobs",
      "out",         "report",     "template_dir", "toolchains"};
  for (const auto& [key, _] : j.items())
    if (known.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  try {
    auto path = [&](const char* k, std::filesystem::path& dst) {
      if (j.contains(k)) dst = j[k].get<std::string>();
    };
    path("corpus_root", c.corpus_root);
    if (j.contains("approaches")) c.approaches = j["approaches"].get<std::vector<std::string>>();
    if (j.contains("targets")) c.targets = j["targets"].get<std::vector<std::string>>();
    if (j.contains("backend")) c.backend = j["backend"].get<std::string>();
    path("fixtures", c.fixtures);
    if (j.contains("record")) c.record = j["record"].get<bool>();
    if (j.contains("model")) c.model = j["model"].get<std::string>();
    if (j.contains("temperature")) c.temperature = j["temperature"].get<double>();
    if (j.contains("max_output")) c.max_output = j["max_output"].get<int>();
    if (j.contains("max_repair_iters")) c.max_repair_iters = j["max_repair_iters"].get<int>();
    if (j.contains("repair")) c.repair = j["repair"].get<bool>();
    if (j.contains("deadline_ms")) c.deadline_ms = j["deadline_ms"].get<int>();
    if (j.contains("memory_mb")) c.memory_mb = j["memory_mb"].get<int>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<unsigned>();
    path("out", c.out);
    path("report", c.report);
    path("template_dir", c.template_dir);
    path("toolchains", c.toolchains);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return merge_config(std::move(base), j);
}

}  // namespace transbench
