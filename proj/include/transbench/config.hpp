#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "transbench/error.hpp"

namespace transbench {

/// Settings of one `bench run`. Defaults follow the reference setup:
/// temperature 0.7, three repair iterations, the five subject languages.
struct RunConfig {
  std::filesystem::path corpus_root;
  std::vector<std::string> approaches{"spec", "spec+source"};
  std::vector<std::string> targets{"c", "cpp", "go", "java", "python"};
  std::string backend = "replay";
  std::filesystem::path fixtures;
  bool record = false;
  std::string model = "gpt-4";
  double temperature = 0.7;
  int max_output = 4096;
  int max_repair_iters = 3;
  bool repair = true;
  int deadline_ms = 10'000;
  int memory_mb = 512;
  unsigned jobs = 0;  // 0: logical cores
  std::filesystem::path out = "results.jsonl";
  std::filesystem::path report;  // empty: report.md next to `out`
  std::filesystem::path template_dir;
  std::filesystem::path toolchains;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  unsigned effective_jobs() const;
  std::filesystem::path report_path() const;
  std::filesystem::path manifest_path() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Keys absent from `j` keep the values already in `base`. Unknown keys are
/// rejected so typos do not pass silently.
RunConfig merge_config(RunConfig base, const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace transbench
