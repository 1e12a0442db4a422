#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "transbench/language.hpp"
#include "transbench/metrics.hpp"
#include "transbench/pipeline.hpp"

namespace transbench::quality {

/// Codes: MalformedExport.
class QualityError : public Error {
 public:
  using Error::Error;
};

/// Lines holding at least one character outside comments. String literals are
/// code; every line a multi-line literal touches counts. Comment syntax: `//`
/// and `/* */` for c/cpp/go/java, `#` for python.
std::size_t count_ncloc(std::string_view code, const SubjectLanguage& language);

enum class Severity { Blocker, Critical, Other };
std::string_view to_string(Severity s);
/// Case-insensitive; anything but BLOCKER/CRITICAL is Other.
Severity severity_from_string(std::string_view s);

struct Issue {
  std::string rule_id;
  Severity severity = Severity::Other;
  std::string message;
  std::string file;  // relative to the exported code root
  SubjectLanguage language;

  bool headline() const { return severity != Severity::Other; }
};

/// Parses `{"issues": [{"rule", "severity", "message", "component"}, ...]}`.
/// A `project:` prefix on component (analyzer key form) is dropped.
std::vector<Issue> parse_export(const nlohmann::json& exported);
std::vector<Issue> load_export(const std::filesystem::path& path);

/// Keeps only issues whose file is in `compiled_files`.
std::vector<Issue> ingest_issues(const nlohmann::json& exported, const std::set<std::string>& compiled_files);

struct MessageShare {
  std::string message;
  std::size_t count = 0;
  double share = 0.0;  // of all headline issues
};

/// Headline issues grouped by exact message, by share descending then
/// message ascending; at most k entries.
std::vector<MessageShare> top_messages(const std::vector<Issue>& issues, std::size_t k);

/// 1000 * issues / ncloc, nullopt when ncloc == 0.
std::optional<double> density(std::size_t issue_count, std::size_t ncloc);

/// One exported translated program.
struct CompiledFile {
  std::string path;  // <dataset>/<approach>/<phase>/<src>-<tgt>/<sample_id>.<ext>
  std::string code;
  metrics::CellKey key;
};

/// Programs that compiled, per phase: the initial candidate for pre_repair,
/// the final (possibly repaired) code for post_repair.
std::vector<CompiledFile> compiled_files(const std::vector<pipeline::TranslationAttempt>& attempts);
/// Writes compiled_files() under `root` so an analyzer can scan them.
void export_compiled_code(const std::vector<CompiledFile>& files, const std::filesystem::path& root);

struct QualityCell {
  std::size_t issue_count = 0;  // Blocker + Critical
  std::size_t ncloc = 0;
  std::size_t files = 0;
  std::optional<double> density() const { return quality::density(issue_count, ncloc); }
};

struct FileDensity {
  std::string dataset;
  std::string method;  // "<approach>/<phase>"
  std::string file;
  std::optional<double> density;
};

struct QualityReport {
  std::map<metrics::CellKey, QualityCell> cells;
  std::vector<MessageShare> top;
  std::vector<FileDensity> per_file;
};

QualityReport build_report(const std::vector<CompiledFile>& files, const std::vector<Issue>& issues,
                           std::size_t top_k = 10);

/// `dataset,source,target,approach,phase,issues,ncloc,density`
std::string to_csv(const QualityReport& r);
/// `dataset,method,file,density`
std::string distribution_csv(const QualityReport& r);
/// `rank,count,share,message`
std::string top_messages_csv(const QualityReport& r);

}  // namespace transbench::quality
