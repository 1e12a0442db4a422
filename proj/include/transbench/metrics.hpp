#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "transbench/harness.hpp"
#include "transbench/pipeline.hpp"

namespace transbench::metrics {

/// Codes: PhaseMissing, MalformedReport.
class MetricsError : public Error {
 public:
  using Error::Error;
};

enum class Phase { PreRepair, PostRepair };
std::string_view to_string(Phase p);  // "pre_repair" / "post_repair"
Phase phase_from_string(std::string_view s);

/// Printed in place of an undefined rate.
inline constexpr std::string_view kUndefined = "—";

struct CellKey {
  std::string dataset;
  std::string source;
  std::string target;
  pipeline::Approach approach = pipeline::Approach::SourceOnly;
  Phase phase = Phase::PostRepair;

  auto operator<=>(const CellKey&) const = default;
};

/// Outcome counts of one cell, indexed like kAllOutcomes.
struct OutcomeBreakdown {
  std::array<std::size_t, 5> counts{};

  std::size_t& operator[](Outcome o) { return counts[static_cast<std::size_t>(o)]; }
  std::size_t operator[](Outcome o) const { return counts[static_cast<std::size_t>(o)]; }
  std::size_t total() const;
};

struct Cell {
  std::size_t successes = 0;
  std::size_t total = 0;
  OutcomeBreakdown breakdown;
  /// Attempts whose translation yielded no code (counted as CompilationError).
  std::size_t empty_extractions = 0;
  /// Attempts that failed for environment reasons (counted as RuntimeError).
  std::size_t environment_errors = 0;

  /// successes/total, or nullopt when total == 0.
  std::optional<double> rate() const;
  void add(Outcome o);
  void merge(const Cell& other);
};

/// Per-(dataset, source, target, approach, phase) pass counts. Accumulation is
/// by counting, so partial matrices merge exactly.
class PassRateMatrix {
 public:
  static PassRateMatrix from_attempts(const std::vector<pipeline::TranslationAttempt>& attempts);

  /// Adds both phases of one attempt.
  void add(const pipeline::TranslationAttempt& attempt);
  void add(const CellKey& key, Outcome outcome);
  void merge(const PassRateMatrix& other);
  void merge_cell(const CellKey& key, const Cell& cell);

  const std::map<CellKey, Cell>& cells() const { return cells_; }
  const Cell* find(const CellKey& key) const;
  bool empty() const { return cells_.empty(); }

  bool operator==(const PassRateMatrix& other) const;

 private:
  std::map<CellKey, Cell> cells_;
};

/// Fraction of attempts whose outcome in `phase` is Success; nullopt for an empty set.
std::optional<double> pass_at_1(const std::vector<pipeline::TranslationAttempt>& attempts, Phase phase);

/// Mean pass rate of one approach across cells, in percent. `weighted` pools
/// every attempt (sample-weighted); `unweighted` averages the cell rates.
struct Average {
  std::optional<double> weighted;
  std::optional<double> unweighted;
  std::size_t cells = 0;
};
std::map<pipeline::Approach, Average> approach_averages(const PassRateMatrix& m, Phase phase);

/// Post-minus-pre improvement of one approach, in percentage points.
struct RepairDelta {
  double weighted = 0.0;
  double unweighted = 0.0;
  std::size_t cells = 0;
};
/// Throws PhaseMissing when a cell lacks its counterpart phase.
std::map<pipeline::Approach, RepairDelta> repair_delta(const PassRateMatrix& m);

enum class ReportFormat { Json, Csv, Markdown };
ReportFormat report_format_from_string(std::string_view s);

/// "0.7500" style, or kUndefined.
std::string format_rate(std::optional<double> rate);

std::string to_csv(const PassRateMatrix& m);
nlohmann::json to_json(const PassRateMatrix& m);
PassRateMatrix matrix_from_json(const nlohmann::json& j);
/// Grid with one row per (dataset, source, target) and one column per
/// (approach, phase), followed by averages, repair deltas and outcome totals.
std::string to_markdown(const PassRateMatrix& m);

std::string render_report(const PassRateMatrix& m, ReportFormat format);
/// Throws IoError.
void emit_report(const PassRateMatrix& m, ReportFormat format, const std::filesystem::path& out);

}  // namespace transbench::metrics
