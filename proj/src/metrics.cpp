#include "transbench/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "transbench/text.hpp"

namespace transbench::metrics {

using nlohmann::json;
using pipeline::Approach;

std::string_view to_string(Phase p) { return p == Phase::PreRepair ? "pre_repair" : "post_repair"; }

Phase phase_from_string(std::string_view s) {
  if (s == "pre_repair") return Phase::PreRepair;
  if (s == "post_repair") return Phase::PostRepair;
  throw MetricsError("MalformedReport", "unknown phase '" + std::string(s) + "'");
}

std::size_t OutcomeBreakdown::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::optional<double> Cell::rate() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(successes) / static_cast<double>(total);
}

void Cell::add(Outcome o) {
  ++total;
  if (o == Outcome::Success) ++successes;
  ++breakdown[o];
}

void Cell::merge(const Cell& other) {
  successes += other.successes;
  total += other.total;
  empty_extractions += other.empty_extractions;
  environment_errors += other.environment_errors;
  for (std::size_t i = 0; i < breakdown.counts.size(); ++i) breakdown.counts[i] += other.breakdown.counts[i];
}

PassRateMatrix PassRateMatrix::from_attempts(const std::vector<pipeline::TranslationAttempt>& attempts) {
  PassRateMatrix m;
  for (const auto& a : attempts) m.add(a);
  return m;
}

void PassRateMatrix::add(const pipeline::TranslationAttempt& a) {
  CellKey key{a.dataset_id, a.source_language.id(), a.target_language.id(), a.approach, Phase::PreRepair};
  for (Phase p : {Phase::PreRepair, Phase::PostRepair}) {
    key.phase = p;
    Cell& c = cells_[key];
    c.add(p == Phase::PreRepair ? a.pre_repair_outcome : a.outcome);
    if (a.empty_extraction) ++c.empty_extractions;
    if (a.environment_error) ++c.environment_errors;
  }
}

void PassRateMatrix::add(const CellKey& key, Outcome outcome) { cells_[key].add(outcome); }

void PassRateMatrix::merge_cell(const CellKey& key, const Cell& cell) { cells_[key].merge(cell); }

void PassRateMatrix::merge(const PassRateMatrix& other) {
  for (const auto& [key, cell] : other.cells_) cells_[key].merge(cell);
}

const Cell* PassRateMatrix::find(const CellKey& key) const {
  auto it = cells_.find(key);
  return it == cells_.end() ? nullptr : &it->second;
}

bool PassRateMatrix::operator==(const PassRateMatrix& other) const {
  if (cells_.size() != other.cells_.size()) return false;
  for (auto a = cells_.begin(), b = other.cells_.begin(); a != cells_.end(); ++a, ++b) {
    if (a->first != b->first || a->second.successes != b->second.successes || a->second.total != b->second.total ||
        a->second.breakdown.counts != b->second.breakdown.counts ||
        a->second.empty_extractions != b->second.empty_extractions ||
        a->second.environment_errors != b->second.environment_errors)
      return false;
  }
  return true;
}

std::optional<double> pass_at_1(const std::vector<pipeline::TranslationAttempt>& attempts, Phase phase) {
  if (attempts.empty()) return std::nullopt;
  std::size_t ok = 0;
  for (const auto& a : attempts)
    if ((phase == Phase::PreRepair ? a.pre_repair_outcome : a.outcome) == Outcome::Success) ++ok;
  return static_cast<double>(ok) / static_cast<double>(attempts.size());
}

std::map<Approach, Average> approach_averages(const PassRateMatrix& m, Phase phase) {
  struct Acc {
    std::size_t successes = 0, total = 0, cells = 0;
    double rate_sum = 0;
  };
  std::map<Approach, Acc> acc;
  for (const auto& [key, cell] : m.cells()) {
    if (key.phase != phase || cell.total == 0) continue;
    auto& a = acc[key.approach];
    a.successes += cell.successes;
    a.total += cell.total;
    a.rate_sum += *cell.rate();
    ++a.cells;
  }
  std::map<Approach, Average> out;
  for (const auto& [approach, a] : acc) {
    out[approach] = {.weighted = 100.0 * static_cast<double>(a.successes) / static_cast<double>(a.total),
                     .unweighted = 100.0 * a.rate_sum / static_cast<double>(a.cells),
                     .cells = a.cells};
  }
  return out;
}

std::map<Approach, RepairDelta> repair_delta(const PassRateMatrix& m) {
  struct Acc {
    long long delta_successes = 0;
    std::size_t total = 0, cells = 0;
    double delta_rate_sum = 0;
  };
  std::map<Approach, Acc> acc;
  for (const auto& [key, post] : m.cells()) {
    CellKey other = key;
    other.phase = key.phase == Phase::PreRepair ? Phase::PostRepair : Phase::PreRepair;
    const Cell* counterpart = m.find(other);
    if (counterpart == nullptr)
      throw MetricsError("PhaseMissing", "cell " + key.dataset + " " + key.source + "->" + key.target + " " +
                                             std::string(pipeline::to_string(key.approach)) + " has no " +
                                             std::string(to_string(other.phase)) + " counterpart");
    if (key.phase != Phase::PostRepair) continue;
    const Cell& pre = *counterpart;
    if (post.total == 0 || pre.total == 0) continue;
    auto& a = acc[key.approach];
    a.delta_successes += static_cast<long long>(post.successes) - static_cast<long long>(pre.successes);
    a.total += post.total;
    a.delta_rate_sum += *post.rate() - *pre.rate();
    ++a.cells;
  }
  std::map<Approach, RepairDelta> out;
  for (const auto& [approach, a] : acc) {
    out[approach] = {.weighted = 100.0 * static_cast<double>(a.delta_successes) / static_cast<double>(a.total),
                     .unweighted = 100.0 * a.delta_rate_sum / static_cast<double>(a.cells),
                     .cells = a.cells};
  }
  return out;
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + std::string(s) + "' (expected json, csv or markdown)");
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(std::optional<double> v) { return v ? fixed(100.0 * *v, 2) + "%" : std::string(kUndefined); }

std::string signed_points(double v) { return (v >= 0 ? "+" : "") + fixed(v, 2); }

}  // namespace

std::string format_rate(std::optional<double> rate) { return rate ? fixed(*rate, 4) : std::string(kUndefined); }

std::string to_csv(const PassRateMatrix& m) {
  std::string out = "dataset,source,target,approach,phase,successes,total,rate,compile_err,mismatch,runtime_err,timeout\n";
  for (const auto& [k, c] : m.cells()) {
    std::ostringstream row;
    row << k.dataset << ',' << k.source << ',' << k.target << ',' << pipeline::to_string(k.approach) << ','
        << to_string(k.phase) << ',' << c.successes << ',' << c.total << ',' << format_rate(c.rate()) << ','
        << c.breakdown[Outcome::CompilationError] << ',' << c.breakdown[Outcome::TestMismatch] << ','
        << c.breakdown[Outcome::RuntimeError] << ',' << c.breakdown[Outcome::Timeout] << '\n';
    out += row.str();
  }
  return out;
}

json to_json(const PassRateMatrix& m) {
  json cells = json::array();
  for (const auto& [k, c] : m.cells()) {
    json outcomes = json::object();
    for (Outcome o : kAllOutcomes) outcomes[std::string(to_string(o))] = c.breakdown[o];
    auto rate = c.rate();
    cells.push_back({{"dataset", k.dataset},
                     {"source", k.source},
                     {"target", k.target},
                     {"approach", pipeline::to_string(k.approach)},
                     {"phase", to_string(k.phase)},
                     {"successes", c.successes},
                     {"total", c.total},
                     {"rate", rate ? json(*rate) : json(nullptr)},
                     {"outcomes", std::move(outcomes)},
                     {"empty_extractions", c.empty_extractions},
                     {"environment_errors", c.environment_errors}});
  }
  json averages = json::object();
  for (Phase p : {Phase::PreRepair, Phase::PostRepair}) {
    for (const auto& [approach, avg] : approach_averages(m, p)) {
      averages[std::string(pipeline::to_string(approach))][std::string(to_string(p))] = {
          {"weighted_percent", *avg.weighted}, {"unweighted_percent", *avg.unweighted}, {"cells", avg.cells}};
    }
  }
  json deltas = json::object();
  try {
    for (const auto& [approach, d] : repair_delta(m)) {
      deltas[std::string(pipeline::to_string(approach))] = {
          {"weighted_points", d.weighted}, {"unweighted_points", d.unweighted}, {"cells", d.cells}};
    }
  } catch (const MetricsError&) {
    deltas = nullptr;
  }
  return {{"cells", std::move(cells)}, {"averages", std::move(averages)}, {"repair_delta", std::move(deltas)}};
}

PassRateMatrix matrix_from_json(const json& j) {
  PassRateMatrix m;
  try {
    for (const auto& c : j.at("cells")) {
      CellKey key{c.at("dataset").get<std::string>(), c.at("source").get<std::string>(),
                  c.at("target").get<std::string>(), pipeline::approach_from_string(c.at("approach").get<std::string>()),
                  phase_from_string(c.at("phase").get<std::string>())};
      PassRateMatrix part;
      for (Outcome o : kAllOutcomes) {
        const auto n = c.at("outcomes").at(std::string(to_string(o))).get<std::size_t>();
        for (std::size_t i = 0; i < n; ++i) part.add(key, o);
      }
      Cell cell = part.find(key) ? *part.find(key) : Cell{};
      if (cell.total != c.at("total").get<std::size_t>() || cell.successes != c.at("successes").get<std::size_t>())
        throw MetricsError("MalformedReport", "cell counts disagree with its outcome breakdown");
      cell.empty_extractions = c.value("empty_extractions", std::size_t{0});
      cell.environment_errors = c.value("environment_errors", std::size_t{0});
      m.merge_cell(key, cell);
    }
  } catch (const json::exception& e) {
    throw MetricsError("MalformedReport", std::string("bad report: ") + e.what());
  } catch (const ConfigError& e) {
    throw MetricsError("MalformedReport", std::string("bad report: ") + e.what());
  }
  return m;
}

std::string to_markdown(const PassRateMatrix& m) {
  using Row = std::tuple<std::string, std::string, std::string>;
  std::set<Row> rows;
  std::set<std::pair<Approach, Phase>> columns;
  for (const auto& [k, c] : m.cells()) {
    rows.emplace(k.dataset, k.source, k.target);
    columns.emplace(k.approach, k.phase);
  }

  std::ostringstream out;
  out << "# Translation results\n\n";
  out << "| Dataset | Source | Target |";
  for (const auto& [a, p] : columns) out << ' ' << pipeline::to_string(a) << " (" << to_string(p) << ") |";
  out << "\n|---|---|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [dataset, source, target] : rows) {
    out << "| " << dataset << " | " << source << " | " << target << " |";
    for (const auto& [a, p] : columns) {
      const Cell* c = m.find({dataset, source, target, a, p});
      if (c == nullptr) {
        out << ' ' << kUndefined << " |";
      } else {
        out << ' ' << percent(c->rate()) << " (" << c->successes << '/' << c->total << ") |";
      }
    }
    out << '\n';
  }

  out << "\n## Averages\n\n| Approach | Phase | Sample-weighted | Cell-unweighted | Cells |\n|---|---|---|---|---|\n";
  for (Phase p : {Phase::PreRepair, Phase::PostRepair}) {
    for (const auto& [a, avg] : approach_averages(m, p)) {
      out << "| " << pipeline::to_string(a) << " | " << to_string(p) << " | " << percent(avg.weighted.value() / 100)
          << " | " << percent(avg.unweighted.value() / 100) << " | " << avg.cells << " |\n";
    }
  }

  out << "\n## Repair delta (percentage points)\n\n";
  try {
    auto deltas = repair_delta(m);
    out << "| Approach | Sample-weighted | Cell-unweighted | Cells |\n|---|---|---|---|\n";
    for (const auto& [a, d] : deltas)
      out << "| " << pipeline::to_string(a) << " | " << signed_points(d.weighted) << " | "
          << signed_points(d.unweighted) << " | " << d.cells << " |\n";
  } catch (const MetricsError& e) {
    out << "unavailable: " << e.what() << '\n';
  }

  out << "\n## Outcomes\n\n| Approach | Phase | Success | CompilationError | TestMismatch | RuntimeError | Timeout "
         "| Empty extraction | Environment error |\n|---|---|---|---|---|---|---|---|---|\n";
  std::map<std::pair<Approach, Phase>, Cell> totals;
  for (const auto& [k, c] : m.cells()) totals[{k.approach, k.phase}].merge(c);
  for (const auto& [ap, t] : totals) {
    out << "| " << pipeline::to_string(ap.first) << " | " << to_string(ap.second) << " |";
    for (Outcome o : kAllOutcomes) out << ' ' << t.breakdown[o] << " |";
    out << ' ' << t.empty_extractions << " | " << t.environment_errors << " |\n";
  }
  return out.str();
}

std::string render_report(const PassRateMatrix& m, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return to_json(m).dump(2) + "\n";
    case ReportFormat::Csv: return to_csv(m);
    case ReportFormat::Markdown: return to_markdown(m);
  }
  return {};
}

void emit_report(const PassRateMatrix& m, ReportFormat format, const std::filesystem::path& out) {
  text::write_file(out, render_report(m, format));
}

}  // namespace transbench::metrics
