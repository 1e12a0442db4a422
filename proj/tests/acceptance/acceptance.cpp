// Acceptance gate: one PASS/FAIL/SKIP line per criterion. Exits nonzero when
// any criterion fails so the details show up under ctest --output-on-failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "oracle_programs.hpp"
#include "scenarios.hpp"
#include "test_support.hpp"
#include "transbench/corpus.hpp"
#include "transbench/gateway.hpp"
#include "transbench/harness.hpp"
#include "transbench/metrics.hpp"
#include "transbench/pipeline.hpp"
#include "transbench/prompting.hpp"
#include "transbench/quality.hpp"
#include "transbench/text.hpp"

namespace tb = transbench;
namespace fs = std::filesystem;
namespace gw = transbench::gateway;
namespace pl = transbench::pipeline;
namespace mt = transbench::metrics;
namespace pr = transbench::prompting;
using tb::Outcome;
using Clock = std::chrono::steady_clock;

namespace {

enum class Status { Pass, Fail, Skip };

struct Verdict {
  Status status = Status::Fail;
  std::string detail;
};

Verdict pass(std::string d) { return {Status::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Status::Fail, std::move(d)}; }
Verdict check(bool ok, std::string d) { return {ok ? Status::Pass : Status::Fail, std::move(d)}; }

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> mini_run_args(const fs::path& out) {
  const auto root = tbtest::source_dir();
  return {"run",        "--corpus",    (root / "corpus/mini").string(),
          "--approach", "source,spec,spec+source",
          "--targets",  "c,cpp,go,python",
          "--backend",  "replay",      "--fixtures",
          (root / "fixtures/mini/fixtures.jsonl").string(),
          "--deadline-ms", "2000",     "--out",
          out.string()};
}

// ---------------------------------------------------------------------------

Verdict determinism() {
  tb::Sandbox a, b;
  double slowest = 0;
  for (auto* dir : {&a, &b}) {
    const auto start = Clock::now();
    auto r = tbtest::run_bench(mini_run_args(dir->path() / "results.jsonl"), dir->path());
    slowest = std::max(slowest, seconds_since(start));
    if (r.exit_code != 0) return fail("bench run exited " + std::to_string(r.exit_code) + ": " + r.err);
  }
  const bool same_results = tb::text::read_file(a.path() / "results.jsonl") == tb::text::read_file(b.path() / "results.jsonl");
  const bool same_report = tb::text::read_file(a.path() / "report.md") == tb::text::read_file(b.path() / "report.md");
  const auto corpus = tb::load_manifest(tbtest::source_dir() / "corpus/mini");
  std::set<std::string> langs;
  for (const auto& s : corpus.samples) langs.insert(s.language.id());
  std::ostringstream d;
  d << corpus.samples.size() << " samples, " << langs.size() << " source languages; results.jsonl "
    << (same_results ? "identical" : "DIFFERENT") << ", report.md " << (same_report ? "identical" : "DIFFERENT")
    << "; slowest run " << fmt("%.1f", slowest) << " s (limit 120 s)";
  return check(same_results && same_report && slowest < 120 && corpus.samples.size() >= 10 && langs.size() == 5,
               d.str());
}

Verdict harness_oracle() {
  const auto suite = tbtest::oracle_suite();
  tb::RunLimits limits;
  limits.wall_deadline = std::chrono::milliseconds(2000);
  const tb::Harness harness(tb::ToolchainRegistry::defaults(), limits);

  struct Observed {
    std::string got;
    std::chrono::milliseconds slowest{0};
  };
  std::vector<Observed> observed(suite.size());
  auto evaluate = [&](std::size_t i) {
    const auto& p = suite[i];
    const tb::SubjectLanguage lang(p.language);
    auto b = harness.build(p.code, lang);
    if (b.result.status == tb::CompileStatus::ToolMissing) {
      observed[i].got = "ToolMissing";
      return;
    }
    if (b.result.status == tb::CompileStatus::Error) {
      observed[i].got = std::string(tb::to_string(Outcome::CompilationError));
      return;
    }
    auto run = harness.test(b, lang, p.tests);
    for (const auto& t : run.per_test) observed[i].slowest = std::max(observed[i].slowest, t.elapsed);
    observed[i].got = std::string(tb::to_string(run.overall));
  };
  // Quick programs first and one at a time so their timings are honest;
  // the deadline-bound ones afterwards, many at a time.
  std::vector<std::size_t> quick, slow;
  for (std::size_t i = 0; i < suite.size(); ++i) (suite[i].label == Outcome::Timeout ? slow : quick).push_back(i);
  pl::parallel_for(quick.size(), 1, [&](std::size_t k) { evaluate(quick[k]); });
  pl::parallel_for(slow.size(), 8, [&](std::size_t k) { evaluate(slow[k]); });

  std::map<std::string, std::pair<int, int>> by_lang;  // agree, total
  std::map<std::string, int> per_class;
  std::map<std::string, std::string> first_disagreement;
  std::chrono::milliseconds slowest_pass{0};
  int agree = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& p = suite[i];
    ++per_class[std::string(tbtest::to_string(p.cls))];
    auto& [ok, total] = by_lang[p.language];
    ++total;
    if (observed[i].got == tb::to_string(p.label)) {
      ++ok;
      ++agree;
    } else if (!first_disagreement.count(p.language)) {
      first_disagreement[p.language] = p.name + " labelled " + std::string(tb::to_string(p.label)) + " got " +
                                       observed[i].got;
    }
    if (p.cls == tbtest::OracleClass::Passes) slowest_pass = std::max(slowest_pass, observed[i].slowest);
  }
  int min_class = 1 << 30;
  for (const auto& [c, n] : per_class) min_class = std::min(min_class, n);

  std::ostringstream d;
  d << agree << "/" << suite.size() << " agree (" << per_class.size() << " classes, >= " << min_class
    << " each); per language:";
  for (const auto& [lang, counts] : by_lang) d << ' ' << lang << ' ' << counts.first << '/' << counts.second;
  const bool margin = slowest_pass.count() * 20 <= 2000;
  d << "; slowest passing test " << slowest_pass.count() << " ms vs 2000 ms deadline ("
    << (margin ? "margin >= 20x" : "margin below 20x") << ")";
  for (const auto& [lang, why] : first_disagreement) d << "; " << lang << ": " << why;
  if (!tbtest::have_toolchain("java")) d << " (java toolchain not installed in this environment)";
  return check(agree == static_cast<int>(suite.size()) && min_class >= 25 && margin, d.str());
}

Verdict repair_budget() {
  if (!tbtest::have_toolchain("c")) return fail("c toolchain not installed");
  const tb::Harness harness(tb::ToolchainRegistry::defaults(), {});
  const auto templates = pr::TemplateSet::builtin();
  const std::string broken = "#include <stdio.h>\nint main(void) { puts(\"1\") return 0; }\n";
  const std::string fixed = "#include <stdio.h>\nint main(void) { puts(\"1\"); return 0; }\n";

  // fix_on = 0: the model never produces compiling code
  auto run_one = [&](int fix_on, const std::string& id) {
    int repair_calls = 0;
    gw::Gateway g(std::make_unique<gw::ScriptedBackend>(gw::ScriptedBackend::Responder([&](const gw::ChatRequest& r) {
      if (r.prompt_text.find("has compilation errors") == std::string::npos) return broken + "// End of Code";
      ++repair_calls;
      return (fix_on > 0 && repair_calls >= fix_on ? fixed : broken) + "// End of Code";
    })));
    pl::Pipeline pipe(harness, g, templates, {});
    auto sample = tbtest::make_sample(id, "python", "print(1)\n", {tb::TestCase::make("", "1\n")});
    return pipe.run_attempt(sample, pl::Approach::SourceOnly, tb::SubjectLanguage("c"), nullptr, {});
  };

  std::ostringstream d;
  bool ok = true;
  int never_ok = 0;
  const int never_n = 5;
  for (int s = 0; s < never_n; ++s) {
    auto a = run_one(0, "never" + std::to_string(s));
    const bool good = a.repair && a.repair->iterations_used == 3 && !a.repair->fixed &&
                      a.outcome == Outcome::CompilationError;
    never_ok += good;
  }
  ok = ok && never_ok == never_n;
  d << "never-fixing backend: " << never_ok << "/" << never_n << " traces with 3 iterations and CompilationError";
  for (int k = 1; k <= 3; ++k) {
    auto a = run_one(k, "fix" + std::to_string(k));
    const int used = a.repair ? a.repair->iterations_used : -1;
    const bool good = used == k && a.outcome == Outcome::Success;
    ok = ok && good;
    d << "; fix on " << k << ": " << used << " iterations, " << tb::to_string(a.outcome);
  }
  return check(ok, d.str());
}

Verdict corpus_repair() {
  if (!tbtest::have_toolchain("python")) return fail("python toolchain not installed");
  auto f = tbtest::corpus_repair_fixture(250);
  tb::RunLimits limits;
  limits.wall_deadline = std::chrono::milliseconds(5000);
  const tb::Harness harness(tb::ToolchainRegistry::defaults(), limits);
  std::vector<tb::ValidationReport> reports(f.input.samples.size());
  pl::parallel_for(reports.size(), 4,
                   [&](std::size_t i) { reports[i] = tb::validate_sample(f.input.samples[i], harness); });
  std::size_t repairable = 0;
  for (const auto& r : reports)
    for (const auto& t : r.tests) repairable += t.verdict == tb::ValidationVerdict::PrefixRepairable;

  tb::Sandbox dir;
  tb::save_manifest(tb::repair_corpus(f.input, reports), dir.path());
  const auto got = tb::load_manifest(dir.path());

  std::size_t agree = 0;
  std::vector<std::string> wrong;
  for (const auto& want : f.expected.samples) {
    const tb::CodeSample* s = got.find(want.sample_id);
    bool same = s != nullptr && s->tests.size() == want.tests.size() && s->source_text == want.source_text;
    for (std::size_t t = 0; same && t < want.tests.size(); ++t)
      same = s->tests[t].input == want.tests[t].input && s->tests[t].expected_output == want.tests[t].expected_output &&
             !s->tests[t].truncated;
    if (same) {
      ++agree;
    } else if (wrong.size() < 3) {
      wrong.push_back(want.sample_id);
    }
  }
  auto reasons = [](const tb::Corpus& c) {
    std::map<std::string, std::string> m;
    for (const auto& e : c.excluded) m[e.sample_id] = e.reason;
    return m;
  };
  const bool same_exclusions = reasons(got) == reasons(f.expected);
  const bool no_extra = got.samples.size() == f.expected.samples.size();

  std::ostringstream d;
  d << agree << "/" << f.expected.samples.size() << " admitted samples match the hand-derived corpus, "
    << repairable << " prefix-repairable tests rewritten, " << got.excluded.size() << " excluded (expected "
    << f.expected.excluded.size() << ", " << (same_exclusions ? "same ids and reasons" : "DIFFERENT") << ")";
  for (const auto& w : wrong) d << "; mismatch " << w;
  return check(agree == f.expected.samples.size() && same_exclusions && no_extra && repairable > 0, d.str());
}

Verdict metrics_arithmetic() {
  const auto attempts = tbtest::aggregate_fixture();
  const auto m = mt::PassRateMatrix::from_attempts(attempts);
  const auto pre = mt::approach_averages(m, mt::Phase::PreRepair);
  const auto delta = mt::repair_delta(m);
  struct Want {
    const char* what;
    double got, want;
  };
  const std::vector<Want> wants{
      {"spec pre", *pre.at(pl::Approach::SpecOnly).weighted, 64.8},
      {"spec+source pre", *pre.at(pl::Approach::SpecPlusSource).weighted, 75.15},
      {"source pre", *pre.at(pl::Approach::SourceOnly).weighted, 76.86},
      {"spec delta", delta.at(pl::Approach::SpecOnly).weighted, 8.5},
      {"spec+source delta", delta.at(pl::Approach::SpecPlusSource).weighted, 6.1},
  };
  bool ok = true;
  std::ostringstream d;
  for (const auto& w : wants) {
    ok = ok && std::abs(w.got - w.want) <= 0.05;
    d << w.what << ' ' << fmt("%.2f", w.got) << " (want " << fmt("%.2f", w.want) << "); ";
  }

  // merge safety over random partitions of a random result set
  std::mt19937 rng(20240601);
  const std::vector<std::string> langs{"c", "cpp", "go", "java", "python"};
  const pl::Approach approaches[] = {pl::Approach::SourceOnly, pl::Approach::SpecOnly, pl::Approach::SpecPlusSource};
  std::vector<pl::TranslationAttempt> random_set;
  for (int i = 0; i < 3000; ++i) {
    const auto& src = langs[rng() % 5];
    std::string tgt = langs[rng() % 5];
    if (tgt == src) tgt = src == "c" ? "go" : "c";
    const auto post = tb::kAllOutcomes[rng() % 5];
    const auto pre = post == Outcome::Success && rng() % 3 == 0 ? Outcome::CompilationError : post;
    auto a = tbtest::make_attempt(rng() % 2 ? "ds1" : "ds2", "s" + std::to_string(i), approaches[rng() % 3], src, tgt,
                                  pre, post);
    a.empty_extraction = rng() % 50 == 0;
    random_set.push_back(std::move(a));
  }
  const auto whole = mt::PassRateMatrix::from_attempts(random_set);
  const auto whole_json = mt::to_json(whole);
  int merged_ok = 0;
  const int rounds = 1000;
  for (int round = 0; round < rounds; ++round) {
    const std::size_t parts = 1 + rng() % 16;
    std::vector<mt::PassRateMatrix> partial(parts);
    for (const auto& a : random_set) partial[rng() % parts].add(a);
    mt::PassRateMatrix merged;
    for (const auto& p : partial) merged.merge(p);
    merged_ok += merged == whole && mt::to_json(merged) == whole_json;
  }
  ok = ok && merged_ok == rounds;
  d << "merge-safe " << merged_ok << "/" << rounds << " random partitions";
  return check(ok, d.str());
}

Verdict prompt_fidelity() {
  // Template wording transcribed by hand from the reference prompt tables.
  // {name} marks where a bound value goes.
  struct Quote {
    pr::TemplateId id;
    std::vector<std::string> lines;
  };
  const std::vector<Quote> quotes{
      {pr::TemplateId::SpecGen,
       {"{source_code}\nGive pseudocode for the above {source_language} code so that the {source_language} code is "
        "reproducible from the pseudocode. Do not give any other explanation except for the pseudocode."}},
      {pr::TemplateId::TranslateSpecOnly,
       {"{pseudocode_content}\nThe above pseudocode was generated from {source_language}. Generate functionally "
        "correct and similar {target_language} code using the pseudocode. Print only the {target_language} code and "
        "end with the comment \"End of Code\". Do not give any other explanation."}},
      {pr::TemplateId::TranslateSpecPlusSource,
       {"{source_code}\nThis is a {source_language} code.\n{pseudocode_content}\nThe above pseudocode was generated "
        "from {source_language}. Generate functionally correct and similar {target_language} code using the "
        "pseudocode. Print only the {target_language} code and end with the comment \"End of Code\". Do not give any "
        "other explanation."}},
      {pr::TemplateId::RepairCompile,
       {"{target_code}\nAbove {target_language} has compilation errors. Error Info from Compiler is given below:\n"
        "{err_context}\n",
        "Fix the error and print only the {target_language} code and end with the comment \"End of Code\". Do not "
        "give any other explanation."}},
  };
  const pr::Bindings values{{"source_code", "def f(x):\n    return x + 1\n"},
                            {"source_language", "Python"},
                            {"target_language", "Go"},
                            {"pseudocode_content", "1. FUNCTION f(x)\n2.     RETURN x + 1"},
                            {"target_code", "package main\nfunc main() {"},
                            {"err_context", "./main.go:2:14: syntax error: unexpected EOF"}};
  // independent substitution: plain find/replace over the transcribed quote
  auto fill = [&](std::string s) {
    for (const auto& [k, v] : values) {
      const std::string token = "{" + k + "}";
      for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token, pos + v.size()))
        s.replace(pos, token.size(), v);
    }
    return s;
  };
  const auto templates = pr::TemplateSet::builtin();
  int ok = 0, total = 0;
  std::ostringstream d;
  for (const auto& q : quotes) {
    const auto rendered = templates.render(q.id, values);
    bool all = true;
    for (const auto& line : q.lines) {
      ++total;
      const bool found = rendered.find(fill(line)) != std::string::npos;
      ok += found;
      all = all && found;
    }
    d << pr::to_string(q.id) << (all ? " verbatim" : " DIFFERS") << "; ";
  }
  d << ok << "/" << total << " quoted passages found";
  return check(ok == total, d.str());
}

Verdict quality_module() {
  struct Count {
    const char* file;
    const char* lang;
    std::size_t hand;
  };
  const Count counts[] = {{"sample.c", "c", 11},       {"sample.cpp", "cpp", 11},       {"sample.go", "go", 11},
                          {"sample.java", "java", 11}, {"sample.py", "python", 12}};
  std::ostringstream d;
  bool ok = true;
  d << "ncloc";
  for (const auto& c : counts) {
    const auto n =
        tb::quality::count_ncloc(tb::text::read_file(tbtest::data_dir() / "ncloc" / c.file), tb::SubjectLanguage(c.lang));
    ok = ok && n == c.hand;
    d << ' ' << c.lang << ' ' << n << '/' << c.hand;
  }
  auto f = tbtest::issue_fixture();
  auto top = tb::quality::top_messages(tb::quality::ingest_issues(f.exported, f.compiled_files), 10);
  const double share = top.empty() ? 0 : 100.0 * top[0].share;
  const bool leading = !top.empty() && top[0].message == f.leading_message && std::abs(share - 18.13) <= 0.01;
  ok = ok && leading;
  d << "; leading message share " << fmt("%.4f", share) << "% (want 18.13 +/- 0.01)";

  // density: exact ratios chosen to be representable
  const bool density = tb::quality::density(5, 250) == 20.0 && tb::quality::density(0, 10) == 0.0 &&
                       tb::quality::density(1, 8) == 125.0 && !tb::quality::density(3, 0).has_value() &&
                       tb::quality::density(3, 2000) == 1.5;
  ok = ok && density;
  d << "; density " << (density ? "exact" : "WRONG");
  return check(ok, d.str());
}

Verdict live_smoke() {
  if (!std::getenv("MODEL_API_KEY") || !std::getenv("MODEL_API_URL"))
    return {Status::Skip, "manual check: set MODEL_API_KEY and MODEL_API_URL to run 5 samples live"};
  auto corpus = tb::load_manifest(tbtest::source_dir() / "corpus/mini");
  corpus.samples.resize(5);
  tb::Sandbox dir;
  tb::save_manifest(corpus, dir.path() / "corpus");
  const auto fixtures = (dir.path() / "recorded.jsonl").string();
  auto common = [&](const std::string& backend, const std::string& out) {
    std::vector<std::string> args{"run",       "--corpus",  (dir.path() / "corpus").string(),
                                  "--approach", "spec",     "--targets",
                                  "python",    "--backend", backend,
                                  "--fixtures", fixtures,   "--out",
                                  (dir.path() / out / "results.jsonl").string()};
    if (backend == "live") args.push_back("--record");
    return tbtest::run_bench(args, dir.path());
  };
  auto live = common("live", "live");
  if (live.exit_code != 0) return fail("live run exited " + std::to_string(live.exit_code) + ": " + live.err);
  auto replay = common("replay", "replay");
  if (replay.exit_code != 0) return fail("replay of recorded fixtures failed: " + replay.err);
  const bool same = tb::text::read_file(dir.path() / "live/report.md") == tb::text::read_file(dir.path() / "replay/report.md");
  return check(same, std::string("5 samples end to end; replay of the recording ") +
                         (same ? "reproduces the report" : "gives a DIFFERENT report"));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"pipeline determinism", determinism},
      {"harness oracle", harness_oracle},
      {"repair-loop budget", repair_budget},
      {"corpus repair rule", corpus_repair},
      {"metrics arithmetic", metrics_arithmetic},
      {"prompt fidelity", prompt_fidelity},
      {"quality module", quality_module},
      {"live smoke", live_smoke},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = fail(std::string("threw: ") + e.what());
    }
    const char* tag = v.status == Status::Pass ? "PASS" : v.status == Status::Skip ? "SKIP" : "FAIL";
    failures += v.status == Status::Fail;
    std::printf("%s  %s: %s [%.1f s]\n", tag, name, v.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
