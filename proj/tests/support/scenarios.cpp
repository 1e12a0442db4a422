#include "scenarios.hpp"

#include <array>
#include <cstdio>
#include <set>

#include "test_support.hpp"

namespace tbtest {

using transbench::Outcome;
using transbench::TestCase;
using transbench::pipeline::Approach;

std::vector<transbench::pipeline::TranslationAttempt> aggregate_fixture() {
  struct Row {
    Approach approach;
    std::array<int, 5> pre;
    std::array<int, 5> gain;
  };
  const std::array<Row, 3> rows{{
      {Approach::SpecOnly, {1100, 1500, 1300, 1280, 1300}, {150, 200, 170, 160, 170}},
      {Approach::SpecPlusSource, {1450, 1600, 1500, 1465, 1500}, {100, 140, 122, 130, 118}},
      {Approach::SourceOnly, {1500, 1600, 1536, 1550, 1500}, {0, 0, 0, 0, 0}},
  }};
  const std::array<const char*, 5> sources{"c", "cpp", "go", "java", "python"};
  constexpr int kPerCell = 2000;

  std::vector<transbench::pipeline::TranslationAttempt> out;
  out.reserve(3 * 5 * kPerCell);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < sources.size(); ++c) {
      const std::string target = c == 0 ? "cpp" : "c";
      for (int i = 0; i < kPerCell; ++i) {
        Outcome pre = Outcome::Success;
        Outcome post = Outcome::Success;
        if (i >= row.pre[c]) {
          // failures cycle through the four error kinds; only compile errors
          // are candidates for repair
          const Outcome kinds[] = {Outcome::CompilationError, Outcome::TestMismatch, Outcome::RuntimeError,
                                   Outcome::Timeout};
          const int fail_index = i - row.pre[c];
          if (fail_index < row.gain[c]) {
            pre = Outcome::CompilationError;
            post = Outcome::Success;
          } else {
            pre = post = kinds[fail_index % 4];
          }
        }
        out.push_back(make_attempt("agg", std::string(sources[c]) + "_" + std::to_string(i), row.approach,
                                   sources[c], target, pre, post));
      }
    }
  }
  return out;
}

IssueFixture issue_fixture() {
  IssueFixture f;
  f.leading_message = "Add a field width specifier to this \"%s\" placeholder.";
  const std::vector<std::pair<std::string, int>> headline{
      {f.leading_message, 1813},
      {"Refactor this code to not nest more than 3 if|for|do|while|switch statements.", 1237},
      {"Declared variable-length array (VLA) has tainted (attacker controlled) size that can be 0 or negative.",
       1069},
      {"cast from 'const void *' to 'int *' drops const qualifier.", 868},
      {"Replace this call to the non reentrant function \"strtok\" by a call to \"strtok_r\".", 764},
      {"Division by a tainted value, possibly zero.", 499},
      {"Access of the heap area with a tainted index that may be negative or too large.", 246},
      {"Call to 'malloc' has an allocation size of 0 bytes.", 97},
      {"call to undeclared library function 'strtok' with type 'char *(char *, const char *)'; ISO C99 and later "
       "do not support implicit function declarations.",
       91},
      {"Access of 'int' element in the heap area at index 1.", 78},
  };
  // 3238 remaining headline issues over 60 rarer messages (58 x 54 + 2 x 53)
  std::vector<std::pair<std::string, int>> all = headline;
  for (int m = 0; m < 60; ++m) all.push_back({"Rare finding " + std::to_string(m), m < 58 ? 54 : 53});

  nlohmann::json issues = nlohmann::json::array();
  int serial = 0;
  auto file_for = [](int n) { return "agg/spec/post_repair/python-c/s" + std::to_string(n % 400) + ".c"; };
  for (int n = 0; n < 400; ++n) f.compiled_files.insert(file_for(n));
  for (const auto& [message, count] : all) {
    for (int i = 0; i < count; ++i, ++serial) {
      issues.push_back({{"rule", "c:S" + std::to_string(serial % 37)},
                        {"severity", serial % 3 == 0 ? "BLOCKER" : "CRITICAL"},
                        {"message", message},
                        {"component", "translations:" + file_for(serial)}});
    }
  }
  // noise: lower severities, and a file that never compiled
  for (int i = 0; i < 700; ++i) {
    issues.push_back({{"rule", "c:S100"},
                      {"severity", i % 2 ? "MAJOR" : "MINOR"},
                      {"message", i % 5 ? "Rename this variable." : f.leading_message},
                      {"component", file_for(i)}});
  }
  for (int i = 0; i < 300; ++i) {
    issues.push_back({{"rule", "c:S200"},
                      {"severity", "BLOCKER"},
                      {"message", f.leading_message},
                      {"component", "agg/spec/post_repair/python-c/never_compiled.c"}});
  }
  f.exported = {{"issues", std::move(issues)}};
  return f;
}

// ---------------------------------------------------------------------------

namespace {

std::string full_output(std::size_t i, int n) {
  const int mul = static_cast<int>(i % 7) + 2;
  std::string out;
  for (int j = 1; j <= n; ++j) out += std::to_string(j * mul + static_cast<int>(i)) + "\n";
  return out;
}

std::string program(std::size_t i) {
  return "n = int(input())\nfor j in range(1, n + 1):\n    print(j * " + std::to_string(i % 7 + 2) + " + " +
         std::to_string(i) + ")\n";
}

std::string crlf(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\n') out += '\r';
    out += c;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> unmatched_sample_indices(std::size_t samples) {
  std::vector<std::size_t> out;
  for (std::size_t i = 7; i < samples; i += 22) out.push_back(i);
  return out;
}

CorpusRepairFixture corpus_repair_fixture(std::size_t samples) {
  CorpusRepairFixture f;
  f.input.dataset_id = f.expected.dataset_id = "avatar_like";
  const auto bad = unmatched_sample_indices(samples);
  const std::set<std::size_t> bad_set(bad.begin(), bad.end());

  for (std::size_t i = 0; i < samples; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "atcoder_%04zu", i);
    const int n0 = 6, n1 = 9 + static_cast<int>(i % 4);
    const std::string out0 = full_output(i, n0), out1 = full_output(i, n1);
    const std::string in0 = std::to_string(n0) + "\n", in1 = std::to_string(n1) + "\n";

    transbench::CodeSample s;
    s.sample_id = id;
    s.language = transbench::SubjectLanguage("python");
    s.source_text = program(i);
    s.dataset_id = f.input.dataset_id;
    transbench::CodeSample want = s;

    if (bad_set.count(i)) {
      // a cut that does not agree with the program, and a plain wrong answer
      s.tests = {TestCase::make(in0, "999999..."), TestCase::make(in1, "0\n")};
      f.input.samples.push_back(s);
      f.expected.excluded.push_back({id, std::string(transbench::kReasonNoValidTest)});
      continue;
    }

    switch (i % 5) {
      case 0:  // untouched
        s.tests = {TestCase::make(in0, out0), TestCase::make(in1, out1)};
        want.tests = s.tests;
        break;
      case 1:  // cut in the middle of a line
        s.tests = {TestCase::make(in0, out0.substr(0, out0.size() / 2) + "..."), TestCase::make(in1, out1)};
        want.tests = {TestCase::make(in0, out0), TestCase::make(in1, out1)};
        break;
      case 2:  // both cut, one marker followed by whitespace
        s.tests = {TestCase::make(in0, out0.substr(0, 3) + "..."),
                   TestCase::make(in1, out1.substr(0, out1.size() - 4) + "...  \n")};
        want.tests = {TestCase::make(in0, out0), TestCase::make(in1, out1)};
        break;
      case 3: {  // cut right after a line break
        const auto cut = out1.find('\n', out1.size() / 3) + 1;
        s.tests = {TestCase::make(in0, out0), TestCase::make(in1, out1.substr(0, cut) + "...")};
        want.tests = {TestCase::make(in0, out0), TestCase::make(in1, out1)};
        break;
      }
      default:  // CRLF expected output equals after normalization: left alone
        s.tests = {TestCase::make(in0, crlf(out0)), TestCase::make(in1, out1)};
        want.tests = s.tests;
        break;
    }
    f.input.samples.push_back(s);
    f.expected.samples.push_back(want);
  }
  return f;
}

}  // namespace tbtest
