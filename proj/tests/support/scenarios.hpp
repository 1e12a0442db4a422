#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "transbench/corpus.hpp"
#include "transbench/pipeline.hpp"

namespace tbtest {

/// Result set whose per-approach averages and repair deltas are known by
/// construction: five cells of 2000 attempts per approach, pre-repair
/// successes summing to 6480 (spec), 7515 (spec+source) and 7686 (source),
/// post-repair gains summing to 850 and 610.
std::vector<transbench::pipeline::TranslationAttempt> aggregate_fixture();

/// Analyzer export with 10000 Blocker/Critical issues whose leading message
/// accounts for 1813 of them, plus lower-severity noise and issues on files
/// outside the compiled set.
struct IssueFixture {
  nlohmann::json exported;
  std::set<std::string> compiled_files;
  std::string leading_message;
};
IssueFixture issue_fixture();

/// Python corpus shaped like a cleaned-up competitive programming dataset:
/// stdin/stdout programs, several tests each, some expected outputs cut with
/// "...". `expected` is what cleanup must produce, derived from how each
/// sample was generated rather than from running anything.
struct CorpusRepairFixture {
  transbench::Corpus input;
  transbench::Corpus expected;
};
CorpusRepairFixture corpus_repair_fixture(std::size_t samples = 250);

/// Sample indices of corpus_repair_fixture() whose tests can never match.
std::vector<std::size_t> unmatched_sample_indices(std::size_t samples);

}  // namespace tbtest
