#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transbench/gateway.hpp"
#include "transbench/harness.hpp"
#include "transbench/language.hpp"
#include "transbench/prompting.hpp"

namespace transbench::repair {

struct RepairPolicy {
  int max_iterations = 3;
  /// err_context is cut to this many bytes, keeping the head.
  std::size_t max_diagnostic_bytes = 16 * 1024;

  void validate() const;
};

struct RepairAttempt {
  std::string code_before;
  std::string diagnostics;  // diagnostics of code_before, as sent to the model
  std::string code_after;   // empty when extraction produced nothing
  CompileStatus compile_status = CompileStatus::Error;
  std::string compile_diagnostics;  // diagnostics of code_after
  std::string request_digest;
  bool empty_extraction = false;
};

struct RepairTrace {
  std::vector<RepairAttempt> attempts;
  std::string final_code;
  bool fixed = false;
  int iterations_used = 0;
  /// Set when the loop stopped on a gateway failure.
  std::optional<std::string> gateway_error;
};

/// Builds one candidate and reports the outcome. The pipeline supplies a
/// function that keeps the sandbox of the last successful build.
using CompileFn = std::function<CompileResult(std::string_view code)>;

/// Head-preserving truncation of compiler output to `max_bytes`.
std::string truncate_diagnostics(std::string_view diagnostics, std::size_t max_bytes);

/// Re-prompts the model with the latest candidate and its diagnostics until it
/// compiles or `policy.max_iterations` gateway calls were made.
/// Precondition: `initial_diagnostics` come from a failed compile of `code`.
RepairTrace repair(std::string_view code, std::string_view initial_diagnostics, const SubjectLanguage& target,
                   const CompileFn& compile, gateway::Gateway& gateway, const prompting::TemplateSet& templates,
                   const gateway::ChatRequest& request_template, const RepairPolicy& policy);

}  // namespace transbench::repair
