#include "transbench/repair.hpp"

#include "transbench/text.hpp"

namespace transbench::repair {

void RepairPolicy::validate() const {
  if (max_iterations < 1) throw ConfigError("max repair iterations must be >= 1");
}

std::string truncate_diagnostics(std::string_view diagnostics, std::size_t max_bytes) {
  return std::string(text::utf8_prefix(diagnostics, max_bytes));
}

RepairTrace repair(std::string_view code, std::string_view initial_diagnostics, const SubjectLanguage& target,
                   const CompileFn& compile, gateway::Gateway& gateway, const prompting::TemplateSet& templates,
                   const gateway::ChatRequest& request_template, const RepairPolicy& policy) {
  policy.validate();
  RepairTrace trace;
  std::string current(code);
  std::string diagnostics(initial_diagnostics);

  while (trace.iterations_used < policy.max_iterations) {
    RepairAttempt attempt;
    attempt.code_before = current;
    attempt.diagnostics = truncate_diagnostics(diagnostics, policy.max_diagnostic_bytes);

    gateway::ChatRequest request = request_template;
    request.prompt_text = templates.render(prompting::TemplateId::RepairCompile,
                                           {{"target_code", current},
                                            {"target_language", target.display_name()},
                                            {"err_context", attempt.diagnostics}});
    attempt.request_digest = gateway::fixture_key(request);

    gateway::ModelResponse response;
    try {
      response = gateway.complete(request);
    } catch (const Error& e) {
      trace.gateway_error = e.code() + ": " + e.what();
      break;
    }
    ++trace.iterations_used;

    try {
      attempt.code_after = prompting::extract_code(response.raw_text, target);
    } catch (const prompting::PromptError& e) {
      if (e.code() != "EmptyExtraction") throw;
      attempt.empty_extraction = true;
      attempt.compile_status = CompileStatus::Error;
      attempt.compile_diagnostics = "empty extraction";
      trace.attempts.push_back(std::move(attempt));
      continue;  // keep repairing the previous candidate
    }

    CompileResult built = compile(attempt.code_after);
    attempt.compile_status = built.status;
    attempt.compile_diagnostics = built.diagnostics;
    current = attempt.code_after;
    diagnostics = built.diagnostics;
    const bool ok = built.status == CompileStatus::Ok;
    trace.attempts.push_back(std::move(attempt));
    if (ok || built.status == CompileStatus::ToolMissing) break;
  }

  trace.final_code = current;
  trace.fixed = !trace.attempts.empty() && trace.attempts.back().compile_status == CompileStatus::Ok;
  return trace;
}

}  // namespace transbench::repair
