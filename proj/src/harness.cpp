#include "transbench/harness.hpp"

#include <stdlib.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <regex>

#include "json.hpp"

#include "transbench/error.hpp"
#include "transbench/process.hpp"
#include "transbench/text.hpp"

namespace transbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "Success";
    case Outcome::CompilationError: return "CompilationError";
    case Outcome::TestMismatch: return "TestMismatch";
    case Outcome::RuntimeError: return "RuntimeError";
    case Outcome::Timeout: return "Timeout";
  }
  return "?";
}

Outcome outcome_from_string(std::string_view s) {
  for (Outcome o : kAllOutcomes)
    if (to_string(o) == s) return o;
  throw Error("MalformedResults", "unknown outcome '" + std::string(s) + "'");
}

std::string_view to_string(CompileStatus s) {
  switch (s) {
    case CompileStatus::Ok: return "Ok";
    case CompileStatus::Error: return "Error";
    case CompileStatus::ToolMissing: return "ToolMissing";
  }
  return "?";
}

std::string_view to_string(TestVerdict v) {
  switch (v) {
    case TestVerdict::Pass: return "Pass";
    case TestVerdict::Mismatch: return "Mismatch";
    case TestVerdict::RuntimeError: return "RuntimeError";
    case TestVerdict::Timeout: return "Timeout";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Registry

ToolchainRegistry ToolchainRegistry::defaults() {
  ToolchainRegistry r;
  r.add({.language = SubjectLanguage("c"),
         .compile_cmd = {"gcc", "-O2", "-std=gnu11", "-o", "{artifact}", "{source}", "-lm"},
         .run_cmd = {"{artifact}"},
         .version_probe = {"gcc", "--version"},
         .entry_file = "main.c",
         .artifact = "main"});
  r.add({.language = SubjectLanguage("cpp"),
         .compile_cmd = {"g++", "-O2", "-std=gnu++17", "-o", "{artifact}", "{source}"},
         .run_cmd = {"{artifact}"},
         .version_probe = {"g++", "--version"},
         .entry_file = "main.cpp",
         .artifact = "main"});
  r.add({.language = SubjectLanguage("go"),
         .compile_cmd = {"go", "build", "-o", "{artifact}", "{source}"},
         .run_cmd = {"{artifact}"},
         .version_probe = {"go", "version"},
         .entry_file = "main.go",
         .artifact = "main",
         .address_space_slack_mb = 1024});
  r.add({.language = SubjectLanguage("java"),
         .compile_cmd = {"javac", "-encoding", "UTF-8", "-d", "{workdir}", "{source}"},
         .run_cmd = {"java", "-Xmx{memory_mb}m", "-Xss64m", "-cp", "{workdir}", "Main"},
         .version_probe = {"java", "-version"},
         .entry_file = "Main.java",
         .artifact = "Main.class",
         .apply_memory_rlimit = false});
  r.add({.language = SubjectLanguage("python"),
         .check_cmd = {"python3", "-m", "py_compile", "{source}"},
         .run_cmd = {"python3", "{source}"},
         .version_probe = {"python3", "--version"},
         .entry_file = "main.py"});
  return r;
}

namespace {

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& lang) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) throw ConfigError("toolchains.json: " + lang + "." + key + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw ConfigError("toolchains.json: " + lang + "." + key + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

ToolchainRegistry ToolchainRegistry::load(const fs::path& path) {
  ToolchainRegistry r = defaults();
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("toolchains.json: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ConfigError("toolchains.json: top level must be an object");
  for (const auto& [id, entry] : doc.items()) {
    if (!entry.is_object()) throw ConfigError("toolchains.json: entry '" + id + "' must be an object");
    ToolchainProfile p = r.contains(id) ? r.at(id) : ToolchainProfile{.language = SubjectLanguage(id)};
    try {
      if (entry.contains("compile_cmd")) p.compile_cmd = string_list(entry, "compile_cmd", id);
      if (entry.contains("check_cmd")) p.check_cmd = string_list(entry, "check_cmd", id);
      if (entry.contains("run_cmd")) p.run_cmd = string_list(entry, "run_cmd", id);
      if (entry.contains("version_probe")) p.version_probe = string_list(entry, "version_probe", id);
      if (entry.contains("entry_file")) p.entry_file = entry.at("entry_file").get<std::string>();
      if (entry.contains("artifact")) p.artifact = entry.at("artifact").get<std::string>();
      if (entry.contains("apply_memory_rlimit")) p.apply_memory_rlimit = entry.at("apply_memory_rlimit").get<bool>();
      if (entry.contains("address_space_slack_mb"))
        p.address_space_slack_mb = entry.at("address_space_slack_mb").get<std::size_t>();
    } catch (const json::type_error& e) {
      throw ConfigError("toolchains.json: '" + id + "': " + e.what());
    }
    if (p.run_cmd.empty()) throw ConfigError("toolchains.json: '" + id + "' has no run_cmd");
    if (p.entry_file.empty()) p.entry_file = "main." + p.language.file_extension();
    if (!p.interpreted() && p.artifact.empty()) throw ConfigError("toolchains.json: compiled '" + id + "' has no artifact");
    r.add(std::move(p));
  }
  return r;
}

void ToolchainRegistry::add(ToolchainProfile profile) {
  std::string id = profile.language.id();
  profiles_.insert_or_assign(std::move(id), std::move(profile));
}

bool ToolchainRegistry::contains(std::string_view id) const { return profiles_.find(id) != profiles_.end(); }

const ToolchainProfile& ToolchainRegistry::at(std::string_view id) const {
  auto it = profiles_.find(id);
  if (it == profiles_.end())
    throw ConfigError("unknown language '" + std::string(id) + "' (no toolchain entry)");
  return it->second;
}

std::vector<std::string> ToolchainRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : profiles_) out.push_back(id);
  return out;
}

namespace {

bool is_placeholder_only(const std::string& arg) { return !arg.empty() && arg.front() == '{'; }

}  // namespace

bool ToolchainRegistry::resolvable(std::string_view id) const {
  const auto& p = at(id);
  for (const auto* cmd : {&p.compile_cmd, &p.check_cmd, &p.run_cmd}) {
    if (cmd->empty() || is_placeholder_only(cmd->front())) continue;
    if (!process::find_executable(cmd->front())) return false;
  }
  return true;
}

std::optional<std::string> ToolchainRegistry::probe_version(std::string_view id) const {
  const auto& p = at(id);
  if (p.version_probe.empty() || !process::find_executable(p.version_probe.front())) return std::nullopt;
  process::Limits limits;
  limits.deadline = std::chrono::seconds(30);
  auto res = process::run(p.version_probe, {}, fs::current_path(), limits);
  if (res.spawn_failed || res.timed_out) return std::nullopt;
  // some tools (java -version) print to stderr
  const std::string& text_out = text::trim(res.out).empty() ? res.err : res.out;
  auto lines = text::split_lines(text::trim(text_out));
  if (lines.empty()) return std::string();
  return std::string(text::rtrim(lines.front()));
}

// ---------------------------------------------------------------------------
// Sandbox

namespace {

fs::path make_temp_dir(const fs::path& parent) {
  std::string tmpl = (parent / "tb-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr)
    throw Error("SandboxSetupFailure", "mkdtemp failed under " + parent.string());
  return fs::path(tmpl);
}

}  // namespace

Sandbox::Sandbox() : Sandbox(fs::temp_directory_path()) {}

Sandbox::Sandbox(const fs::path& parent) {
  std::error_code ec;
  fs::create_directories(parent, ec);
  path_ = make_temp_dir(parent);
}

Sandbox::Sandbox(Sandbox&& other) noexcept : path_(std::exchange(other.path_, {})) {}

Sandbox& Sandbox::operator=(Sandbox&& other) noexcept {
  if (this != &other) {
    if (!path_.empty()) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
    path_ = std::exchange(other.path_, {});
  }
  return *this;
}

Sandbox::~Sandbox() {
  if (!path_.empty()) {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
}

// ---------------------------------------------------------------------------
// Compile / run

namespace {

std::vector<std::string> expand(const std::vector<std::string>& tmpl, const fs::path& source, const fs::path& artifact,
                                const fs::path& workdir, std::size_t memory_cap) {
  const std::string mem = std::to_string(std::max<std::size_t>(memory_cap >> 20, 16));
  std::vector<std::string> out;
  out.reserve(tmpl.size());
  for (std::string arg : tmpl) {
    auto replace_all = [&arg](std::string_view key, const std::string& value) {
      for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + value.size()))
        arg.replace(pos, key.size(), value);
    };
    replace_all("{source}", source.string());
    replace_all("{artifact}", artifact.string());
    replace_all("{workdir}", workdir.string());
    replace_all("{memory_mb}", mem);
    out.push_back(std::move(arg));
  }
  return out;
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

std::string rename_identifier(std::string_view code, std::string_view from, std::string_view to) {
  std::string out;
  out.reserve(code.size());
  std::size_t i = 0;
  while (i < code.size()) {
    auto pos = code.find(from, i);
    if (pos == std::string_view::npos) {
      out.append(code.substr(i));
      break;
    }
    bool left_ok = pos == 0 || !is_ident_char(code[pos - 1]);
    bool right_ok = pos + from.size() >= code.size() || !is_ident_char(code[pos + from.size()]);
    out.append(code.substr(i, pos - i));
    out.append(left_ok && right_ok ? to : from);
    i = pos + from.size();
  }
  return out;
}

}  // namespace

std::string apply_entry_convention(std::string_view code, const ToolchainProfile& profile) {
  if (profile.entry_file.size() <= 5 || !profile.entry_file.ends_with(".java")) return std::string(code);
  const std::string entry = profile.entry_file.substr(0, profile.entry_file.size() - 5);
  static const std::regex kPublicClass(R"((^|\n)\s*public\s+(?:(?:final|abstract)\s+)*class\s+([A-Za-z_$][\w$]*))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(code.begin(), code.end(), m, kPublicClass)) return std::string(code);
  const std::string name = m[2].str();
  if (name == entry) return std::string(code);
  return rename_identifier(code, name, entry);
}

CompileResult compile(std::string_view code, const ToolchainProfile& profile, const Sandbox& sandbox,
                      const RunLimits& limits) {
  CompileResult result;
  const fs::path& dir = sandbox.path();
  if (dir.empty() || !fs::is_directory(dir)) throw Error("SandboxSetupFailure", "sandbox directory missing");
  result.source_path = dir / profile.entry_file;
  try {
    text::write_file(result.source_path, apply_entry_convention(code, profile));
  } catch (const IoError& e) {
    throw Error("SandboxSetupFailure", e.what());
  }

  const auto& cmd = profile.interpreted() ? profile.check_cmd : profile.compile_cmd;
  const fs::path artifact = profile.interpreted() ? fs::path() : dir / profile.artifact;
  const fs::path rel_artifact = profile.interpreted() ? fs::path() : fs::path(".") / profile.artifact;
  if (cmd.empty()) {
    result.status = CompileStatus::Ok;
    return result;
  }
  if (!process::find_executable(cmd.front())) {
    result.status = CompileStatus::ToolMissing;
    result.diagnostics = "toolchain program not found: " + cmd.front();
    return result;
  }

  process::Limits plimits;
  plimits.deadline = limits.compile_deadline;
  // relative paths keep sandbox names out of diagnostics (they feed prompt digests)
  auto res = process::run(expand(cmd, profile.entry_file, rel_artifact, ".", limits.memory_cap), {}, dir, plimits);
  result.elapsed = res.elapsed;
  result.diagnostics = res.err;
  if (!res.out.empty()) {
    if (!result.diagnostics.empty() && result.diagnostics.back() != '\n') result.diagnostics.push_back('\n');
    result.diagnostics += res.out;
  }
  if (res.spawn_failed) {
    result.status = CompileStatus::ToolMissing;
    return result;
  }
  if (res.ok() && (profile.interpreted() || fs::exists(artifact))) {
    result.status = CompileStatus::Ok;
    if (!profile.interpreted()) result.artifact = artifact;
    return result;
  }
  result.status = CompileStatus::Error;
  if (res.timed_out) result.diagnostics += "\ncompilation exceeded the deadline";
  if (text::is_blank(result.diagnostics)) {
    result.diagnostics = res.term_signal ? "compiler killed by signal " + std::to_string(res.term_signal)
                                         : "compiler exited with status " + std::to_string(res.exit_code);
  }
  return result;
}

TestRunResult run_tests(const CompileResult& compiled, const ToolchainProfile& profile, const Sandbox& sandbox,
                        const std::vector<TestCase>& tests, const RunLimits& limits) {
  if (compiled.status != CompileStatus::Ok) throw Error("SandboxFailure", "run_tests called on a failed build");
  const fs::path artifact = fs::path(".") / profile.artifact;
  const auto argv = expand(profile.run_cmd, profile.entry_file, artifact, ".", limits.memory_cap);

  process::Limits plimits;
  plimits.deadline = limits.wall_deadline;
  if (profile.apply_memory_rlimit) plimits.memory_bytes = limits.memory_cap + (profile.address_space_slack_mb << 20);

  TestRunResult result;
  bool decided = false;
  for (const auto& test : tests) {
    auto res = process::run(argv, test.input, sandbox.path(), plimits);
    if (res.spawn_failed) throw Error("SandboxFailure", res.err);
    TestRun run;
    run.elapsed = res.elapsed;
    run.actual_output = std::move(res.out);
    if (res.timed_out)
      run.verdict = TestVerdict::Timeout;
    else if (res.output_overflow || res.term_signal != 0 || res.exit_code != 0)
      run.verdict = TestVerdict::RuntimeError;
    else if (normalize_output(run.actual_output) != normalize_output(test.expected_output))
      run.verdict = TestVerdict::Mismatch;
    else
      run.verdict = TestVerdict::Pass;

    if (!decided && run.verdict != TestVerdict::Pass) {
      decided = true;
      switch (run.verdict) {
        case TestVerdict::Mismatch: result.overall = Outcome::TestMismatch; break;
        case TestVerdict::RuntimeError: result.overall = Outcome::RuntimeError; break;
        case TestVerdict::Timeout: result.overall = Outcome::Timeout; break;
        case TestVerdict::Pass: break;
      }
    }
    result.per_test.push_back(std::move(run));
    if (decided && limits.fail_fast) break;
  }
  return result;
}

Outcome classify(const CompileResult& compiled, const TestRunResult* run) {
  if (compiled.status != CompileStatus::Ok) return Outcome::CompilationError;
  if (run == nullptr) throw Error("InvalidArgument", "classify: run result required for a successful build");
  return run->overall;
}

// ---------------------------------------------------------------------------
// Harness

Harness::Build Harness::build(std::string_view code, const SubjectLanguage& language) const {
  const auto& profile = registry_.at(language.id());
  Build b;
  b.result = compile(code, profile, b.sandbox, limits_);
  return b;
}

TestRunResult Harness::test(const Build& build, const SubjectLanguage& language,
                            const std::vector<TestCase>& tests) const {
  return run_tests(build.result, registry_.at(language.id()), build.sandbox, tests, limits_);
}

SourceRun Harness::run_source(const CodeSample& sample) const {
  SourceRun out;
  Build b = build(sample.source_text, sample.language);
  if (b.result.status != CompileStatus::Ok) {
    out.compiled = false;
    out.diagnostics = b.result.diagnostics;
    return out;
  }
  RunLimits all = limits_;
  all.fail_fast = false;
  auto run = run_tests(b.result, registry_.at(sample.language.id()), b.sandbox, sample.tests, all);
  for (auto& t : run.per_test) {
    out.tests.push_back({.actual_output = std::move(t.actual_output),
                         .timed_out = t.verdict == TestVerdict::Timeout,
                         .failed = t.verdict == TestVerdict::RuntimeError});
  }
  return out;
}

}  // namespace transbench
