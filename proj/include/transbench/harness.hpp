#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transbench/corpus.hpp"
#include "transbench/language.hpp"
#include "transbench/normalize.hpp"

namespace transbench {

/// Five-way verdict for one evaluated translation attempt.
enum class Outcome { Success, CompilationError, TestMismatch, RuntimeError, Timeout };

std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);
inline constexpr Outcome kAllOutcomes[] = {Outcome::Success, Outcome::CompilationError, Outcome::TestMismatch,
                                           Outcome::RuntimeError, Outcome::Timeout};

/// How to build and run programs of one subject language. Argument templates
/// may contain {source}, {artifact}, {workdir} and {memory_mb}.
struct ToolchainProfile {
  SubjectLanguage language;
  /// Empty for interpreted languages.
  std::vector<std::string> compile_cmd;
  /// Interpreter syntax check used instead of compile_cmd for interpreted languages.
  std::vector<std::string> check_cmd;
  std::vector<std::string> run_cmd;
  std::vector<std::string> version_probe;
  /// File name the translated program is written to inside the sandbox.
  std::string entry_file;
  /// Artifact file name for compiled languages, relative to the sandbox.
  std::string artifact;
  /// Whether the address-space cap is applied when running (JVMs reserve far
  /// more virtual memory than they use and need a heap flag instead).
  bool apply_memory_rlimit = true;
  /// Address space granted on top of the memory cap, for runtimes that
  /// reserve large arenas at startup (the Go runtime needs ~600 MiB).
  std::size_t address_space_slack_mb = 0;

  bool interpreted() const { return compile_cmd.empty(); }
};

/// Language id -> profile. Lookups of unknown ids throw ConfigError.
class ToolchainRegistry {
 public:
  static ToolchainRegistry defaults();
  /// Reads `toolchains.json`; entries override/extend the defaults.
  static ToolchainRegistry load(const std::filesystem::path& path);

  void add(ToolchainProfile profile);
  bool contains(std::string_view id) const;
  const ToolchainProfile& at(std::string_view id) const;
  std::vector<std::string> ids() const;

  /// First line of the version probe output, or nullopt when the tool is missing.
  std::optional<std::string> probe_version(std::string_view id) const;
  /// True when every program the profile needs is found on PATH.
  bool resolvable(std::string_view id) const;

 private:
  std::map<std::string, ToolchainProfile, std::less<>> profiles_;
};

/// Temporary working directory removed (recursively) on destruction.
class Sandbox {
 public:
  Sandbox();
  explicit Sandbox(const std::filesystem::path& parent);
  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;
  Sandbox(Sandbox&& other) noexcept;
  Sandbox& operator=(Sandbox&& other) noexcept;
  ~Sandbox();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

enum class CompileStatus { Ok, Error, ToolMissing };
std::string_view to_string(CompileStatus s);

struct CompileResult {
  CompileStatus status = CompileStatus::Error;
  std::string diagnostics;
  std::optional<std::filesystem::path> artifact;
  /// Program file inside the sandbox.
  std::filesystem::path source_path;
  std::chrono::milliseconds elapsed{0};
};

struct RunLimits {
  std::chrono::milliseconds wall_deadline{10'000};
  std::size_t memory_cap = 512u << 20;
  std::chrono::milliseconds compile_deadline{120'000};
  bool fail_fast = false;
};

enum class TestVerdict { Pass, Mismatch, RuntimeError, Timeout };
std::string_view to_string(TestVerdict v);

struct TestRun {
  TestVerdict verdict = TestVerdict::Pass;
  std::string actual_output;
  std::chrono::milliseconds elapsed{0};
};

struct TestRunResult {
  std::vector<TestRun> per_test;
  Outcome overall = Outcome::Success;
};

/// Rewrites a Java program so its public top-level class is named after the
/// profile's entry file (e.g. `public class Solution` -> `Main`), renaming every
/// whole-word occurrence of the old name.
std::string apply_entry_convention(std::string_view code, const ToolchainProfile& profile);

/// Writes `code` into the sandbox and builds it. For interpreted profiles runs
/// check_cmd (if any) instead. Throws Error("SandboxSetupFailure") on I/O problems.
CompileResult compile(std::string_view code, const ToolchainProfile& profile, const Sandbox& sandbox,
                      const RunLimits& limits = {});

/// Runs every test (or stops at the first failure when limits.fail_fast).
/// Precondition: compiled.status == Ok.
TestRunResult run_tests(const CompileResult& compiled, const ToolchainProfile& profile, const Sandbox& sandbox,
                        const std::vector<TestCase>& tests, const RunLimits& limits = {});

/// CompilationError if compilation failed, otherwise the run's overall outcome.
Outcome classify(const CompileResult& compiled, const TestRunResult* run);

/// Convenience wrapper owning a registry and limits.
class Harness : public ProgramRunner {
 public:
  Harness(ToolchainRegistry registry, RunLimits limits) : registry_(std::move(registry)), limits_(limits) {}

  const ToolchainRegistry& registry() const { return registry_; }
  const RunLimits& limits() const { return limits_; }

  /// Compiled program together with the sandbox holding its artifact.
  struct Build {
    Sandbox sandbox;
    CompileResult result;
  };
  Build build(std::string_view code, const SubjectLanguage& language) const;
  TestRunResult test(const Build& build, const SubjectLanguage& language, const std::vector<TestCase>& tests) const;

  /// ProgramRunner: used by corpus validation to execute original sources.
  SourceRun run_source(const CodeSample& sample) const override;

 private:
  ToolchainRegistry registry_;
  RunLimits limits_;
};

}  // namespace transbench
