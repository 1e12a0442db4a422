#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace transbench::process {

struct Limits {
  std::chrono::milliseconds deadline{10'000};
  /// Address-space cap applied to the child (RLIMIT_AS); none = unlimited.
  std::optional<std::size_t> memory_bytes;
  /// Captured stdout/stderr beyond this many bytes kills the child.
  std::size_t output_cap = 16u << 20;
};

struct Result {
  int exit_code = -1;     // valid when the child exited normally
  int term_signal = 0;    // non-zero when the child was killed by a signal
  bool timed_out = false;
  bool output_overflow = false;
  bool spawn_failed = false;  // execvp failed (binary missing, not executable)
  std::string out;
  std::string err;
  std::chrono::milliseconds elapsed{0};

  bool ok() const { return !timed_out && !spawn_failed && !output_overflow && term_signal == 0 && exit_code == 0; }
};

/// Runs `argv` in `cwd` in its own process group, feeding `stdin_data` and then
/// closing stdin. On deadline expiry the whole group is killed with SIGKILL.
/// Throws transbench::Error("SandboxFailure") if pipes or fork fail.
Result run(const std::vector<std::string>& argv, std::string_view stdin_data,
           const std::filesystem::path& cwd, const Limits& limits);

/// PATH lookup in the style of execvp. Names containing '/' are checked as-is.
std::optional<std::filesystem::path> find_executable(std::string_view name);

}  // namespace transbench::process
