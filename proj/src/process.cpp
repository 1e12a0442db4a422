#include "transbench/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <thread>
#include <utility>

#include "transbench/error.hpp"
#include "transbench/text.hpp"

namespace transbench::process {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw Error("SandboxFailure", std::string("pipe2: ") + std::strerror(errno));
  return Pipe{Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) {
  int flags = ::fcntl(fd, F_GETFL);
  ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

[[noreturn]] void child_fail(int err_fd) {
  int e = errno;
  [[maybe_unused]] auto n = ::write(err_fd, &e, sizeof e);
  ::_exit(127);
}

}  // namespace

Result run(const std::vector<std::string>& argv, std::string_view stdin_data,
           const std::filesystem::path& cwd, const Limits& limits) {
  if (argv.empty()) throw Error("SandboxFailure", "empty argv");
  ignore_sigpipe_once();

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  const std::string cwd_str = cwd.string();

  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe exec_err = make_pipe();

  const auto start = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw Error("SandboxFailure", std::string("fork: ") + std::strerror(errno));

  if (pid == 0) {
    // child: async-signal-safe calls only
    ::setpgid(0, 0);
    ::signal(SIGPIPE, SIG_DFL);
    if (::dup2(in.read.get(), STDIN_FILENO) < 0 || ::dup2(out.write.get(), STDOUT_FILENO) < 0 ||
        ::dup2(err.write.get(), STDERR_FILENO) < 0)
      child_fail(exec_err.write.get());
    if (!cwd_str.empty() && ::chdir(cwd_str.c_str()) != 0) child_fail(exec_err.write.get());
    if (limits.memory_bytes) {
      rlimit rl{static_cast<rlim_t>(*limits.memory_bytes), static_cast<rlim_t>(*limits.memory_bytes)};
      ::setrlimit(RLIMIT_AS, &rl);
    }
    rlimit core{0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    ::execvp(cargv[0], cargv.data());
    child_fail(exec_err.write.get());
  }

  ::setpgid(pid, pid);
  in.read.reset();
  out.write.reset();
  err.write.reset();
  exec_err.write.reset();

  Result result;

  int exec_errno = 0;
  ssize_t n = ::read(exec_err.read.get(), &exec_errno, sizeof exec_errno);
  if (n == static_cast<ssize_t>(sizeof exec_errno)) {
    ::waitpid(pid, nullptr, 0);
    result.spawn_failed = true;
    result.err = std::string("cannot execute ") + argv[0] + ": " + std::strerror(exec_errno);
    result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return result;
  }

  set_nonblocking(in.write.get());
  set_nonblocking(out.read.get());
  set_nonblocking(err.read.get());

  std::size_t written = 0;
  if (stdin_data.empty()) in.write.reset();

  const auto deadline = start + limits.deadline;
  bool killed = false;
  auto kill_group = [&] {
    if (!killed) {
      ::kill(-pid, SIGKILL);
      killed = true;
    }
  };

  char buf[65536];
  while (out.read || err.read) {
    auto now = Clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill_group();
      break;
    }
    pollfd fds[3];
    int nfds = 0;
    int idx_in = -1, idx_out = -1, idx_err = -1;
    if (in.write) {
      idx_in = nfds;
      fds[nfds++] = {in.write.get(), POLLOUT, 0};
    }
    if (out.read) {
      idx_out = nfds;
      fds[nfds++] = {out.read.get(), POLLIN, 0};
    }
    if (err.read) {
      idx_err = nfds;
      fds[nfds++] = {err.read.get(), POLLIN, 0};
    }
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    int rc = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(remaining));
    if (rc < 0) {
      if (errno == EINTR) continue;
      kill_group();
      ::waitpid(pid, nullptr, 0);
      throw Error("SandboxFailure", std::string("poll: ") + std::strerror(errno));
    }
    if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::write(in.write.get(), stdin_data.data() + written, stdin_data.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) in.write.reset();  // reader went away
      if (written >= stdin_data.size()) in.write.reset();
    }
    auto drain = [&](int idx, Fd& fd, std::string& sink) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      ssize_t r = ::read(fd.get(), buf, sizeof buf);
      if (r > 0) {
        sink.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        fd.reset();
      }
    };
    drain(idx_out, out.read, result.out);
    drain(idx_err, err.read, result.err);
    if (result.out.size() + result.err.size() > limits.output_cap) {
      result.output_overflow = true;
      kill_group();
      break;
    }
  }
  in.write.reset();

  // Pipes closed (or we gave up); reap the child, still honouring the deadline.
  int status = 0;
  while (true) {
    pid_t w = ::waitpid(pid, &status, killed ? 0 : WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (!killed && Clock::now() >= deadline) {
      result.timed_out = true;
      kill_group();
      continue;
    }
    if (!killed) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  // stray grandchildren
  ::kill(-pid, SIGKILL);

  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return result;
}

std::optional<std::filesystem::path> find_executable(std::string_view name) {
  if (name.empty()) return std::nullopt;
  auto executable = [](const std::filesystem::path& p) {
    std::error_code ec;
    return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string_view::npos) {
    std::filesystem::path p(name);
    if (executable(p)) return p;
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  std::string path = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
  for (const auto& dir : text::split(path, ':')) {
    if (dir.empty()) continue;
    std::filesystem::path candidate = std::filesystem::path(dir) / name;
    if (executable(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace transbench::process
