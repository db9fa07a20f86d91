#include "grembed/proc.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace grembed {

ChildProcess ChildProcess::spawn(const std::string& exe,
                                 const std::vector<std::string>& args) {
  int pipefd[2];
  if (pipe(pipefd) < 0) throw std::runtime_error("pipe() failed");

  pid_t pid = fork();
  if (pid < 0) {
    close(pipefd[0]);
    close(pipefd[1]);
    throw std::runtime_error("fork() failed");
  }
  if (pid == 0) {
    // Child: die with the parent so no orphan survives a crashed driver.
    prctl(PR_SET_PDEATHSIG, SIGKILL);
    close(pipefd[0]);
    dup2(pipefd[1], STDOUT_FILENO);
    close(pipefd[1]);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(exe.c_str()));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execv(exe.c_str(), argv.data());
    // Only reached on failure.
    fprintf(stderr, "exec %s failed: %s\n", exe.c_str(), strerror(errno));
    _exit(127);
  }
  close(pipefd[1]);
  int flags = fcntl(pipefd[0], F_GETFL, 0);
  fcntl(pipefd[0], F_SETFL, flags | O_NONBLOCK);

  ChildProcess c;
  c.pid_ = pid;
  c.out_fd_ = pipefd[0];
  return c;
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept { *this = std::move(other); }

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
  if (this != &other) {
    reset();
    pid_ = other.pid_;
    out_fd_ = other.out_fd_;
    exit_code_ = other.exit_code_;
    reaped_ = other.reaped_;
    pending_ = std::move(other.pending_);
    other.pid_ = -1;
    other.out_fd_ = -1;
    other.reaped_ = false;
  }
  return *this;
}

ChildProcess::~ChildProcess() { reset(); }

void ChildProcess::reset() {
  if (pid_ > 0 && !reaped_) {
    ::kill(pid_, SIGKILL);
    int status;
    waitpid(pid_, &status, 0);
    reaped_ = true;
  }
  if (out_fd_ >= 0) {
    close(out_fd_);
    out_fd_ = -1;
  }
  pid_ = -1;
}

bool ChildProcess::running() {
  if (pid_ <= 0 || reaped_) return false;
  int status;
  pid_t r = waitpid(pid_, &status, WNOHANG);
  if (r == 0) return true;
  if (r == pid_) {
    reaped_ = true;
    exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status)
                                   : (WIFSIGNALED(status) ? 128 + WTERMSIG(status) : -1);
  }
  return false;
}

int ChildProcess::wait() {
  if (pid_ <= 0) return exit_code_;
  if (!reaped_) {
    int status;
    if (waitpid(pid_, &status, 0) == pid_) {
      reaped_ = true;
      exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status)
                                     : (WIFSIGNALED(status) ? 128 + WTERMSIG(status) : -1);
    }
  }
  return exit_code_;
}

void ChildProcess::kill_now() {
  if (pid_ > 0 && !reaped_) ::kill(pid_, SIGKILL);
}

std::vector<std::string> ChildProcess::read_lines() {
  std::vector<std::string> lines;
  if (out_fd_ < 0) return lines;
  char buf[16 * 1024];
  for (;;) {
    ssize_t n = ::read(out_fd_, buf, sizeof buf);
    if (n > 0) {
      pending_.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    break; // EOF or EAGAIN; either way parse what we have
  }
  std::size_t at = 0;
  for (;;) {
    auto nl = pending_.find('\n', at);
    if (nl == std::string::npos) break;
    lines.push_back(pending_.substr(at, nl - at));
    at = nl + 1;
  }
  pending_.erase(0, at);
  return lines;
}

std::string bin_dir() {
  if (const char* env = std::getenv("GREMBED_BIN_DIR")) return env;
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n <= 0) throw std::runtime_error("cannot resolve /proc/self/exe");
  buf[n] = '\0';
  std::string path(buf);
  auto slash = path.rfind('/');
  return slash == std::string::npos ? "." : path.substr(0, slash);
}

} // namespace grembed
