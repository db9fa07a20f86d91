#pragma once

#include <string>
#include <sys/types.h>
#include <vector>

namespace grembed {

// One spawned child with its stdout on a nonblocking pipe; stderr is
// inherited. The destructor kills and reaps anything still running.
class ChildProcess {
 public:
  static ChildProcess spawn(const std::string& exe, const std::vector<std::string>& args);

  ChildProcess() = default;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess();

  pid_t pid() const { return pid_; }
  int stdout_fd() const { return out_fd_; }
  bool running();
  // Blocks; returns the exit code, or 128+signal for a signalled child.
  int wait();
  void kill_now();

  // Drains the stdout pipe and returns any newly completed lines.
  std::vector<std::string> read_lines();

 private:
  void reset();

  pid_t pid_ = -1;
  int out_fd_ = -1;
  int exit_code_ = -1;
  bool reaped_ = false;
  std::string pending_;
};

// Directory holding this process's executable; sibling binaries (worker,
// pserver) are found here. GREMBED_BIN_DIR overrides.
std::string bin_dir();

} // namespace grembed
