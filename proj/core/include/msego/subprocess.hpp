#pragma once

#include <string>
#include <utility>
#include <vector>

#include "msego/mixed_space.hpp"

namespace msego {

/// Line-delimited JSON black box over a child process's standard streams.
/// Request:  {"point": {"x": [...], "z": [...], "c": [...]}}
/// Response: {"f": <real>, "g": [<real>, ...]}
///
/// Any protocol failure (child exit, malformed reply, timeout, wrong
/// constraint count) raises EvaluationError; the child is respawned on the
/// next call.  Construction installs SIG_IGN for SIGPIPE.
class SubprocessEvaluator {
 public:
  struct Options {
    std::vector<std::string> command;  // argv, command[0] resolved via PATH
    int n_constraints = 0;
    int timeout_ms = 30000;
  };

  explicit SubprocessEvaluator(Options options);
  ~SubprocessEvaluator();

  SubprocessEvaluator(const SubprocessEvaluator&) = delete;
  SubprocessEvaluator& operator=(const SubprocessEvaluator&) = delete;

  std::pair<double, std::vector<double>> evaluate(const MixedPoint& w);

  bool running() const { return pid_ > 0; }

 private:
  void spawn();
  void shutdown();
  std::string read_line_with_timeout();

  Options options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

}  // namespace msego
