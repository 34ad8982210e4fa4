#include "msego/subprocess.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "msego/errors.hpp"

namespace msego {

SubprocessEvaluator::SubprocessEvaluator(Options options) : options_(std::move(options)) {
  if (options_.command.empty()) throw std::invalid_argument("SubprocessEvaluator: empty command");
  if (options_.n_constraints < 0) throw std::invalid_argument("SubprocessEvaluator: bad constraint count");
  ::signal(SIGPIPE, SIG_IGN);
}

SubprocessEvaluator::~SubprocessEvaluator() { shutdown(); }

void SubprocessEvaluator::spawn() {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw EvaluationError("SubprocessEvaluator: pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw EvaluationError("SubprocessEvaluator: pipe failed");
  }

  const int pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw EvaluationError("SubprocessEvaluator: fork failed");
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    std::vector<char*> argv;
    argv.reserve(options_.command.size() + 1);
    for (const std::string& a : options_.command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }

  ::close(to_child[0]);
  ::close(from_child[1]);
  pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  buffer_.clear();
}

void SubprocessEvaluator::shutdown() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = -1;
  from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string SubprocessEvaluator::read_line_with_timeout() {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::milliseconds(options_.timeout_ms);
  for (;;) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw EvaluationError("SubprocessEvaluator: response timed out");
    const int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    struct pollfd pfd = {from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, std::max(wait_ms, 1));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw EvaluationError("SubprocessEvaluator: poll failed");
    }
    if (rc == 0) throw EvaluationError("SubprocessEvaluator: response timed out");
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n <= 0) throw EvaluationError("SubprocessEvaluator: child closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::pair<double, std::vector<double>> SubprocessEvaluator::evaluate(const MixedPoint& w) {
  if (pid_ <= 0) spawn();
  try {
    nlohmann::json req;
    req["point"] = {{"x", w.x}, {"z", w.z}, {"c", w.c}};
    const std::string line = req.dump() + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
      if (n <= 0) throw EvaluationError("SubprocessEvaluator: write to child failed");
      off += static_cast<std::size_t>(n);
    }

    const std::string reply = read_line_with_timeout();
    nlohmann::json resp;
    try {
      resp = nlohmann::json::parse(reply);
    } catch (const nlohmann::json::parse_error&) {
      throw EvaluationError("SubprocessEvaluator: malformed response: " + reply);
    }
    if (!resp.contains("f") || !resp["f"].is_number()) {
      throw EvaluationError("SubprocessEvaluator: response missing numeric 'f'");
    }
    const double f = resp["f"].get<double>();
    std::vector<double> g;
    if (resp.contains("g")) {
      if (!resp["g"].is_array()) throw EvaluationError("SubprocessEvaluator: 'g' must be an array");
      for (const auto& v : resp["g"]) {
        if (!v.is_number()) throw EvaluationError("SubprocessEvaluator: non-numeric constraint value");
        g.push_back(v.get<double>());
      }
    }
    if (static_cast<int>(g.size()) != options_.n_constraints) {
      throw EvaluationError("SubprocessEvaluator: expected " + std::to_string(options_.n_constraints) +
                            " constraint values, got " + std::to_string(g.size()));
    }
    return {f, std::move(g)};
  } catch (const EvaluationError&) {
    shutdown();  // respawn on next call
    throw;
  }
}

}  // namespace msego
