#include "paxts/bridge.hpp"

#include "paxts/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace paxts {

using nlohmann::json;

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) return fmt::format("exited with status {}", WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return fmt::format("killed by signal {}", WTERMSIG(status));
  return "terminated";
}

json encode_window(const Matrix& x) {
  json rows = json::array();
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    json row = json::array();
    for (Eigen::Index i = 0; i < x.cols(); ++i) row.push_back(x(c, i));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

struct ExternalForecaster::Process {
  pid_t pid = -1;
  int in = -1;   // child's stdin
  int out = -1;  // child's stdout
  int err = -1;  // child's stderr
  std::string pending;  // bytes read from stdout past the last newline
  std::thread err_reader;
  mutable std::mutex err_mutex;
  std::string err_text;
  bool reaped = false;
  int status = 0;

  ~Process() {
    close_fd(in);
    close_fd(out);
    if (err_reader.joinable()) err_reader.join();
    close_fd(err);
  }

  std::string stderr_snapshot() const {
    std::lock_guard lock(err_mutex);
    return err_text;
  }

  // Waits up to `limit` for exit; returns false if still running.
  bool wait_exit(std::chrono::milliseconds limit) {
    if (reaped) return true;
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (true) {
      const pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) {
        reaped = true;
        return true;
      }
      if (r < 0) {
        reaped = true;
        status = 0;
        return true;
      }
      if (std::chrono::steady_clock::now() >= deadline) return false;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

  void kill_and_reap() {
    if (reaped) return;
    ::kill(pid, SIGKILL);
    wait_exit(std::chrono::seconds(5));
  }
};

ExternalForecaster::ExternalForecaster(std::vector<std::string> command, ForecastShape shape,
                                       std::chrono::milliseconds timeout)
    : Forecaster(fmt::format("extern:{}", fmt::join(command, " ")), shape, Concurrency::SerializedOnly),
      command_(std::move(command)),
      timeout_(timeout) {
  if (command_.empty()) throw ArgumentError("external forecaster needs a command");
  ignore_sigpipe();

  int in_pipe[2], out_pipe[2], err_pipe[2], exec_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) || ::pipe2(out_pipe, O_CLOEXEC) || ::pipe2(err_pipe, O_CLOEXEC) ||
      ::pipe2(exec_pipe, O_CLOEXEC)) {
    throw ProtocolError(fmt::format("spawn failure: pipe: {}", std::strerror(errno)));
  }

  std::vector<char*> argv;
  for (auto& arg : command_) argv.push_back(arg.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError(fmt::format("spawn failure: fork: {}", std::strerror(errno)));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    const int code = errno;
    [[maybe_unused]] auto n = ::write(exec_pipe[1], &code, sizeof code);
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  ::close(exec_pipe[1]);

  process_ = std::make_unique<Process>();
  process_->pid = pid;
  process_->in = in_pipe[1];
  process_->out = out_pipe[0];
  process_->err = err_pipe[0];

  int exec_errno = 0;
  const auto got = ::read(exec_pipe[0], &exec_errno, sizeof exec_errno);
  ::close(exec_pipe[0]);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    process_->wait_exit(std::chrono::seconds(5));
    const auto program = command_.front();
    process_.reset();
    throw ProtocolError(fmt::format("spawn failure: cannot execute '{}': {}", program, std::strerror(exec_errno)));
  }

  process_->err_reader = std::thread([p = process_.get()] {
    char buf[4096];
    while (true) {
      const auto n = ::read(p->err, buf, sizeof buf);
      if (n > 0) {
        std::lock_guard lock(p->err_mutex);
        p->err_text.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        break;
      }
    }
  });

  json hello = {{"type", "hello"},
                {"lookback", shape.lookback},
                {"horizon", shape.horizon},
                {"channels", shape.channels},
                {"version", kProtocolVersion}};
  try {
    send_line(hello.dump());
    const auto line = read_line();
    json reply;
    try {
      reply = json::parse(line);
    } catch (const json::exception&) {
      fail(fmt::format("protocol violation: malformed handshake reply '{}'", line));
    }
    if (!reply.is_object() || reply.value("type", "") != "ready") {
      fail(fmt::format("protocol violation: expected {{\"type\":\"ready\"}}, got '{}'", line));
    }
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalForecaster::~ExternalForecaster() { shutdown(); }

bool ExternalForecaster::alive() const {
  std::lock_guard lock(request_mutex_);
  return process_ && !broken_;
}

std::string ExternalForecaster::diagnostics() const {
  return process_ ? process_->stderr_snapshot() : std::string{};
}

void ExternalForecaster::shutdown() {
  if (!process_) return;
  if (!broken_ && !process_->reaped) {
    const std::string bye = "{\"type\":\"bye\"}\n";
    [[maybe_unused]] auto n = ::write(process_->in, bye.data(), bye.size());
  }
  close_fd(process_->in);
  if (!process_->wait_exit(timeout_)) process_->kill_and_reap();
  process_.reset();
}

void ExternalForecaster::fail(const std::string& message) {
  broken_ = true;
  std::string detail = message;
  if (process_) {
    if (!process_->wait_exit(std::chrono::milliseconds(200))) process_->kill_and_reap();
    close_fd(process_->out);
    if (process_->err_reader.joinable()) process_->err_reader.join();
    const auto text = process_->stderr_snapshot();
    if (!text.empty()) detail += fmt::format("; child stderr: {}", text);
  }
  throw ProtocolError(detail);
}

void ExternalForecaster::send_line(const std::string& line) {
  std::string data = line;
  data.push_back('\n');
  std::size_t offset = 0;
  while (offset < data.size()) {
    const auto n = ::write(process_->in, data.data() + offset, data.size() - offset);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int code = errno;
      if (process_->wait_exit(std::chrono::milliseconds(500))) {
        fail(fmt::format("child {} while receiving a request", describe_status(process_->status)));
      }
      fail(fmt::format("write to child failed: {}", std::strerror(code)));
    }
    offset += static_cast<std::size_t>(n);
  }
}

std::string ExternalForecaster::read_line() {
  auto& p = *process_;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    if (const auto nl = p.pending.find('\n'); nl != std::string::npos) {
      std::string line = p.pending.substr(0, nl);
      p.pending.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      fail(fmt::format("timeout: no reply from child within {} ms", timeout_.count()));
    }
    pollfd pfd{p.out, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(fmt::format("poll failed: {}", std::strerror(errno)));
    }
    if (ready == 0) continue;
    char buf[65536];
    const auto n = ::read(p.out, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(fmt::format("read from child failed: {}", std::strerror(errno)));
    }
    if (n == 0) {
      p.wait_exit(std::chrono::seconds(2));
      fail(fmt::format("child {} before replying", p.reaped ? describe_status(p.status) : "closed stdout"));
    }
    p.pending.append(buf, static_cast<std::size_t>(n));
  }
}

std::vector<Matrix> ExternalForecaster::forecast(std::span<const Matrix> inputs) {
  std::lock_guard lock(request_mutex_);
  if (!process_ || broken_) throw ProtocolError(fmt::format("{}: forecaster process is not running", name()));

  const auto id = next_id_++;
  json batch = json::array();
  for (const auto& x : inputs) batch.push_back(encode_window(x));
  const json request = {{"type", "predict"}, {"id", id}, {"batch", std::move(batch)}};
  send_line(request.dump());

  const auto line = read_line();
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::exception&) {
    fail(fmt::format("protocol violation: malformed line '{}'", line.substr(0, 200)));
  }
  if (!reply.is_object() || reply.value("type", "") != "forecast") {
    fail(fmt::format("protocol violation: expected a forecast message, got '{}'", line.substr(0, 200)));
  }
  if (!reply.contains("id") || !reply["id"].is_number_unsigned() || reply["id"].get<std::uint64_t>() != id) {
    fail(fmt::format("protocol violation: id mismatch, expected {}, got {}", id,
                     reply.contains("id") ? reply["id"].dump() : "none"));
  }
  const auto& out = reply["batch"];
  if (!out.is_array()) fail("protocol violation: forecast batch is not an array");
  if (out.size() != inputs.size()) {
    fail(fmt::format("protocol violation: batch size mismatch, expected {}, got {}", inputs.size(), out.size()));
  }

  const auto d = channels();
  const auto h = horizon();
  std::vector<Matrix> forecasts;
  forecasts.reserve(inputs.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& rows = out[k];
    if (!rows.is_array() || rows.size() != d) {
      fail(fmt::format("protocol violation: forecast {} has {} channels, expected {}", k,
                       rows.is_array() ? rows.size() : 0, d));
    }
    Matrix y(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(h));
    for (std::size_t c = 0; c < d; ++c) {
      const auto& row = rows[c];
      if (!row.is_array() || row.size() != h) {
        fail(fmt::format("protocol violation: forecast {} channel {} has {} steps, expected {}", k, c,
                         row.is_array() ? row.size() : 0, h));
      }
      for (std::size_t n = 0; n < h; ++n) {
        if (!row[n].is_number()) {
          fail(fmt::format("protocol violation: forecast {} channel {} step {} is not a number", k, c, n + 1));
        }
        y(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(n)) = row[n].get<double>();
      }
    }
    forecasts.push_back(std::move(y));
  }
  return forecasts;
}

std::vector<std::string> split_command_line(const std::string& command_line) {
  std::vector<std::string> parts;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (const char ch : command_line) {
    if (quote) {
      if (ch == quote) {
        quote = 0;
      } else {
        current.push_back(ch);
      }
    } else if (ch == '\'' || ch == '"') {
      quote = ch;
      in_token = true;
    } else if (ch == ' ' || ch == '\t') {
      if (in_token) {
        parts.push_back(std::move(current));
        current.clear();
        in_token = false;
      }
    } else {
      current.push_back(ch);
      in_token = true;
    }
  }
  if (quote) throw ArgumentError(fmt::format("unterminated quote in command '{}'", command_line));
  if (in_token) parts.push_back(std::move(current));
  return parts;
}

}  // namespace paxts
