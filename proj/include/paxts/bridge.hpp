#pragma once

#include "paxts/forecasters.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace paxts {

/// Forecaster backed by a child process speaking line-delimited JSON on its
/// stdin/stdout:
///
///   -> {"type":"hello","lookback":b,"horizon":h,"channels":d,"version":1}
///   <- {"type":"ready"}
///   -> {"type":"predict","id":N,"batch":[[[...b values]...d rows]...]}
///   <- {"type":"forecast","id":N,"batch":[[[...h values]...d rows]...]}
///   -> {"type":"bye"}
///
/// Anything else on the child's stdout is a protocol violation; after any
/// failure the handle is dead and every later call throws. SerializedOnly.
class ExternalForecaster final : public Forecaster {
 public:
  static constexpr int kProtocolVersion = 1;

  ExternalForecaster(std::vector<std::string> command, ForecastShape shape,
                     std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalForecaster() override;

  bool alive() const;
  /// Child stderr captured so far.
  std::string diagnostics() const;

 protected:
  std::vector<Matrix> forecast(std::span<const Matrix> inputs) override;

 private:
  struct Process;

  [[noreturn]] void fail(const std::string& message);
  void send_line(const std::string& line);
  std::string read_line();
  void shutdown();

  std::vector<std::string> command_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<Process> process_;
  mutable std::mutex request_mutex_;
  std::uint64_t next_id_ = 1;
  bool broken_ = false;
};

/// Splits a command line on whitespace, honoring single and double quotes.
std::vector<std::string> split_command_line(const std::string& command_line);

}  // namespace paxts
