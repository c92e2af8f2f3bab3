#include "paxts/bridge.hpp"
#include "paxts/error.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <string>

namespace paxts {
namespace {

using namespace std::chrono_literals;
using testing::row;

std::vector<std::string> fixture(const std::string& mode) {
  return {PAXTS_PYTHON, PAXTS_FIXTURES "/echo_forecaster.py", "--mode", mode};
}

std::string failure_of(ExternalForecaster& model, const Matrix& x) {
  try {
    model.predict(x);
  } catch (const ProtocolError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

TEST(Bridge, EchoRoundTrip) {
  ExternalForecaster model(fixture("echo"), {3, 2, 1});
  EXPECT_EQ(model.concurrency(), Concurrency::SerializedOnly);
  EXPECT_EQ(model.predict(row({1, 2, 3})), row({3, 3}));
  EXPECT_EQ(model.predict(row({-1.5, 0.25, 7})), row({7, 7}));
  EXPECT_TRUE(model.alive());
  EXPECT_EQ(model.call_count(), 2u);
}

TEST(Bridge, MatchesBuiltinNaiveBitExactly) {
  const ForecastShape shape{12, 5, 2};
  ExternalForecaster bridged(fixture("echo"), shape);
  NaiveForecaster builtin(shape);
  testing::Gen gen;
  std::vector<Matrix> windows;
  for (int i = 0; i < 50; ++i) {
    Matrix x = gen.matrix(2, 12, -1e3, 1e3);
    x(0, 11) = gen.normal() * 1e-7;  // awkward decimal expansions
    x(1, 11) = 1.0 / 3.0 + static_cast<double>(i);
    windows.push_back(std::move(x));
  }
  const auto a = bridged.predict_batch(windows);
  const auto b = builtin.predict_batch(windows);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]) << i;
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(bridged.predict(windows[i]), b[i]);
}

TEST(Bridge, WrongBatchSize) {
  ExternalForecaster model(fixture("wrong-batch"), {3, 2, 1});
  const std::vector<Matrix> batch{row({1, 2, 3}), row({4, 5, 6}), row({7, 8, 9})};
  try {
    model.predict_batch(batch);
    FAIL() << "no error";
  } catch (const ProtocolError& e) {
    EXPECT_TRUE(contains(e.what(), "batch size mismatch, expected 3, got 2")) << e.what();
  }
  EXPECT_FALSE(model.alive());
  EXPECT_THROW(model.predict(row({1, 2, 3})), ProtocolError);
}

TEST(Bridge, IdMismatch) {
  ExternalForecaster model(fixture("bad-id"), {3, 2, 1});
  EXPECT_TRUE(contains(failure_of(model, row({1, 2, 3})), "id mismatch"));
}

TEST(Bridge, MalformedLine) {
  ExternalForecaster model(fixture("malformed"), {3, 2, 1});
  const auto message = failure_of(model, row({1, 2, 3}));
  EXPECT_TRUE(contains(message, "malformed line")) << message;
  EXPECT_TRUE(contains(message, "this is not json")) << message;
}

TEST(Bridge, ChildExitCarriesStderr) {
  ExternalForecaster model(fixture("exit-mid"), {3, 2, 1});
  const auto message = failure_of(model, row({1, 2, 3}));
  EXPECT_TRUE(contains(message, "model crashed: out of memory")) << message;
  EXPECT_TRUE(contains(message, "status 4")) << message;
}

TEST(Bridge, HandshakeTimeout) {
  const auto start = std::chrono::steady_clock::now();
  try {
    ExternalForecaster model(fixture("no-ready"), {3, 2, 1}, 300ms);
    FAIL() << "no error";
  } catch (const ProtocolError& e) {
    EXPECT_TRUE(contains(e.what(), "timeout")) << e.what();
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, 10s);
}

TEST(Bridge, SpawnFailure) {
  try {
    ExternalForecaster model({"/nonexistent/forecaster-binary"}, {3, 2, 1}, 2s);
    FAIL() << "no error";
  } catch (const ProtocolError& e) {
    EXPECT_TRUE(contains(e.what(), "spawn failure")) << e.what();
  }
  EXPECT_THROW(ExternalForecaster({}, {3, 2, 1}), ArgumentError);
}

TEST(SplitCommandLine, Quotes) {
  EXPECT_EQ(split_command_line("python3 model.py --x 1"),
            (std::vector<std::string>{"python3", "model.py", "--x", "1"}));
  EXPECT_EQ(split_command_line("  run 'a b' \"c d\"  "), (std::vector<std::string>{"run", "a b", "c d"}));
  EXPECT_THROW(split_command_line("run 'open"), ArgumentError);
}

}  // namespace
}  // namespace paxts
