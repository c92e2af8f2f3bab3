// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the number of failures.
#include "paxts/bridge.hpp"
#include "paxts/cli.hpp"
#include "paxts/engine.hpp"
#include "paxts/error.hpp"
#include "paxts/metrics.hpp"
#include "paxts/patterns.hpp"

#include "test_util.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

namespace {

using namespace paxts;
using testing::Gen;
using testing::row;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

double ols_slope(const Matrix& x) {
  const double n = static_cast<double>(x.cols());
  const double mi = (n - 1) / 2, mv = x.mean();
  double sxy = 0, sxx = 0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    sxy += (static_cast<double>(i) - mi) * (x(0, i) - mv);
    sxx += (static_cast<double>(i) - mi) * (static_cast<double>(i) - mi);
  }
  return sxy / sxx;
}

std::vector<Window> as_windows(const std::vector<Matrix>& xs) {
  std::vector<Window> out;
  for (const auto& x : xs) out.push_back(Window{x, std::nullopt, out.size()});
  return out;
}

Outcome perturbation_algebra() {
  Outcome o;
  const auto start = Clock::now();
  Gen gen(11);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto b = gen.index(3, 40);
    const Matrix x = gen.matrix(1, b, -5, 9);
    // identity
    const PerturbationSpec zero[] = {PerturbationSpec::index(gen.index(1, b), 0.0), PerturbationSpec::mean(0.0),
                                     PerturbationSpec::variance(0.0), PerturbationSpec::trend(0.0)};
    for (const auto& spec : zero) o.check(apply(x, spec).x_prime == x, "identity at alpha=0");
    // locality
    const auto t = gen.index(1, b);
    const auto w = gen.index(0, 4);
    const Matrix xi = perturb_index(x, PerturbationSpec::index(t, 0.3, w)).x_prime;
    for (std::size_t i = 1; i <= b; ++i) {
      if ((i > t ? i - t : t - i) > w) o.check(xi(0, static_cast<Eigen::Index>(i - 1)) == x(0, static_cast<Eigen::Index>(i - 1)), "locality");
    }
    // moments
    const double alpha = gen.uniform(-0.9, 2.0);
    const double mu = x.mean();
    const double var = (x.array() - mu).square().mean();
    const Matrix m = scale_mean(x, alpha).x_prime;
    const Matrix v = scale_variance(x, alpha).x_prime;
    const auto var_of = [](const Matrix& y) { return (y.array() - y.mean()).square().mean(); };
    worst = std::max({worst, rel_err(m.mean(), (1 + alpha) * mu), rel_err(var_of(m), var), rel_err(v.mean(), mu),
                      rel_err(var_of(v), (1 + alpha) * var)});
    // trend anchors and refit slope
    const double slope = ols_slope(x);
    const double z = slope >= 0 ? alpha * slope : -alpha * slope;
    const double icpt = mu - slope * (static_cast<double>(b) - 1) / 2;
    for (const auto anchor : {TrendAnchor::LeftFixed, TrendAnchor::Symmetric, TrendAnchor::RightFixed}) {
      const Matrix y = adjust_trend(x, PerturbationSpec::trend(alpha, 1, anchor)).x_prime;
      const double s2 = ols_slope(y);
      const double i2 = y.mean() - s2 * (static_cast<double>(b) - 1) / 2;
      worst = std::max(worst, rel_err(s2, slope + z));
      const double at = anchor == TrendAnchor::LeftFixed    ? 0.0
                        : anchor == TrendAnchor::RightFixed ? static_cast<double>(b) - 1
                                                            : (static_cast<double>(b) - 1) / 2;
      worst = std::max(worst, rel_err(i2 + s2 * at, icpt + slope * at));
    }
  }
  const double elapsed = seconds_since(start);
  o.check(worst < 1e-9, fmt::format("max relative error {:.3g}", worst));
  o.check(elapsed < 5.0, fmt::format("took {:.2f}s", elapsed));
  if (o.pass) o.detail = fmt::format("500 random windows, max rel err {:.2g}, {:.3f}s", worst, elapsed);
  return o;
}

Outcome naive_oracle() {
  Outcome o;
  AnalysisConfig config;
  config.width = 0;
  NaiveForecaster naive({5, 3, 1});
  const Vector r = timestep_importance(naive, row({1, 2, 3, 4, 5}), Property::mean(), config);
  for (Eigen::Index t = 0; t < 4; ++t) o.check(std::abs(r(t)) <= 1e-12, fmt::format("r at t={} is {}", t + 1, r(t)));
  o.check(std::abs(r(4) - 1.0) <= 1e-12, fmt::format("r at t=b is {}", r(4)));
  NaiveForecaster small({3, 2, 1});
  const double single = change_ratio(small, row({1, 2, 3}), PerturbationSpec::index(3, 0.1, 0), Property::value_at(1));
  o.check(std::abs(single - 1.0) <= 1e-12, "hand trace x=[1,2,3]");
  if (o.pass) o.detail = "importance [0,0,0,0,1] within 1e-12";
  return o;
}

Outcome constancy() {
  Outcome o;
  auto model = fit_linear_ar(testing::synthetic_seasonal(400, 12), 12, 6);
  Gen gen(3);
  const std::vector<double> scales{-0.1, -0.05, -0.01, 0.01, 0.05, 0.1};
  double spread = 0, antisym = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix x = gen.nonzero_matrix(1, 12);
    const PerturbationSpec specs[] = {PerturbationSpec::index(gen.index(1, 12), 0, 2), PerturbationSpec::mean(0),
                                      PerturbationSpec::variance(0), PerturbationSpec::trend(0)};
    for (auto spec : specs) {
      for (const auto& prop : {Property::mean(), Property::value_at(gen.index(1, 6))}) {
        std::vector<double> r;
        for (const double a : scales) {
          spec.alpha = a;
          r.push_back(change_ratio(model, x, spec, prop));
        }
        spread = std::max({spread, std::abs(r[0] - r[1]), std::abs(r[1] - r[2]), std::abs(r[3] - r[4]),
                           std::abs(r[4] - r[5])});
        antisym = std::max({antisym, std::abs(r[0] + r[5]), std::abs(r[1] + r[4]), std::abs(r[2] + r[3])});
      }
    }
  }
  o.check(spread < 1e-9, fmt::format("same-sign spread {:.3g}", spread));
  o.check(antisym < 1e-9, fmt::format("antisymmetry {:.3g}", antisym));
  if (o.pass) o.detail = fmt::format("25 windows, spread {:.2g}, antisymmetry {:.2g}", spread, antisym);
  return o;
}

Outcome call_counts() {
  Outcome o;
  const AnalysisConfig config;  // |A| = 6
  NaiveForecaster a({8, 4, 1});
  mean_change_ratio(a, row({1, 3, 2, 5, 4, 6, 2, 7}), PerturbationSpec::variance(0), Property::mean(), config);
  o.check(a.call_count() == 7, fmt::format("mean_change_ratio used {} calls", a.call_count()));

  NaiveForecaster b({8, 4, 1});
  timestep_importance(b, Matrix::Constant(1, 8, 2.0), Property::mean(), config);
  o.check(b.call_count() == 8 * 6 + 1, fmt::format("importance used {} calls", b.call_count()));

  NaiveForecaster c({4, 2, 2});
  AnalysisConfig two;
  two.scales = {-0.1, 0.1};
  Gen gen;
  const auto windows = as_windows({gen.nonzero_matrix(2, 4), gen.nonzero_matrix(2, 4), gen.nonzero_matrix(2, 4)});
  cross_channel(c, windows, two);
  o.check(c.call_count() == 3 * 17, fmt::format("cross-channel used {} calls for 3 windows", c.call_count()));
  if (o.pass) o.detail = "7, 49, 17 per window";
  return o;
}

Outcome dependency_oracles() {
  Outcome o;
  AnalysisConfig config;
  config.width = 0;
  const auto windows = as_windows({row({1, 2, 3, 4})});
  SeasonalNaiveForecaster seasonal({4, 2, 1}, 2);
  const auto s = dependency_matrix(seasonal, windows, config);
  for (Eigen::Index t = 0; t < 4; ++t) {
    for (Eigen::Index n = 0; n < 2; ++n) {
      const bool on = (t == 2 && n == 0) || (t == 3 && n == 1);
      o.check(on ? std::abs(s.values(t, n) - 1) <= 1e-12 : s.values(t, n) == 0.0,
              fmt::format("seasonal cell ({},{})", t + 1, n + 1));
    }
  }
  NaiveForecaster naive({4, 2, 1});
  const auto nv = dependency_matrix(naive, windows, config);
  o.check(nv.values.topRows(3).isZero(0.0) && (nv.values.row(3).array() != 0).all(), "naive support is row b");

  const auto seasonal_label = classify(s, 2, config.width);
  const auto naive_label = classify(nv, 2, config.width);
  o.check(naive_label.cls == PatternClass::LastTimestep,
          fmt::format("naive labelled {}", to_string(naive_label.cls)));
  o.check(seasonal_label.cls == PatternClass::Diagonals,
          fmt::format("seasonal naive labelled {} (end_diagonal_mass/diagonal_mass = {})",
                      to_string(seasonal_label.cls),
                      seasonal_label.features.end_diagonal_mass / seasonal_label.features.diagonal_mass));
  if (o.pass) o.detail = "support and labels as expected";
  return o;
}

Outcome separability() {
  Outcome o;
  AnalysisConfig config;
  config.width = 0;
  Gen gen;
  std::vector<Matrix> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(gen.matrix(2, 4, 0.5, 3.0));
  const auto windows = as_windows(xs);
  NaiveForecaster naive({4, 3, 2});
  const auto m = cross_channel(naive, windows, config);
  o.check(std::abs(m.values(0, 1)) <= 1e-12 && std::abs(m.values(1, 0)) <= 1e-12, "off-diagonals not zero");
  o.check(m.values(0, 0) == 0.25 && m.values(1, 1) == 0.25,
          fmt::format("diagonals {} {} (want 1/b = 0.25)", m.values(0, 0), m.values(1, 1)));

  FunctionForecaster coupled("coupled", {4, 3, 2}, [](const Matrix& x) {
    return Matrix(Matrix::Constant(2, 3, x(0, 3)));
  });
  const auto c = cross_channel(coupled, windows, config);
  o.check(c.values(0, 1) > 0 && c.values(1, 0) == 0 && c.values(1, 1) == 0, "coupled toy edges");
  if (o.pass) o.detail = "off-diagonal 0, diagonal 0.25, coupled toy has only edge 0->1";
  return o;
}

Outcome metrics() {
  Outcome o;
  Gen gen;
  const Series train(gen.matrix(1, 100));
  std::vector<Matrix> truth, naive;
  for (int i = 0; i < 10; ++i) {
    truth.push_back(gen.matrix(1, 5));
    naive.push_back(gen.matrix(1, 5));
  }
  auto report = evaluate("naive", truth, naive, train);
  attach_reference(report, report);
  o.check(report.owa == 1.0, "owa(naive, naive) != 1");
  o.check(report.e_norm == 1.0, "e_norm(naive, naive) != 1");
  o.check(std::abs(smape(row({100}), row({110})) - 200.0 * 10 / 210) < 1e-9, "sMAPE hand example");
  o.check(std::abs(*mase(row({1, 2}), row({1.5, 1.5}), Series(row({1, 2, 3}))) - 0.5) < 1e-9, "MASE hand example");
  for (int i = 0; i < 200; ++i) {
    const Matrix y = gen.matrix(2, 10, -10, 10), yhat = gen.matrix(2, 10, -10, 10);
    const double a = mae(y, yhat);
    if (a * a > mse(y, yhat) * (1 + 1e-12)) o.check(false, "MAE^2 > MSE");
  }
  if (o.pass) o.detail = "OWA 1, e_norm 1, hand examples, 200 Jensen checks";
  return o;
}

Outcome bridge() {
  Outcome o;
  const auto script = std::string(PAXTS_FIXTURES) + "/echo_forecaster.py";
  const auto cmd = [&](const char* mode) { return std::vector<std::string>{PAXTS_PYTHON, script, "--mode", mode}; };
  {
    ExternalForecaster echo(cmd("echo"), {3, 2, 1});
    o.check(echo.predict(row({1, 2, 3})) == row({3, 3}), "echo round trip");
  }
  ExternalForecaster bridged(cmd("echo"), {16, 4, 2});
  NaiveForecaster builtin({16, 4, 2});
  Gen gen;
  std::vector<Matrix> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(gen.matrix(2, 16, -100, 100));
  const auto a = bridged.predict_batch(xs);
  const auto b = builtin.predict_batch(xs);
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) equal += a[i] == b[i];
  o.check(equal == 50, fmt::format("{} of 50 windows bit-identical", equal));

  const auto expect_error = [&](const char* mode, const std::string& needle) {
    try {
      ExternalForecaster bad(cmd(mode), {3, 2, 1}, std::chrono::milliseconds(2000));
      const Matrix batch[] = {row({1, 2, 3}), row({4, 5, 6})};
      bad.predict_batch(batch);
      o.check(false, fmt::format("{} accepted", mode));
    } catch (const ProtocolError& e) {
      o.check(std::string(e.what()).find(needle) != std::string::npos, fmt::format("{}: '{}'", mode, e.what()));
    }
  };
  expect_error("wrong-batch", "batch size mismatch, expected 2, got 1");
  expect_error("bad-id", "id mismatch");
  expect_error("malformed", "malformed line");
  expect_error("exit-mid", "model crashed: out of memory");
  if (o.pass) o.detail = "handshake/predict/bye, 50 windows bit-exact, 4 failure modes reported";
  return o;
}

std::string write_synthetic(const std::filesystem::path& dir) {
  const auto s = testing::synthetic_seasonal(600, 12);
  const auto file = dir / "synthetic.csv";
  std::ofstream out(file);
  out << "value\n";
  for (Eigen::Index i = 0; i < s.values().cols(); ++i) out << fmt::format("{:.17g}\n", s.values()(0, i));
  return file.string();
}

std::pair<int, std::string> cli(std::vector<std::string> args) {
  args.insert(args.begin(), "paxts");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, code == 0 ? out.str() : err.str()};
}

Outcome determinism(const std::string& data) {
  Outcome o;
  const std::vector<std::string> base{"explain-matrix", "--data", data, "--model", "builtin:linear"};
  auto four = base;
  four.insert(four.end(), {"--jobs", "4"});
  const auto a = cli(base), b = cli(base), c = cli(four);
  o.check(a.first == 0, a.second);
  o.check(a.second == b.second, "two runs differ");
  o.check(a.second == c.second, "--jobs 4 differs from --jobs 1");
  if (o.pass) o.detail = fmt::format("{} bytes identical across 3 runs", a.second.size());
  return o;
}

Outcome desk_benchmark(const std::string& data) {
  Outcome o;
  const auto start = Clock::now();
  const auto [code, text] = cli({"bench", "--data", data, "--model", "builtin:naive", "--model",
                                 "builtin:seasonal-naive:12", "--model", "builtin:linear", "--seasonality", "12"});
  const double elapsed = seconds_since(start);
  o.check(code == 0, text);
  if (code != 0) return o;
  const auto j = nlohmann::json::parse(text);
  const auto& models = j["models"];
  const auto owa = models[2]["owa"].is_null() ? -1.0 : models[2]["owa"].get<double>();
  const auto label = models[1]["pattern"]["label"].get<std::string>();
  o.check(owa >= 0 && owa < 1, fmt::format("linear OWA {}", owa));
  o.check(label == "diagonals",
          fmt::format("seasonal naive labelled {} (end_diagonal_mass {:.3f} of diagonal_mass {:.3f})", label,
                      models[1]["pattern"]["features"]["end_diagonal_mass"].get<double>(),
                      models[1]["pattern"]["features"]["diagonal_mass"].get<double>()));
  o.check(elapsed < 60, fmt::format("took {:.1f}s", elapsed));
  if (o.pass) o.detail = fmt::format("linear OWA {:.3f}, seasonal naive diagonals, {:.2f}s", owa, elapsed);
  else o.detail += fmt::format("; linear OWA {:.3f}, {:.2f}s", owa, elapsed);
  return o;
}

}  // namespace

int main() {
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("paxts_acceptance_{}", ::getpid());
  std::filesystem::create_directories(dir);
  const auto data = write_synthetic(dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"perturbation algebra", perturbation_algebra},
      {"step explainer naive oracle", naive_oracle},
      {"ratio constancy for affine model", constancy},
      {"call-count contract", call_counts},
      {"dependency-matrix oracles and labels", dependency_oracles},
      {"cross-channel separability", separability},
      {"metrics", metrics},
      {"bridge protocol", bridge},
      {"determinism", [&] { return determinism(data); }},
      {"desk benchmark", [&] { return desk_benchmark(data); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("exception: {}", e.what())};
    }
    failures += !outcome.pass;
    std::cout << fmt::format("{} criterion {:>2}: {} ({})\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                             criteria[i].first, outcome.detail);
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
                           criteria.size());
  std::filesystem::remove_all(dir);
  return failures;
}
