#include "paxts/error.hpp"
#include "paxts/poi.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <vector>

namespace paxts {
namespace {

double on(const Property& p, std::vector<double> seq) { return eval_property(p, std::span<const double>(seq)); }

TEST(EvalProperty, Examples) {
  EXPECT_EQ(on(Property::max(), {1, 5, 2}), 5.0);
  EXPECT_EQ(on(Property::min(), {1, 5, 2}), 1.0);
  EXPECT_EQ(on(Property::value_at(2), {7, 8, 9}), 8.0);
  EXPECT_NEAR(on(Property::trend(), {0, 2, 4}), 2.0, 1e-12);
  EXPECT_NEAR(on(Property::mean(), {1, 2, 6}), 3.0, 1e-15);
  EXPECT_NEAR(on(Property::variance(), {0, 2}), 1.0, 1e-15);
  EXPECT_EQ(on(Property::variance(), {4}), 0.0);
}

TEST(EvalProperty, Errors) {
  EXPECT_THROW(on(Property::mean(), {}), ArgumentError);
  EXPECT_THROW(on(Property::value_at(4), {1, 2, 3}), ArgumentError);
  EXPECT_THROW(on(Property::value_at(0), {1, 2, 3}), ArgumentError);
  EXPECT_THROW(on(Property::trend(), {1}), ArgumentError);
  EXPECT_THROW(on(Property::trend(3), {1, 2, 3}), ArgumentError);
}

TEST(EvalProperty, MatrixRows) {
  const Matrix m = testing::rows({{1, 2, 3}, {10, 20, 30}});
  EXPECT_EQ(eval_property(Property::max().on_channel(1), m), 30.0);
  EXPECT_EQ(eval_property(Property::value_at(1).on_channel(0), m), 1.0);
  EXPECT_THROW(eval_property(Property::max(), m), ArgumentError);
  EXPECT_THROW(eval_property(Property::max().on_channel(2), m), ArgumentError);
  EXPECT_EQ(eval_property(Property::max(), testing::row({4, 9})), 9.0);
}

TEST(EvalProperty, SeasonalTrendIgnoresFullPeriods) {
  // Period-3 wave on a ramp: the 3-step moving average removes the wave.
  std::vector<double> seq;
  const double wave[] = {1, -2, 1};
  for (int i = 0; i < 12; ++i) seq.push_back(0.5 * i + wave[i % 3]);
  EXPECT_NEAR(on(Property::trend(3), seq), 0.5, 1e-12);
}

TEST(OutputSteps, Enumerates) {
  EXPECT_EQ(output_step_properties(2), (std::vector<Property>{Property::value_at(1), Property::value_at(2)}));
  EXPECT_EQ(output_step_properties(1), std::vector<Property>{Property::value_at(1)});
  EXPECT_THROW(output_step_properties(0), ArgumentError);
}

TEST(ParseProperty, RoundTripsTokens) {
  for (const char* token : {"min", "max", "mean", "var", "trend", "step:3", "max@1", "step:20@0"}) {
    EXPECT_EQ(to_token(parse_property(token)), token);
  }
  EXPECT_EQ(parse_property("variance"), Property::variance());
  EXPECT_EQ(parse_property("mean@2"), Property::mean().on_channel(2));
  EXPECT_EQ(display_label(Property::value_at(3)), "t+3");
  EXPECT_EQ(display_label(Property::variance()), "variance");
}

TEST(ParseProperty, RejectsWithValidList) {
  for (const char* token : {"", "median", "step:", "step:0", "step:x", "max@", "max@-1"}) {
    try {
      parse_property(token);
      ADD_FAILURE() << "accepted '" << token << "'";
    } catch (const ArgumentError& e) {
      EXPECT_NE(std::string(e.what()).find("step:<n>"), std::string::npos) << e.what();
    }
  }
}

}  // namespace
}  // namespace paxts
