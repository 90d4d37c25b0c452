#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qrc/tasks.hpp"

namespace {

using qrc::TimeSeries;

TimeSeries from_function(const std::vector<double>& t, double (*f)(double)) {
  TimeSeries s;
  s.times = t;
  for (double x : t) s.values.push_back(f(x));
  return s;
}

template <typename Fn>
void expect_category(Fn&& fn, qrc::ErrorCategory c) {
  try {
    fn();
    FAIL() << "expected " << qrc::to_string(c);
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), c) << e.what();
  }
}

TEST(Cosine, Examples) {
  const auto s = qrc::gen_cosine(1.0, 2.0, 9, 0.25);
  EXPECT_EQ(s.values[0], 1.0);
  EXPECT_NEAR(s.values[4], -1.0, 1e-15);
  EXPECT_NEAR(s.values[2], 0.0, 1e-12);
  EXPECT_EQ(s.times[8], 2.0);
}

TEST(MackeyGlass, FixedPoint) {
  qrc::MackeyGlassParams p;
  p.history_value = 1.0;
  p.n_steps = 3000;
  p.discard = 0;
  for (double v : qrc::gen_mackey_glass(p).values) EXPECT_EQ(v, 1.0);
}

TEST(MackeyGlass, ExponentialDecay) {
  qrc::MackeyGlassParams p;
  p.tau = 0.0;
  p.beta = 0.0;
  p.history_value = 1.0;
  p.dt = 0.1;
  p.n_steps = 11;
  p.discard = 0;
  const auto s = qrc::gen_mackey_glass(p);
  EXPECT_NEAR(s.times.back(), 1.0, 1e-12);
  EXPECT_NEAR(s.values.back(), std::exp(-0.1), 1e-8);
}

double mg_endpoint(double dt) {
  qrc::MackeyGlassParams p;
  p.tau = 0.0;
  p.history_value = 1.2;
  p.dt = dt;
  p.n_steps = static_cast<std::size_t>(std::lround(20.0 / dt)) + 1;
  p.discard = 0;
  return qrc::gen_mackey_glass(p).values.back();
}

TEST(MackeyGlass, FourthOrderConvergence) {
  const double dt = 1.0;
  const double reference = mg_endpoint(dt / 8.0);
  const double ratio = std::abs(mg_endpoint(dt) - reference) / std::abs(mg_endpoint(dt / 2.0) - reference);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(MackeyGlass, BoundedChaoticSeries) {
  qrc::MackeyGlassParams p;
  p.n_steps = 12000;
  const auto s = qrc::gen_mackey_glass(p);
  ASSERT_EQ(s.size(), 10000u);
  const auto [mn, mx] = std::minmax_element(s.values.begin(), s.values.end());
  EXPECT_GT(*mn, 0.0);
  EXPECT_LT(*mx, 2.0);
  EXPECT_GT(*mx - *mn, 0.1);
  EXPECT_NEAR(s.times.front(), 200.0, 1e-9);
}

TEST(MackeyGlass, NonIntegralDelayUsesInterpolation) {
  qrc::MackeyGlassParams p;
  p.tau = 17.05;
  p.n_steps = 4000;
  const auto a = qrc::gen_mackey_glass(p);
  p.tau = 17.0;
  const auto b = qrc::gen_mackey_glass(p);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
  EXPECT_GT(diff, 0.0);
  for (double v : a.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Subsample, Examples) {
  const auto s = qrc::gen_cosine(1.0, 7.0, 100, 0.1);
  const auto same = qrc::subsample(s, 1);
  EXPECT_EQ(same.values, s.values);
  const auto five = qrc::subsample(s, 20);
  ASSERT_EQ(five.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(five.times[i], s.times[20 * i]);
    EXPECT_EQ(five.values[i], s.values[20 * i]);
  }
  EXPECT_THROW((void)qrc::subsample(s, 0), qrc::Error);
}

TEST(PriceCsv, TwoRowsRescaleToUnitInterval) {
  std::istringstream in("date,close\n2020-01-02,100\n2020-01-03,110\n");
  const auto d = qrc::parse_price_csv(in);
  EXPECT_EQ(d.series.values, (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(d.series.times, (std::vector<double>{0.0, 1.0}));
  EXPECT_FALSE(d.warning.has_value());
}

TEST(PriceCsv, ExtraColumnsAndRoundTrip) {
  std::istringstream in("Date,Open,Close,Volume\n2020-01-02,1,101.25,5\n2020-01-03,1,99.5,5\n2020-01-06,1,123.75,5\n");
  const auto d = qrc::parse_price_csv(in);
  ASSERT_EQ(d.closes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d.scale.inverse(d.series.values[i]), d.closes[i], 1e-9);
}

TEST(PriceCsv, ConstantSeriesWarns) {
  std::istringstream in("date,close\n2020-01-02,50\n2020-01-03,50\n2020-01-04,50\n");
  const auto d = qrc::parse_price_csv(in);
  for (double v : d.series.values) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(d.warning.has_value());
}

TEST(PriceCsv, Errors) {
  expect_category([] {
    std::istringstream in("day,price\n2020-01-02,1\n");
    (void)qrc::parse_price_csv(in);
  }, qrc::ErrorCategory::data_format);
  try {
    std::istringstream in("date,close\n2020-01-02,1\n2020-01-03,abc\n");
    (void)qrc::parse_price_csv(in);
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::data_format);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
  expect_category([] {
    std::istringstream in("date,close\n2020-13-02,1\n");
    (void)qrc::parse_price_csv(in);
  }, qrc::ErrorCategory::data_format);
  expect_category([] {
    std::istringstream in("date,close\n2020-01-02,0\n");
    (void)qrc::parse_price_csv(in);
  }, qrc::ErrorCategory::data);
  expect_category([] { (void)qrc::load_price_csv("/nonexistent/prices.csv"); }, qrc::ErrorCategory::io);
}

TEST(RandomWalk, Examples) {
  const auto a = qrc::gen_random_walk(200, 1.0, 3);
  EXPECT_EQ(a.values, qrc::gen_random_walk(200, 1.0, 3).values);
  const auto [mn, mx] = std::minmax_element(a.values.begin(), a.values.end());
  EXPECT_EQ(*mn, -1.0);
  EXPECT_EQ(*mx, 1.0);
  for (double v : a.values) EXPECT_TRUE(std::isfinite(v));
  const auto two = qrc::gen_random_walk(2, 1.0, 3);
  EXPECT_EQ(std::abs(two.values[0]), 1.0);
  EXPECT_EQ(two.values[0], -two.values[1]);
}

TEST(Split, Contiguous) {
  const auto s = qrc::split(10, {qrc::SplitKind::contiguous, 0.7, 0});
  EXPECT_EQ(s.train, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(s.test, (std::vector<std::size_t>{7, 8, 9}));
}

TEST(Split, ShuffledIsDeterministicPartition) {
  for (std::size_t n : {2u, 3u, 17u, 100u}) {
    for (double f : {0.1, 0.5, 0.9}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const qrc::SplitPlan plan{qrc::SplitKind::shuffled, f, seed};
        const auto cut = static_cast<std::size_t>(std::floor(f * static_cast<double>(n)));
        if (cut == 0 || cut == n) {
          EXPECT_THROW((void)qrc::split(n, plan), qrc::Error);
          continue;
        }
        const auto a = qrc::split(n, plan);
        const auto b = qrc::split(n, plan);
        EXPECT_EQ(a.train, b.train);
        std::set<std::size_t> all(a.train.begin(), a.train.end());
        all.insert(a.test.begin(), a.test.end());
        EXPECT_EQ(all.size(), n);
        EXPECT_EQ(a.train.size() + a.test.size(), n);
        EXPECT_EQ(*all.rbegin(), n - 1);
      }
    }
  }
}

TEST(Spline, LinearDataIsExact) {
  const auto train = from_function({0.0, 1.0, 2.5, 3.0}, [](double x) { return 3.0 * x - 1.0; });
  const std::vector<double> q{0.5, 1.75, 2.75};
  const auto natural = qrc::cubic_spline_interpolate(train, q);
  const auto hermite = qrc::cubic_hermite_interpolate(train, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_NEAR(natural[i], 3.0 * q[i] - 1.0, 1e-12);
    EXPECT_NEAR(hermite[i], 3.0 * q[i] - 1.0, 1e-12);
  }
}

TEST(Spline, KnotQueriesReturnTrainingValues) {
  const auto train = qrc::gen_random_walk(30, 1.0, 9);
  for (auto method : {qrc::cubic_spline_interpolate, qrc::cubic_hermite_interpolate}) {
    const auto out = method(train, train.times);
    EXPECT_EQ(out, train.values);
  }
}

TEST(Spline, NaturalCubicMatchesHandSolvedSystem) {
  // y = x^3 on knots 0..4. With M0 = M4 = 0 the system
  //   4 M1 + M2 = 36,  M1 + 4 M2 + M3 = 72,  M2 + 4 M3 = 108
  // gives M1 = 45/7, M2 = 72/7, M3 = 171/7, so S(1.5) = 387/112, S(2.5) = 1717/112.
  const auto train = from_function({0, 1, 2, 3, 4}, [](double x) { return x * x * x; });
  const auto out = qrc::cubic_spline_interpolate(train, {1.5, 2.5});
  EXPECT_NEAR(out[0], 387.0 / 112.0, 1e-12);
  EXPECT_NEAR(out[1], 1717.0 / 112.0, 1e-12);
}

TEST(Spline, HermiteIsMonotoneOnMonotoneData) {
  const auto train = from_function({0, 1, 2, 3, 4, 5, 6}, [](double x) { return std::floor(x / 2.0) + 0.01 * x; });
  std::vector<double> q;
  for (int i = 0; i <= 6000; ++i) q.push_back(i * 0.001);
  const auto out = qrc::cubic_hermite_interpolate(train, q);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i], out[i - 1] - 1e-15) << q[i];
}

TEST(Spline, SmoothnessAcrossKnots) {
  const auto train = from_function({0, 0.7, 1.5, 2.0, 3.1, 4.0}, [](double x) { return std::sin(x); });
  const double eps = 1e-7;
  for (std::size_t k = 1; k + 1 < train.size(); ++k) {
    const double t = train.times[k];
    for (auto method : {qrc::cubic_spline_interpolate, qrc::cubic_hermite_interpolate}) {
      const auto v = method(train, {t - 2 * eps, t - eps, t, t + eps, t + 2 * eps});
      const double left = (v[2] - v[1]) / eps;
      const double right = (v[3] - v[2]) / eps;
      EXPECT_LT(std::abs(left - right), 1e-6 + 4 * eps) << "knot " << t;
    }
    const auto v = qrc::cubic_spline_interpolate(train, {t - 2e-4, t - 1e-4, t, t + 1e-4, t + 2e-4});
    const double left2 = (v[2] - 2 * v[1] + v[0]) / 1e-8;
    const double right2 = (v[4] - 2 * v[3] + v[2]) / 1e-8;
    EXPECT_LT(std::abs(left2 - right2), 1e-3) << "knot " << t;
  }
}

TEST(Spline, Errors) {
  const auto train = from_function({0, 1, 2}, [](double x) { return x; });
  expect_category([&] { (void)qrc::cubic_spline_interpolate(train, {2.5}); }, qrc::ErrorCategory::range);
  expect_category([&] { (void)qrc::cubic_hermite_interpolate(train, {-0.1}); }, qrc::ErrorCategory::range);
  const auto small = from_function({0, 1}, [](double x) { return x; });
  expect_category([&] { (void)qrc::cubic_spline_interpolate(small, {0.5}); }, qrc::ErrorCategory::argument);
}

TEST(TimeSeries, CsvAndValidation) {
  const auto s = qrc::gen_cosine(2.0, 4.0, 3, 1.0);
  std::ostringstream os;
  s.write_csv(os);
  EXPECT_EQ(os.str().rfind("t,value\n0,2\n", 0), 0u);
  TimeSeries bad{{0.0, 0.0}, {1.0, 2.0}};
  EXPECT_THROW(bad.validate(), qrc::Error);
}

}  // namespace
