#include "tn/harness.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <json.hpp>
#include <random>
#include <sstream>

#include "tn/errors.hpp"

namespace tn {
namespace {

TEST(NormalCdf, Values) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(normal_cdf(-3.0), 0.0013498980316301, 1e-15);
}

TEST(Wasserstein, PointMass) {
  EXPECT_NEAR(empirical_wasserstein(std::vector<double>(10, 0.0)), std::sqrt(2.0 / kPi), 1e-12);
  // E|Z - m| = m (2 Phi(m) - 1) + 2 phi(m)
  const double m = 1.3;
  const double expect = m * (2.0 * normal_cdf(m) - 1.0) + 2.0 * std::exp(-0.5 * m * m) / std::sqrt(2.0 * kPi);
  EXPECT_NEAR(empirical_wasserstein(std::vector<double>(5, m)), expect, 1e-12);
}

TEST(Wasserstein, MatchesNumericalIntegral) {
  const std::vector<double> xs{-1.7, -0.2, -0.2, 0.4, 2.2, 0.9, 0.05};
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  auto gap = [&](double x) {
    const double F = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) / sorted.size();
    return std::abs(F - normal_cdf(x));
  };
  using boost::math::quadrature::gauss_kronrod;
  // integrate piecewise so that every jump of F_n is a breakpoint
  std::vector<double> cuts{-12.0};
  cuts.insert(cuts.end(), sorted.begin(), sorted.end());
  cuts.push_back(12.0);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += gauss_kronrod<double, 61>::integrate(gap, cuts[i], cuts[i + 1], 10, 1e-13);
  EXPECT_NEAR(empirical_wasserstein(xs), total, 1e-8);
}

TEST(Wasserstein, LargeSamples) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> g(100000), shifted(100000);
  for (auto& v : g) v = z(rng);
  for (auto& v : shifted) v = 0.5 + z(rng);
  EXPECT_LT(empirical_wasserstein(g), 0.01);
  EXPECT_NEAR(empirical_wasserstein(shifted), 0.5, 0.02);
}

TEST(Wasserstein, PermutationInvarianceAndMonotoneAddition) {
  std::vector<double> x{0.3, -1.2, 2.4, 0.0, -0.4, 1.1};
  const double d = empirical_wasserstein(x);
  auto y = x;
  std::reverse(y.begin(), y.end());
  EXPECT_NEAR(empirical_wasserstein(y), d, 1e-15);
  // a point mass far from N(0, 1) grows once more of it is added
  std::vector<double> far{3.0, 3.0, 3.2};
  const double d0 = empirical_wasserstein(far);
  far.push_back(3.0 + 0.2 / 3.0);
  EXPECT_GE(empirical_wasserstein(far), d0 - 1e-12);
  EXPECT_THROW(empirical_wasserstein(std::vector<double>{1.0}), TooFewSamples);
}

TEST(Ks, Values) {
  EXPECT_DOUBLE_EQ(ks_distance(std::vector<double>{0.0, 0.0}), 0.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> g(20000);
  for (auto& v : g) v = z(rng);
  EXPECT_LT(ks_distance(g), 1.63 / std::sqrt(20000.0));
  EXPECT_THROW(ks_distance(std::vector<double>{}), TooFewSamples);
}

TEST(Config, ParsesKeyValueText) {
  ExperimentConfig cfg;
  std::istringstream in(
      "# desk-scale sweep\n"
      "q = 1\n"
      "B=2\n"
      "j = 2, 3,4\n"
      "R = 500,2000\n"
      "alpha = 0.75   # rough density\n"
      "condition = cond2\n"
      "c = 0.01\n"
      "replicas = 300\n"
      "seed = 99\n"
      "workers = 3\n"
      "alt_alpha = 1.5\n");
  apply_config_text(cfg, in);
  EXPECT_EQ(cfg.levels, (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(cfg.intensities, (std::vector<double>{500, 2000}));
  EXPECT_EQ(cfg.alpha, 0.75);
  EXPECT_EQ(cfg.condition, Condition::Cond2);
  EXPECT_EQ(*cfg.c, 0.01);
  EXPECT_EQ(cfg.replicas, 300);
  EXPECT_EQ(cfg.base_seed, 99u);
  EXPECT_EQ(cfg.workers, 3);
  ASSERT_TRUE(cfg.alternative);
  EXPECT_EQ(cfg.alternative->alpha, 1.5);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, Errors) {
  ExperimentConfig cfg;
  EXPECT_THROW(apply_config_value(cfg, "nonsense", "1"), ParseError);
  EXPECT_THROW(apply_config_value(cfg, "q", "one"), ParseError);
  EXPECT_THROW(apply_config_value(cfg, "replicas", "2.5"), ParseError);
  std::istringstream bad("q 1\n");
  EXPECT_THROW(apply_config_text(cfg, bad), ParseError);
  cfg.replicas = 50;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg.replicas = 200;
  cfg.alpha = 0.3;
  EXPECT_THROW(validate(cfg), InvalidAlpha);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.levels = {2};
  cfg.intensities = {100.0, 200.0};
  cfg.replicas = 200;
  cfg.base_seed = 5;
  cfg.alternative = AlternativeDensity{};
  return cfg;
}

TEST(Experiment, DeterministicAcrossRunsAndWorkers) {
  auto cfg = small_config();
  const auto a = run_experiment(cfg);
  cfg.workers = 3;
  const auto b = run_experiment(cfg);
  ASSERT_EQ(a.rows.size(), 2u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].statistics, b.rows[i].statistics);
  std::ostringstream ca, cb, ja, jb;
  write_csv(ca, a);
  write_csv(cb, b);
  write_json(ja, a);
  write_json(jb, b);
  EXPECT_EQ(ca.str(), cb.str());
  // the worker count is not part of the report
  EXPECT_EQ(ja.str(), jb.str());
}

TEST(Experiment, RowInvariantsAndCsvRoundTrip) {
  const auto rep = run_experiment(small_config());
  for (const auto& r : rep.rows) {
    EXPECT_GE(r.wasserstein, 0.0);
    EXPECT_GE(r.ks, 0.0);
    EXPECT_GE(r.rejection_rate, 0.0);
    EXPECT_LE(r.rejection_rate, 1.0);
    EXPECT_GE(r.power, 0.0);
    EXPECT_LE(r.power, 1.0);
    EXPECT_EQ(r.statistics.size(), 200u);
    EXPECT_GT(r.bound.total(), 0.0);
  }
  std::stringstream ss;
  write_csv(ss, rep, true);
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), rep.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].j, rep.rows[i].j);
    EXPECT_EQ(back[i].intensity, rep.rows[i].intensity);
    EXPECT_EQ(back[i].wasserstein, rep.rows[i].wasserstein);
    EXPECT_EQ(back[i].bound.star21, rep.rows[i].bound.star21);
    EXPECT_EQ(back[i].power, rep.rows[i].power);
    EXPECT_EQ(back[i].runtime_seconds, rep.rows[i].runtime_seconds);
  }
  std::stringstream js;
  write_json(js, rep);
  const auto doc = nlohmann::json::parse(js.str());
  EXPECT_EQ(doc["rows"].size(), 2u);
  EXPECT_FALSE(doc["rows"][0].contains("runtime_seconds"));
}

TEST(Slope, RecoversLine) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(std::exp(0.7 - 0.35 * v));
  const auto fit = log_slope(x, y);
  EXPECT_NEAR(fit.slope, -0.35, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.7, 1e-12);
  EXPECT_LE(fit.ci_low, fit.slope);
  EXPECT_GE(fit.ci_high, fit.slope);
  EXPECT_THROW(log_slope(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InsufficientPoints);
}

TEST(Slope, NoisyLineInterval) {
  const std::vector<double> x{0, 1, 2, 3, 4, 5};
  const std::vector<double> e{0.01, -0.02, 0.015, 0.0, -0.01, 0.02};
  std::vector<double> y;
  for (std::size_t i = 0; i < x.size(); ++i) y.push_back(std::exp(2.0 * x[i] + e[i]));
  const auto fit = log_slope(x, y);
  EXPECT_GT(fit.std_error, 0.0);
  EXPECT_LT(fit.ci_low, 2.0);
  EXPECT_GT(fit.ci_high, 2.0);
}

TEST(RateRegression, AlongIntensity) {
  std::vector<ExperimentRow> rows(3);
  const double rs[] = {500, 2000, 8000};
  for (int i = 0; i < 3; ++i) {
    rows[i].intensity = rs[i];
    rows[i].bound = {0.0, 3.0 / std::sqrt(rs[i]), 0.0};
  }
  EXPECT_NEAR(rate_regression(rows, SweepAxis::LogIntensity, RateQuantity::Bound).slope, -0.5, 1e-12);
  EXPECT_EQ(to_string(RateQuantity::BoundStar21), "bound_star21");
}

TEST(HypothesisTest, ZeroStatisticRetains) {
  auto window = std::make_shared<const WindowFunction>(2.0, kDefaultWindowResolution);
  const auto frame = build_frame(1, 2.0, 2, window);
  const auto f0 = uniform_density(1, 16);
  const PointSample s1(1, 1, 10.0, {}, {}), s2(2, 1, 10.0, {}, {});
  const auto d = hypothesis_test(s1, s2, frame, f0, 10.0, 0.05);
  EXPECT_EQ(d.statistic, 0.0);
  EXPECT_EQ(d.p_value, 1.0);
  EXPECT_FALSE(d.reject);
  EXPECT_THROW(hypothesis_test(s1, s2, frame, f0, 10.0, 1.0), InvalidArgument);
}

TEST(HypothesisTest, PValueMatchesStatistic) {
  auto window = std::make_shared<const WindowFunction>(2.0, kDefaultWindowResolution);
  const auto frame = build_frame(1, 2.0, 2, window);
  const auto f0 = uniform_density(1, 16);
  const auto [s1, s2] = sample_pair(f0, f0, 100.0, {2, 2, 0});
  const auto d = hypothesis_test(s1, s2, frame, f0, 100.0, 0.05);
  EXPECT_NEAR(d.p_value, 2.0 * (1.0 - normal_cdf(std::abs(d.statistic))), 1e-12);
  EXPECT_EQ(d.reject, std::abs(d.statistic) > 1.959963984540054);
}

}  // namespace
}  // namespace tn
