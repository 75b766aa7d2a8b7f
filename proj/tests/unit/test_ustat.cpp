#include "tn/ustat.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tn/errors.hpp"

namespace tn {
namespace {

std::shared_ptr<const WindowFunction> window2() {
  static auto w = std::make_shared<const WindowFunction>(2.0, kDefaultWindowResolution);
  return w;
}

HarmonicDensity smooth_density(int q, int L, double alpha = 2.0, Condition cond = Condition::Cond1) {
  return make_density(q, alpha, default_scale(q, alpha, L, cond), L, cond);
}

PointSample empty_sample(int label, int q) { return PointSample(label, q, 1.0, {}, {}); }

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

TEST(ComputeU, EmptySamples) {
  const auto frame = build_frame(1, 2.0, 2, window2());
  EXPECT_EQ(compute_U(frame, empty_sample(1, 1), empty_sample(2, 1)), 0.0);
  EXPECT_EQ(double_integral_oracle(frame, uniform_density(1, 16), 10.0, empty_sample(1, 1), empty_sample(2, 1)), 0.0);
}

TEST(ComputeU, SpectralEqualsNeedletSum) {
  for (auto [q, j, R] : {std::tuple{1, 3, 150.0}, std::tuple{2, 1, 60.0}}) {
    const auto frame = build_frame(q, 2.0, j, window2());
    const auto f = smooth_density(q, 4 * frame.shell_radius());
    for (std::uint64_t r = 0; r < 20; ++r) {
      const auto [s1, s2] = sample_pair(f, f, R, {11, r, 0});
      const double a = compute_U(frame, s1, s2);
      const double b = compute_U_needlet_sum(frame, s1, s2);
      EXPECT_LT(rel(a, b), 1e-8) << a << " vs " << b;
    }
  }
}

TEST(ComputeU, PermutationAndSwapInvariance) {
  const auto frame = build_frame(1, 2.0, 3, window2());
  const auto f = smooth_density(1, 64);
  const auto [s1, s2] = sample_pair(f, f, 300.0, {5, 5, 0});
  const double u = compute_U(frame, s1, s2);
  std::vector<double> c1(s1.coords().begin(), s1.coords().end());
  std::mt19937_64 rng(1);
  std::shuffle(c1.begin(), c1.end(), rng);
  const PointSample p1(1, 1, s1.intensity(), {}, c1);
  EXPECT_LT(rel(compute_U(frame, p1, s2), u), 1e-10);
  const PointSample swapped1(1, 1, 300.0, {}, {s2.coords().begin(), s2.coords().end()});
  const PointSample swapped2(2, 1, 300.0, {}, {s1.coords().begin(), s1.coords().end()});
  EXPECT_LT(rel(compute_U(frame, swapped1, swapped2), u), 1e-10);
}

TEST(ComputeU, InputErrors) {
  const auto frame = build_frame(1, 2.0, 2, window2());
  EXPECT_THROW(compute_U(frame, empty_sample(2, 1), empty_sample(1, 1)), InvalidArgument);
  EXPECT_THROW(compute_U(frame, empty_sample(1, 2), empty_sample(2, 2)), DimensionMismatch);
}

TEST(Kernel, SymmetryAndSign) {
  const auto frame = build_frame(2, 2.0, 1, window2());
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const LabeledPoint a{1 + t % 2, testing::random_point(rng, 2)};
    const LabeledPoint b{1 + (t / 2) % 2, testing::random_point(rng, 2)};
    EXPECT_NEAR(kernel_h(frame, a, b), kernel_h(frame, b, a), 1e-12);
    const LabeledPoint a1{1, a.theta}, b1{1, b.theta}, b2{2, b.theta};
    EXPECT_EQ(kernel_h(frame, a1, b1), -kernel_h(frame, a1, b2));
  }
}

TEST(Kernel, NeedletSumAgrees) {
  for (auto [q, j] : {std::pair{1, 3}, std::pair{2, 2}}) {
    const auto frame = build_frame(q, 2.0, j, window2());
    std::mt19937_64 rng(12);
    for (int t = 0; t < 100; ++t) {
      const LabeledPoint a{1 + t % 2, testing::random_point(rng, q)};
      const LabeledPoint b{1 + (t / 3) % 2, testing::random_point(rng, q)};
      EXPECT_NEAR(kernel_h(frame, a, b), kernel_h_needlet_sum(frame, a, b), 1e-10);
    }
  }
}

TEST(Kernel, MatchesScalarCosineSum) {
  const auto frame = build_frame(1, 2.0, 2, window2());
  const LabeledPoint a{1, {0.4}}, b{2, {2.5}};
  double s = 0.0;
  for (int n = 2; n <= 8; ++n) s += 2.0 * window2()->squared(n / 4.0) * std::cos(n * (0.4 - 2.5));
  EXPECT_NEAR(kernel_h(frame, a, b), -s / kTwoPi, 1e-14);
}

TEST(Oracle, EqualsComputeUUnderNull) {
  const auto frame = build_frame(1, 2.0, 3, window2());
  const auto f = smooth_density(1, 64, 0.75);
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto [s1, s2] = sample_pair(f, f, 500.0, {3, r, 0});
    EXPECT_LT(rel(double_integral_oracle(frame, f, 500.0, s1, s2), compute_U(frame, s1, s2)), 1e-8);
  }
}

TEST(Oracle, UniformDensityHasNoCompensatorTerms) {
  const auto frame = build_frame(1, 2.0, 2, window2());
  const auto f = uniform_density(1, 32);
  const auto [s1, s2] = sample_pair(f, f, 80.0, {4, 0, 0});
  double pairs = 0.0;
  std::vector<LabeledPoint> pts;
  for (std::size_t i = 0; i < s1.size(); ++i) pts.push_back({1, {s1.point(i)[0]}});
  for (std::size_t i = 0; i < s2.size(); ++i) pts.push_back({2, {s2.point(i)[0]}});
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b)
      if (a != b) pairs += kernel_h(frame, pts[a], pts[b]);
  EXPECT_LT(rel(double_integral_oracle(frame, f, 80.0, s1, s2), pairs), 1e-10);
}

TEST(Oracle, MeanUnderAlternativeIsDoubleCompensator) {
  // E U = R^2 sum_n w_n |a1_n - a2_n|^2 when f1 != f2, while the compensated
  // oracle stays centered.
  const auto frame = build_frame(1, 2.0, 2, window2());
  const int L = 32;
  const auto f1 = smooth_density(1, L);
  const auto f2 = make_density(1, 0.75, 0.1, L, Condition::Cond1);
  const double R = 100.0;
  double expect = 0.0;
  for (std::size_t i = 0; i < frame.shell_size(); ++i)
    expect += frame.spectral_weights()[i] * std::norm(f1.coeff(frame.shell()[i]) - f2.coeff(frame.shell()[i]));
  expect *= R * R;
  const int reps = 4000;
  const int oracle_reps = 600;  // the oracle is quadratic in the point count
  double su = 0, su2 = 0, so = 0, so2 = 0;
  for (int r = 0; r < reps; ++r) {
    const auto [s1, s2] = sample_pair(f1, f2, R, {17, static_cast<std::uint64_t>(r), 0});
    const double u = compute_U(frame, s1, s2);
    su += u;
    su2 += u * u;
    if (r < oracle_reps) {
      const double o = double_integral_oracle(frame, f1, f2, R, s1, s2);
      so += o;
      so2 += o * o;
    }
  }
  const double mu = su / reps, mo = so / oracle_reps;
  EXPECT_LT(std::abs(mu - expect), 3.0 * std::sqrt((su2 / reps - mu * mu) / reps));
  EXPECT_LT(std::abs(mo), 3.0 * std::sqrt((so2 / oracle_reps - mo * mo) / oracle_reps));
}

TEST(Variance, UniformSpecialization) {
  for (auto [q, j] : {std::pair{1, 3}, std::pair{2, 2}}) {
    const auto frame = build_frame(q, 2.0, j, window2());
    const auto f = uniform_density(q, 2 * frame.shell_radius());
    double s = 0.0;
    for (double w : frame.spectral_weights()) s += w * w;
    const double R = 37.0;
    const double expect = 8.0 * R * R * std::pow(kTwoPi, -2 * q) * s;
    EXPECT_LT(rel(analytic_variance(frame, f, R, SumPath::Direct), expect), 1e-12);
    EXPECT_LT(rel(analytic_variance(frame, f, R, SumPath::Convolution), expect), 1e-12);
  }
}

TEST(Variance, ConvolutionMatchesDirect) {
  for (int q : {1, 2})
    for (int j = 1; j <= 3; ++j) {
      const auto frame = build_frame(q, 2.0, j, window2());
      const auto f = smooth_density(q, 2 * frame.shell_radius(), 0.75, q == 1 ? Condition::Cond1 : Condition::Cond2);
      const double a = analytic_variance(frame, f, 200.0, SumPath::Direct);
      const double b = analytic_variance(frame, f, 200.0, SumPath::Convolution);
      EXPECT_LT(rel(a, b), 1e-12) << "q=" << q << " j=" << j;
    }
}

TEST(Variance, InsufficientBandlimit) {
  const auto frame = build_frame(1, 2.0, 3, window2());
  EXPECT_THROW(analytic_variance(frame, smooth_density(1, 20), 1.0), InsufficientBandlimit);
}

TEST(Variance, GrowsAtLeastLikeBToTheJ) {
  const auto f = smooth_density(1, 2 * 128);
  std::vector<double> x, y;
  for (int j = 2; j <= 6; ++j) {
    const auto frame = build_frame(1, 2.0, j, window2());
    x.push_back(j);
    y.push_back(std::log(analytic_variance(frame, f, 1000.0)));
  }
  const double mx = (2 + 3 + 4 + 5 + 6) / 5.0;
  double my = 0, sxy = 0, sxx = 0;
  for (double v : y) my += v / 5.0;
  for (int i = 0; i < 5; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  EXPECT_GE(sxy / sxx, 0.85 * std::log(2.0));
}

TEST(Variance, MonteCarloMeanIsZero) {
  const auto frame = build_frame(1, 2.0, 3, window2());
  const auto f = smooth_density(1, 64);
  const int reps = 3000;
  double s = 0, s2 = 0;
  for (int r = 0; r < reps; ++r) {
    const auto [a, b] = sample_pair(f, f, 200.0, {606, static_cast<std::uint64_t>(r), 0});
    const double u = compute_U(frame, a, b);
    s += u;
    s2 += u * u;
  }
  const double m = s / reps;
  EXPECT_LT(std::abs(m), 3.0 * std::sqrt((s2 / reps - m * m) / reps));
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(0.0, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(normalize(2.0, 4.0), 1.0);
  const double v = 123.456, u = -7.89;
  EXPECT_NEAR(normalize(u, v) * std::sqrt(v), u, 1e-12 * std::abs(u));
  EXPECT_THROW(normalize(1.0, 0.0), NonpositiveVariance);
  EXPECT_THROW(normalize(1.0, -2.0), NonpositiveVariance);
}

TEST(EvaluateUstat, Consistent) {
  const auto frame = build_frame(1, 2.0, 3, window2());
  const auto f = smooth_density(1, 64);
  const auto [a, b] = sample_pair(f, f, 400.0, {1, 2, 0});
  const auto r = evaluate_ustat(frame, f, 400.0, a, b);
  EXPECT_NEAR(r.normalized * std::sqrt(r.variance), r.u_value, 1e-12 * std::abs(r.u_value));
  EXPECT_EQ(r.j, 3);
  EXPECT_EQ(r.B, 2.0);
  EXPECT_EQ(r.intensity, 400.0);
}

}  // namespace
}  // namespace tn
