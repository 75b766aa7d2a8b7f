#include "tn/pointprocess.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <cmath>
#include <sstream>

#include "tn/errors.hpp"

namespace tn {
namespace {

TEST(Streams, SeedsAreDistinctAndStable) {
  EXPECT_EQ(stream_seed({1, 2, 3}), stream_seed({1, 2, 3}));
  EXPECT_NE(stream_seed({1, 2, 1}), stream_seed({1, 2, 2}));
  EXPECT_NE(stream_seed({1, 2, 1}), stream_seed({1, 3, 1}));
  EXPECT_NE(stream_seed({1, 2, 1}), stream_seed({2, 2, 1}));
}

TEST(Sampling, CountLawIsPoisson) {
  const auto f = uniform_density(1, 4);
  const double R = 100.0;
  const int reps = 10000;
  std::vector<double> counts(reps);
  for (int r = 0; r < reps; ++r) {
    RngStream rng({77, static_cast<std::uint64_t>(r), 1});
    counts[static_cast<std::size_t>(r)] = static_cast<double>(sample_process(f, R, 1, rng).size());
  }
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= reps;
  EXPECT_NEAR(mean, R, 3.0 * std::sqrt(R / reps));

  // Chi-square goodness of fit on bins [0,80), 80..120 singly, [121, inf).
  boost::math::poisson_distribution<double> pois(R);
  std::vector<double> observed(43, 0.0);
  for (double c : counts) {
    const int bin = c < 80 ? 0 : (c > 120 ? 42 : static_cast<int>(c) - 79);
    observed[static_cast<std::size_t>(bin)] += 1.0;
  }
  double stat = 0.0;
  for (int b = 0; b < 43; ++b) {
    double p;
    if (b == 0) p = boost::math::cdf(pois, 79.0);
    else if (b == 42) p = boost::math::cdf(boost::math::complement(pois, 120.0));
    else p = boost::math::pdf(pois, 79.0 + b);
    const double e = p * reps;
    stat += (observed[static_cast<std::size_t>(b)] - e) * (observed[static_cast<std::size_t>(b)] - e) / e;
  }
  const double crit = boost::math::quantile(boost::math::complement(boost::math::chi_squared(42.0), 0.001));
  EXPECT_LT(stat, crit);
}

TEST(Sampling, VanishingIntensityGivesNoPoints) {
  RngStream rng({5, 0, 1});
  EXPECT_TRUE(sample_process(uniform_density(2, 2), 1e-9, 1, rng).empty());
}

TEST(Sampling, RejectsBadIntensity) {
  RngStream rng({5, 0, 1});
  EXPECT_THROW(sample_process(uniform_density(1, 2), 0.0, 1, rng), InvalidArgument);
  EXPECT_THROW(sample_process(uniform_density(1, 2), -3.0, 1, rng), InvalidArgument);
}

TEST(Sampling, PointsLieInFundamentalDomain) {
  const auto f = make_density(2, 1.0, default_scale(2, 1.0, 6, Condition::Cond2), 6, Condition::Cond2);
  RngStream rng({3, 1, 1});
  const auto s = sample_process(f, 500.0, 2, rng);
  EXPECT_EQ(s.label(), 2);
  for (double x : s.coords()) {
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, kTwoPi);
  }
}

// E sum_x conj(s_n(x)) = R a_n.
void check_campbell(const HarmonicDensity& f, double R, std::uint64_t seed, std::uint64_t substream) {
  const int reps = 10000;
  const std::vector<MultiIndex> freqs{{1}, {2}, {3}, {5}, {-4}};
  for (const auto& n : freqs) {
    double sr = 0.0, si = 0.0, sr2 = 0.0, si2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      RngStream rng({seed, static_cast<std::uint64_t>(r), substream});
      const auto s = sample_process(f, R, 1, rng);
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) acc += std::conj(basis_eval(n, s.point(i)));
      sr += acc.real();
      si += acc.imag();
      sr2 += acc.real() * acc.real();
      si2 += acc.imag() * acc.imag();
    }
    const double mr = sr / reps, mi = si / reps;
    const double se_r = std::sqrt((sr2 / reps - mr * mr) / reps);
    const double se_i = std::sqrt((si2 / reps - mi * mi) / reps);
    const auto a = f.coeff(n);
    EXPECT_LT(std::abs(mr - R * a.real()), 3.0 * se_r) << "n=" << n[0];
    EXPECT_LT(std::abs(mi - R * a.imag()), 3.0 * se_i) << "n=" << n[0];
  }
}

TEST(Sampling, CampbellFirstMoment) {
  const int L = 16;
  const auto f = make_density(1, 0.75, default_scale(1, 0.75, L, Condition::Cond1), L, Condition::Cond1);
  check_campbell(f, 60.0, 2024, 1);
}

TEST(SamplePair, IndependentCounts) {
  const auto f = uniform_density(1, 2);
  const int reps = 10000;
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  for (int r = 0; r < reps; ++r) {
    const auto [a, b] = sample_pair(f, f, 50.0, {99, static_cast<std::uint64_t>(r), 0});
    const double x = static_cast<double>(a.size()), y = static_cast<double>(b.size());
    s1 += x;
    s2 += y;
    s11 += x * x;
    s22 += y * y;
    s12 += x * y;
  }
  const double n = reps;
  const double cov = s12 / n - (s1 / n) * (s2 / n);
  const double corr = cov / std::sqrt((s11 / n - (s1 / n) * (s1 / n)) * (s22 / n - (s2 / n) * (s2 / n)));
  EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(n));
}

TEST(SamplePair, LabelsSubstreamsAndDeterminism) {
  const auto f = uniform_density(1, 2);
  const auto [a, b] = sample_pair(f, f, 40.0, {7, 3, 0});
  EXPECT_EQ(a.label(), 1);
  EXPECT_EQ(b.label(), 2);
  EXPECT_EQ(a.seed_trace().substream, 1u);
  EXPECT_EQ(b.seed_trace().substream, 2u);
  EXPECT_NE(std::vector<double>(a.coords().begin(), a.coords().end()),
            std::vector<double>(b.coords().begin(), b.coords().end()));
  const auto [a2, b2] = sample_pair(f, f, 40.0, {7, 3, 0});
  EXPECT_EQ(std::vector<double>(a.coords().begin(), a.coords().end()),
            std::vector<double>(a2.coords().begin(), a2.coords().end()));
  EXPECT_EQ(std::vector<double>(b.coords().begin(), b.coords().end()),
            std::vector<double>(b2.coords().begin(), b2.coords().end()));
  EXPECT_THROW(sample_pair(uniform_density(1, 2), uniform_density(2, 2), 1.0, {}), DimensionMismatch);
}

TEST(SamplePair, AlternativeShiftsFirstMoment) {
  const int L = 16;
  const auto f1 = make_density(1, 2.0, default_scale(1, 2.0, L, Condition::Cond1), L, Condition::Cond1);
  const auto f2 = make_density(1, 0.75, 0.1, L, Condition::Cond1);
  ASSERT_NE(f1.coeff(MultiIndex{2}), f2.coeff(MultiIndex{2}));
  // Campbell holds for each copy with its own density.
  check_campbell(f2, 60.0, 31, 2);
}

TEST(SampleFile, RoundTrip) {
  const auto f = uniform_density(2, 2);
  const auto [a, b] = sample_pair(f, f, 20.0, {1, 1, 0});
  std::stringstream ss;
  std::vector<PointSample> both{b, a};
  write_samples(ss, both);
  const auto back = read_samples(ss, 20.0);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].label(), 1);
  EXPECT_EQ(back[1].label(), 2);
  EXPECT_EQ(std::vector<double>(back[0].coords().begin(), back[0].coords().end()),
            std::vector<double>(a.coords().begin(), a.coords().end()));
  EXPECT_EQ(back[1].size(), b.size());
  EXPECT_EQ(back[0].intensity(), 20.0);
}

TEST(SampleFile, ParseErrors) {
  std::istringstream ragged("1 0.5 0.5\n2 0.1\n");
  EXPECT_THROW(read_samples(ragged), ParseError);
  std::istringstream label("1.5 0.5\n");
  EXPECT_THROW(read_samples(label), ParseError);
}

}  // namespace
}  // namespace tn
