#pragma once

// Monte Carlo experiments: replicate the H0 two-sample problem, compare the
// law of the normalized statistic with N(0, 1), and regress rates.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tn/bounds.hpp"
#include "tn/frame.hpp"
#include "tn/harmonics.hpp"
#include "tn/pointprocess.hpp"

namespace tn {

double normal_cdf(double x);

/// int |F_n(x) - Phi(x)| dx, evaluated exactly between order statistics.
/// Throws TooFewSamples for fewer than two samples.
double empirical_wasserstein(std::span<const double> samples);

/// sup_x |F_n(x) - Phi(x)|. Throws TooFewSamples.
double ks_distance(std::span<const double> samples);

struct AlternativeDensity {
  double alpha = 0.75;
  double c = 0.1;
  Condition condition = Condition::Cond1;
};

struct ExperimentConfig {
  int q = 1;
  double B = 2.0;
  std::vector<int> levels{3};
  std::vector<double> intensities{2000.0};
  double alpha = 2.0;
  Condition condition = Condition::Cond1;
  /// Empty selects default_scale().
  std::optional<double> c;
  /// 0 selects 4 * floor(B^{max level + 1}), enough for every bound.
  int bandlimit = 0;
  int replicas = 2000;
  std::uint64_t base_seed = 20240601;
  int workers = 1;
  double test_level = 0.05;
  /// Second-copy density for power runs (H1).
  std::optional<AlternativeDensity> alternative;
  std::string output = "experiment";
};

/// Applies `key=value` lines (`#` starts a comment). Throws ParseError.
void apply_config_text(ExperimentConfig& cfg, std::istream& is);
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);
/// Throws InvalidArgument.
void validate(const ExperimentConfig& cfg);

struct ExperimentRow {
  int q = 1;
  double B = 2.0;
  int j = 0;
  double intensity = 0.0;
  double alpha = 0.0;
  Condition condition = Condition::Cond1;
  int replicas = 0;

  double mean = 0.0;
  double variance = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  double wasserstein = 0.0;
  double ks = 0.0;

  double analytic_variance = 0.0;
  BoundTerms bound;
  EnvelopeTerms envelope;

  double rejection_rate = 0.0;
  /// Rejection rate with the alternative on copy 2; NaN without one.
  double power = 0.0;
  double runtime_seconds = 0.0;

  /// Normalized statistic per replica, replica order.
  std::vector<double> statistics;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
};

/// One row per (level, intensity), deterministic given base_seed and
/// independent of the worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Columns follow ExperimentRow; runtime is included only on request since
/// it breaks byte-for-byte reproducibility.
void write_csv(std::ostream& os, const ExperimentReport& report, bool include_runtime = false);
void write_json(std::ostream& os, const ExperimentReport& report, bool include_runtime = false);
/// Parses the output of write_csv (statistics are not stored there).
std::vector<ExperimentRow> read_csv(std::istream& is);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(values) against x, 95% t interval.
/// Throws InsufficientPoints for fewer than three points.
SlopeFit log_slope(std::span<const double> x, std::span<const double> values);

enum class SweepAxis { Level, LogIntensity };

enum class RateQuantity {
  Bound,
  BoundStar11,
  BoundStar21,
  BoundL4,
  Envelope,
  AnalyticVariance,
  Wasserstein,
  Ks,
};

std::string_view to_string(RateQuantity q);
double rate_value(const ExperimentRow& row, RateQuantity q);

/// Slope along j (x = j) or along log R_t, over rows in the given order.
SlopeFit rate_regression(std::span<const ExperimentRow> rows, SweepAxis axis, RateQuantity q);

struct TestDecision {
  bool reject = false;
  double p_value = 1.0;
  double statistic = 0.0;
};

/// Two-sided Gaussian test on U~_j calibrated with the variance under f0.
TestDecision hypothesis_test(const PointSample& sample1, const PointSample& sample2,
                             const NeedletFrame& frame, const HarmonicDensity& f0,
                             double intensity, double level);

}  // namespace tn
