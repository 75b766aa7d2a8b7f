#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "tn/frame.hpp"
#include "tn/harmonics.hpp"
#include "tn/ustat.hpp"

namespace tn {

/// Raw (unnormalized) norms of the U-statistic kernel h_j on L^2(mu_t) over
/// both torus copies.
struct ContractionNorms {
  double l4_fourth = 0.0;  ///< ||h||^4_{L^4(mu_t^2)}
  double star21_sq = 0.0;  ///< ||h *_2^1 h||^2_{L^2(mu_t)}
  double star11_sq = 0.0;  ///< ||h *_1^1 h||^2_{L^2(mu_t^2)}
  double variance = 0.0;   ///< 2 ||h||^2_{L^2(mu_t^2)}
};

struct ContractionOptions {
  SumPath path = SumPath::Auto;
  /// Multiplies the kernel before any sum is formed (h -> s h).
  double kernel_scale = 1.0;
  /// Upper bound on shell quadruples for the direct path.
  std::uint64_t direct_term_cap = 1'000'000'000ULL;
  /// Upper bound on scratch memory for the convolution path.
  std::size_t memory_cap_bytes = std::size_t{1} << 31;
};

/// Throws InsufficientBandlimit if f does not reach 4 * shell_radius, and
/// ShellTooLarge if the requested path exceeds its cap.
ContractionNorms contraction_norms(const NeedletFrame& frame, const HarmonicDensity& f,
                                   double intensity, const ContractionOptions& options = {});

/// The three terms of the normal-approximation bound for h / sqrt(variance).
struct BoundTerms {
  double star11 = 0.0;  ///< sqrt(8) ||h^ *_1^1 h^||
  double star21 = 0.0;  ///< (6 + 2 sqrt 2) ||h^ *_2^1 h^||
  double l4 = 0.0;      ///< sqrt(8) ||h^||^2_{L^4}
  double total() const { return star11 + star21 + l4; }
};

inline constexpr double kStar11Constant = 2.8284271247461903;  // sqrt(8)
inline constexpr double kStar21Constant = 8.8284271247461903;  // 6 + 2 sqrt(2)
inline constexpr double kL4Constant = 2.8284271247461903;      // sqrt(8)

/// Each squared norm is degree four in h, so the normalized term is
/// sqrt(raw) / variance. Throws NonpositiveVariance.
BoundTerms bound_terms(const ContractionNorms& norms);
double wasserstein_bound(const ContractionNorms& norms);

enum class Regime { AlphaAtLeastOne, AlphaBelowOne };
std::string_view to_string(Regime r);
Regime regime_for(double alpha);

/// Constant-free rate terms for d_W(U~_j, Z); Condition 2 replaces j by j q.
struct EnvelopeTerms {
  double first = 0.0;   ///< R^-1/2 B^{j/4}
  double second = 0.0;  ///< R^-1/2 or R^-1/2 B^{j(1 - alpha)}
  double third = 0.0;   ///< B^{-j/2} or B^{j(1 - 2 alpha)}
  double total() const { return first + second + third; }
};

/// Throws InvalidAlpha if alpha < 1/2.
EnvelopeTerms envelope_terms(int q, double B, int j, double intensity, double alpha,
                             Condition condition);
double rate_envelope(int q, double B, int j, double intensity, double alpha, Condition condition);

/// R_t^-1/2 B^{j max(1/4, 1 - alpha)} (j -> j q under Condition 2).
double clt_quantity(int q, double B, int j, double intensity, double alpha,
                    Condition condition = Condition::Cond1);

/// True when clt_quantity strictly decreases along the paired sequences.
bool clt_condition(int q, double B, std::span<const int> levels,
                   std::span<const double> intensities, double alpha,
                   Condition condition = Condition::Cond1);

struct BoundReport {
  ContractionNorms norms;
  BoundTerms terms;
  double wasserstein_bound = 0.0;
  EnvelopeTerms envelope;
  double rate_envelope = 0.0;
  Regime regime = Regime::AlphaAtLeastOne;
  int q = 0;
  double B = 0.0;
  int j = 0;
  double intensity = 0.0;
  double alpha = 0.0;
  Condition condition = Condition::Cond1;
};

/// Norms, assembled bound and envelope for one configuration. The density
/// supplies alpha and the condition.
BoundReport bound_report(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                         const ContractionOptions& options = {});

}  // namespace tn
