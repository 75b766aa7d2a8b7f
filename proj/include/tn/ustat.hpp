#pragma once

// The two-sample needlet U-statistic.
//
// With both samples pooled into one labeled configuration,
//
//   U_j = sum_{p != p'} h(p, p'),
//   h((x, a), (y, b)) = (-1)^{a+b} sum_k psi_k(x) psi_k(y)
//                     = (-1)^{a+b} sum_{n in Lambda_j} b^2(B^-j ell_n) s_n(x) conj(s_n(y)).
//
// Everything here evaluates the spectral right-hand side; the needlet-sum
// forms are kept as *_needlet_sum for cross-checking.

#include <span>
#include <vector>

#include "tn/frame.hpp"
#include "tn/harmonics.hpp"
#include "tn/pointprocess.hpp"

namespace tn {

struct LabeledPoint {
  int label = 1;
  std::vector<double> theta;
};

struct UStatResult {
  double u_value = 0.0;
  double variance = 0.0;
  double normalized = 0.0;
  int j = 0;
  double B = 0.0;
  double intensity = 0.0;
};

/// How four-fold and two-fold lattice sums are evaluated.
enum class SumPath { Auto, Direct, Convolution };

/// U_j from the two samples (spectral form). Throws DimensionMismatch or
/// InvalidArgument on wrong labels.
double compute_U(const NeedletFrame& frame, const PointSample& sample1, const PointSample& sample2);

/// U_j from the literal definition with needlets summed over k.
double compute_U_needlet_sum(const NeedletFrame& frame, const PointSample& sample1,
                             const PointSample& sample2);

/// h_j(p1, p2), spectral form. Throws NumericalError if the spectral sum has
/// an imaginary part above 1e-10.
double kernel_h(const NeedletFrame& frame, const LabeledPoint& p1, const LabeledPoint& p2);

/// h_j(p1, p2) = sign * sum_k psi_k(theta1) psi_k(theta2).
double kernel_h_needlet_sum(const NeedletFrame& frame, const LabeledPoint& p1,
                            const LabeledPoint& p2);

/// Second-order Wiener-Ito integral of h against the compensated labeled
/// process, expanded over atoms:
///   sum_{p != p'} h(p, p') - 2 sum_p H(p) + C,
///   H(p) = int h(p, y) mu_t(dy),  C = int int h dmu_t dmu_t,
/// where copy b carries control R_t f_b. Equals compute_U whenever f1 = f2.
double double_integral_oracle(const NeedletFrame& frame, const HarmonicDensity& f1,
                              const HarmonicDensity& f2, double intensity,
                              const PointSample& sample1, const PointSample& sample2);
double double_integral_oracle(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                              const PointSample& sample1, const PointSample& sample2);

/// Var U_j under H0 with control R_t f:
///   8 R_t^2 (2pi)^{-q} sum_{n1, n2 in Lambda_j} b^2 b^2 |a_{n1 - n2}|^2.
/// Throws InsufficientBandlimit if f does not resolve every shell difference.
double analytic_variance(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                         SumPath path = SumPath::Auto);

/// u / sqrt(variance); throws NonpositiveVariance.
double normalize(double u, double variance);

UStatResult evaluate_ustat(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                           const PointSample& sample1, const PointSample& sample2);

}  // namespace tn
