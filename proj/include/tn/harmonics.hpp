#pragma once

// Fourier analysis on T^q: the orthonormal basis s_n, spectrally specified
// densities, and their evaluation.

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tn/lattice.hpp"

namespace tn {

/// Coefficient decay model of a density.
///   Cond1:  a_n = c (ell_n + 1)^-alpha           (isotropic)
///   Cond2:  a_n = c prod_m (|n_m| + 1)^-alpha    (product form)
enum class Condition { Cond1, Cond2, Custom };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view s);

inline constexpr double kPositivityFloor = 1e-6;
inline constexpr double kEnvelopeMargin = 0.1;
/// Scan grids use this many points per unit of bandlimit in every dimension.
inline constexpr int kScanOversample = 4;

/// s_n(theta) = (2pi)^{-q/2} exp(i <n, theta>).
std::complex<double> basis_eval(std::span<const int> n, std::span<const double> theta);
inline std::complex<double> basis_eval(const MultiIndex& n, std::span<const double> theta) {
  return basis_eval(n.view(), theta);
}

/// (2pi)^{-q/2}, the normalized zero-mode coefficient of any probability density.
double zero_mode(int q);

/// A real probability density on T^q given by a truncated Fourier table
/// {a_n : |n_i| <= bandlimit}. Instances are validated on construction and
/// immutable afterwards.
class HarmonicDensity {
 public:
  /// Builds and validates a density from a box-ordered coefficient table.
  /// Throws InvalidDensity (wrong size, non-Hermitian, a_0 not normalized)
  /// or PositivityViolation.
  static HarmonicDensity from_coefficients(int q, int bandlimit,
                                           std::vector<std::complex<double>> coeffs,
                                           Condition condition = Condition::Custom,
                                           double alpha = 0.0, double c = 0.0);

  int dim() const { return box_.dim(); }
  int bandlimit() const { return box_.radius(); }
  double alpha() const { return alpha_; }
  double scale() const { return c_; }
  Condition condition() const { return condition_; }
  const LatticeBox& box() const { return box_; }

  /// a_n, zero outside the retained box.
  std::complex<double> coeff(std::span<const int> n) const;
  std::complex<double> coeff(const MultiIndex& n) const { return coeff(n.view()); }
  std::span<const std::complex<double>> coeffs() const { return coeffs_; }

  /// Extremes of f over the validation scan grid.
  double grid_min() const { return grid_min_; }
  double grid_max() const { return grid_max_; }

 private:
  HarmonicDensity() = default;

  LatticeBox box_;
  std::vector<std::complex<double>> coeffs_;
  Condition condition_ = Condition::Custom;
  double alpha_ = 0.0;
  double c_ = 0.0;
  double grid_min_ = 0.0;
  double grid_max_ = 0.0;
};

/// Largest-safe default c: sum_{n != 0} |a_n| = 0.8 a_0, which keeps f
/// bounded below by 0.2 a_0 (2pi)^{-q/2}.
double default_scale(int q, double alpha, int bandlimit, Condition condition);

/// Density under Condition 1 or 2 with a_0 overridden to (2pi)^{-q/2}.
/// Throws InvalidAlpha (alpha < 1/2), InvalidArgument, PositivityViolation.
HarmonicDensity make_density(int q, double alpha, double c, int bandlimit, Condition condition);

/// f = (2pi)^{-q}, represented on the given box.
HarmonicDensity uniform_density(int q, int bandlimit);

/// Re(sum_n a_n s_n(theta)); throws NumericalError if the imaginary part
/// exceeds 1e-10.
double density_eval(const HarmonicDensity& f, std::span<const double> theta);

/// Evaluates f at points.size()/q points stored contiguously.
void density_eval_batch(const HarmonicDensity& f, std::span<const double> points,
                        std::span<double> out);

/// f on the regular grid 2pi k / side, k in [0, side)^q, row-major.
/// Requires side > 2 * bandlimit.
std::vector<double> density_on_grid(const HarmonicDensity& f, int side);

/// Rejection envelope: (1 + margin) * max of f over the scan grid.
double density_sup(const HarmonicDensity& f, double margin = kEnvelopeMargin);

/// Text table, one row per retained index: `n_1 ... n_q re(a_n) im(a_n)`.
void write_coefficients(std::ostream& os, const HarmonicDensity& f);
HarmonicDensity read_coefficients(std::istream& is);

}  // namespace tn
