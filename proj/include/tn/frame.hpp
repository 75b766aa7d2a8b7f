#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tn/harmonics.hpp"
#include "tn/lattice.hpp"

namespace tn {

/// Window b with support [1/B, B] and sum_j b^2(B^-j x) = 1 for x >= 1.
///
/// b^2(x) = phi(x / B) - phi(x), where phi falls smoothly from 1 at 1/B to 0
/// at 1 as the normalized running integral of the bump exp(-1 / (1 - s^2)),
/// s the affine image of [1/B, 1] on [-1, 1]. The running integral is
/// tabulated by composite Simpson and read back by cubic Hermite
/// interpolation with the exact bump as derivative.
class WindowFunction {
 public:
  WindowFunction(double B, int resolution);

  double scale() const { return B_; }
  int resolution() const { return resolution_; }

  double phi(double t) const;
  double squared(double x) const;
  double operator()(double x) const;

 private:
  double bump(double u) const;

  double B_;
  int resolution_;
  double lo_;
  double step_;
  double total_;
  std::vector<double> cumulative_;
};

inline constexpr int kDefaultWindowResolution = 4096;

/// Throws InvalidArgument if B <= 1 or resolution < 1024.
WindowFunction build_window(double B, int resolution = kDefaultWindowResolution);

/// Needlets {psi_{j,k}} at one level j on T^q with a product-grid cubature.
///
/// The shell is Lambda_j = {n : B^{j-1} <= ell_n <= B^{j+1}}. Cubature nodes
/// are xi_k = 2pi k / M per coordinate with M = floor(2 B^{j+1}) + 1 and equal
/// weights (2pi)^q / M^q, which integrates s_{n1} conj(s_{n2}) exactly for
/// every pair of shell frequencies.
class NeedletFrame {
 public:
  NeedletFrame(int q, double B, int j, std::shared_ptr<const WindowFunction> window);

  int dim() const { return q_; }
  double scale() const { return B_; }
  int level() const { return j_; }
  const WindowFunction& window() const { return *window_; }

  std::size_t shell_size() const { return ell_.size(); }
  const std::vector<MultiIndex>& shell() const { return shell_; }
  /// Shell components, shell_size() * dim() ints.
  std::span<const int> shell_flat() const { return shell_flat_; }
  std::span<const double> eigenvalues() const { return ell_; }
  /// b(B^-j ell_n) per shell entry.
  std::span<const double> window_values() const { return b_; }
  /// b^2(B^-j ell_n) per shell entry.
  std::span<const double> spectral_weights() const { return b2_; }
  /// max_i |n_i| over the shell.
  int shell_radius() const { return shell_radius_; }

  int grid_side() const { return grid_side_; }
  std::size_t num_needlets() const { return num_needlets_; }
  double cubature_weight() const { return weight_; }
  /// xi_{j,k} for 0 <= k < num_needlets(), row-major over the grid.
  std::vector<double> cubature_point(std::size_t k) const;

 private:
  int q_;
  double B_;
  int j_;
  std::shared_ptr<const WindowFunction> window_;
  std::vector<MultiIndex> shell_;
  std::vector<int> shell_flat_;
  std::vector<double> ell_;
  std::vector<double> b_;
  std::vector<double> b2_;
  int shell_radius_ = 0;
  int grid_side_ = 0;
  std::size_t num_needlets_ = 0;
  double weight_ = 0.0;
};

/// Throws EmptyShell when no lattice point lies in the shell, InvalidArgument
/// when j < 0.
NeedletFrame build_frame(int q, double B, int j, const WindowFunction& window);
NeedletFrame build_frame(int q, double B, int j, std::shared_ptr<const WindowFunction> window);

/// psi_{j,k}(theta); k is zero-based.
double needlet_eval(const NeedletFrame& frame, std::size_t k, std::span<const double> theta);

/// psi_{j,k}(theta) for every k, by direct summation.
std::vector<double> needlet_values(const NeedletFrame& frame, std::span<const double> theta);

/// psi_{j,0} on the regular grid of side `side` (row-major), via FFT.
std::vector<double> needlet_on_grid(const NeedletFrame& frame, int side);

/// ||psi_{j,k}||_{L^p(T^q, dtheta)}; identical for every k. Integer p <= 4
/// with even p is exact, other p use Riemann sums at `oversample` points per
/// unit frequency.
double needlet_lp_norm(const NeedletFrame& frame, double p, int oversample = 16);

struct LpScan {
  std::vector<int> levels;
  std::vector<double> norms;
  /// Least-squares slope of log ||psi_j||_p against j.
  double slope = 0.0;
};

/// Throws InvalidArgument unless p in {1, 2, 4} and at least three levels.
LpScan lp_norm_scan(int q, double B, const WindowFunction& window, double p,
                    std::span<const int> levels);

/// beta_{j,k} = <f, psi_{j,k}> for every k (spectral evaluation).
/// Throws InsufficientBandlimit if the density does not cover the shell.
std::vector<double> needlet_coeffs(const HarmonicDensity& f, const NeedletFrame& frame);

/// sum_k beta_k psi_{j,k}(theta).
double needlet_synthesis(const NeedletFrame& frame, std::span<const double> beta,
                         std::span<const double> theta);

}  // namespace tn
