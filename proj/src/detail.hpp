#pragma once

// Internal helpers shared by the library sources.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tn::detail {

enum class FftSign { Forward = -1, Backward = +1 };

/// In-place unnormalized DFT over the cube side^q (row-major).
/// Forward uses exp(-i ...), Backward exp(+i ...).
void fft_cube(std::vector<std::complex<double>>& data, int q, int side, FftSign sign);

/// out[n + L] = exp(i n theta) for n in [-L, L].
void phase_table(double theta, int L, std::span<std::complex<double>> out);

/// Index of frequency n in a periodic array of the given side.
inline int wrap(int n, int side) {
  const int r = n % side;
  return r < 0 ? r + side : r;
}

/// Row-major offset of a wrapped multi-index in a cube of the given side.
std::size_t wrapped_offset(std::span<const int> n, int side);

}  // namespace tn::detail

namespace tn {
class NeedletFrame;
class HarmonicDensity;
}  // namespace tn

namespace tn::detail {

/// side^q.
std::size_t cube_size(int q, int side);

/// Shell values placed at their wrapped frequencies in a cube of the given side.
std::vector<std::complex<double>> place_shell(const NeedletFrame& frame,
                                              std::span<const double> values, int side);

/// a_m for max_i |m_i| <= radius placed at wrapped frequencies.
std::vector<std::complex<double>> place_coeffs(const HarmonicDensity& f, int radius, int side);

/// g(m) = sum_{n1 - n2 = m} w_{n1} w_{n2} over the shell, on a cube of side
/// >= 4 * shell_radius + 1 (so no wrap-around), with its DFT returned in `spectrum`.
std::vector<std::complex<double>> shell_autocorrelation(const NeedletFrame& frame,
                                                        std::span<const double> weights, int side,
                                                        std::vector<std::complex<double>>* spectrum = nullptr);

}  // namespace tn::detail
