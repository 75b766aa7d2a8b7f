#include "detail.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "tn/errors.hpp"
#include "tn/frame.hpp"
#include "tn/harmonics.hpp"

namespace tn::detail {

namespace {
// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

void fft_cube(std::vector<std::complex<double>>& data, int q, int side, FftSign sign) {
  std::vector<int> dims(static_cast<std::size_t>(q), side);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(q, dims.data(), buf, buf, static_cast<int>(sign), FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error("fftw_plan_dft failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

void phase_table(double theta, int L, std::span<std::complex<double>> out) {
  const std::complex<double> base = std::polar(1.0, theta);
  out[static_cast<std::size_t>(L)] = 1.0;
  std::complex<double> z = 1.0;
  for (int n = 1; n <= L; ++n) {
    // resynchronize periodically to bound recurrence drift
    z = (n % 64 == 0) ? std::polar(1.0, n * theta) : z * base;
    out[static_cast<std::size_t>(L + n)] = z;
    out[static_cast<std::size_t>(L - n)] = std::conj(z);
  }
}

std::size_t wrapped_offset(std::span<const int> n, int side) {
  std::size_t off = 0;
  for (int c : n) off = off * static_cast<std::size_t>(side) + static_cast<std::size_t>(wrap(c, side));
  return off;
}

}  // namespace tn::detail


namespace tn::detail {

std::size_t cube_size(int q, int side) {
  std::size_t total = 1;
  for (int d = 0; d < q; ++d) total *= static_cast<std::size_t>(side);
  return total;
}

std::vector<std::complex<double>> place_shell(const NeedletFrame& frame,
                                              std::span<const double> values, int side) {
  const int q = frame.dim();
  std::vector<std::complex<double>> buf(cube_size(q, side));
  const auto flat = frame.shell_flat();
  for (std::size_t i = 0; i < frame.shell_size(); ++i)
    buf[wrapped_offset(flat.subspan(i * static_cast<std::size_t>(q), static_cast<std::size_t>(q)), side)] +=
        values[i];
  return buf;
}

std::vector<std::complex<double>> place_coeffs(const HarmonicDensity& f, int radius, int side) {
  const int q = f.dim();
  const int r = std::min(radius, f.bandlimit());
  std::vector<std::complex<double>> buf(cube_size(q, side));
  const LatticeBox box(q, r);
  std::vector<int> m(static_cast<std::size_t>(q));
  for (std::size_t i = 0; i < box.size(); ++i) {
    box.index_at(i, m);
    buf[wrapped_offset(m, side)] = f.coeff(m);
  }
  return buf;
}

std::vector<std::complex<double>> shell_autocorrelation(const NeedletFrame& frame,
                                                        std::span<const double> weights, int side,
                                                        std::vector<std::complex<double>>* spectrum) {
  const int q = frame.dim();
  auto buf = place_shell(frame, weights, side);
  fft_cube(buf, q, side, FftSign::Forward);
  // The shell is symmetric under n -> -n, so the correlation equals the
  // self-convolution: g^ = |W^|^2.
  for (auto& v : buf) v = std::norm(v);
  if (spectrum != nullptr) *spectrum = buf;
  fft_cube(buf, q, side, FftSign::Backward);
  const double inv = 1.0 / static_cast<double>(buf.size());
  for (auto& v : buf) v *= inv;
  return buf;
}

}  // namespace tn::detail
