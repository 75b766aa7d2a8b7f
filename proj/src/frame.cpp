#include "tn/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detail.hpp"
#include "tn/errors.hpp"

namespace tn {

NeedletFrame::NeedletFrame(int q, double B, int j, std::shared_ptr<const WindowFunction> window)
    : q_(q), B_(B), j_(j), window_(std::move(window)) {
  if (q < 1) throw InvalidArgument("dimension q must be >= 1");
  if (j < 0) throw InvalidArgument("level j must be >= 0");
  if (!window_) throw InvalidArgument("null window");
  if (std::abs(window_->scale() - B) > 1e-12 * B)
    throw InvalidArgument("window scale differs from frame scale");

  const double lo = std::pow(B, j - 1);
  const double hi = std::pow(B, j + 1);
  const double lo2 = lo * lo * (1.0 - 1e-12);
  const double hi2 = hi * hi * (1.0 + 1e-12);
  const int radius = static_cast<int>(std::floor(hi * (1.0 + 1e-12)));
  const LatticeBox box(q, radius);
  const double scale = std::pow(B, j);
  std::vector<int> n(static_cast<std::size_t>(q));
  for (std::size_t i = 0; i < box.size(); ++i) {
    box.index_at(i, n);
    double l2 = 0.0;
    for (int c : n) l2 += static_cast<double>(c) * c;
    if (l2 < lo2 || l2 > hi2) continue;
    const double ell = std::sqrt(l2);
    shell_.emplace_back(n);
    shell_flat_.insert(shell_flat_.end(), n.begin(), n.end());
    ell_.push_back(ell);
    const double w2 = window_->squared(ell / scale);
    b2_.push_back(w2);
    b_.push_back(std::sqrt(w2));
    for (int c : n) shell_radius_ = std::max(shell_radius_, std::abs(c));
  }
  if (shell_.empty()) throw EmptyShell("no lattice point in the frequency shell at this level");

  grid_side_ = static_cast<int>(std::floor(2.0 * hi * (1.0 + 1e-12))) + 1;
  num_needlets_ = 1;
  for (int d = 0; d < q; ++d) num_needlets_ *= static_cast<std::size_t>(grid_side_);
  weight_ = std::pow(kTwoPi / grid_side_, q);
}

std::vector<double> NeedletFrame::cubature_point(std::size_t k) const {
  if (k >= num_needlets_) throw InvalidArgument("needlet index out of range");
  std::vector<double> xi(static_cast<std::size_t>(q_));
  const auto M = static_cast<std::size_t>(grid_side_);
  for (int d = q_ - 1; d >= 0; --d) {
    xi[static_cast<std::size_t>(d)] = kTwoPi * static_cast<double>(k % M) / grid_side_;
    k /= M;
  }
  return xi;
}

NeedletFrame build_frame(int q, double B, int j, const WindowFunction& window) {
  return NeedletFrame(q, B, j, std::make_shared<const WindowFunction>(window));
}

NeedletFrame build_frame(int q, double B, int j, std::shared_ptr<const WindowFunction> window) {
  return NeedletFrame(q, B, j, std::move(window));
}

namespace {

void check_point(const NeedletFrame& frame, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != frame.dim())
    throw DimensionMismatch("point dimension differs from frame dimension");
}

}  // namespace

double needlet_eval(const NeedletFrame& frame, std::size_t k, std::span<const double> theta) {
  check_point(frame, theta);
  const auto xi = frame.cubature_point(k);
  const int q = frame.dim();
  const auto flat = frame.shell_flat();
  const auto b = frame.window_values();
  double acc = 0.0;
  for (std::size_t i = 0; i < frame.shell_size(); ++i) {
    double phase = 0.0;
    for (int d = 0; d < q; ++d)
      phase += flat[i * static_cast<std::size_t>(q) + static_cast<std::size_t>(d)] *
               (theta[static_cast<std::size_t>(d)] - xi[static_cast<std::size_t>(d)]);
    acc += b[i] * std::cos(phase);
  }
  return std::sqrt(frame.cubature_weight()) * std::pow(kTwoPi, -q) * acc;
}

std::vector<double> needlet_values(const NeedletFrame& frame, std::span<const double> theta) {
  check_point(frame, theta);
  // psi_k(theta) = sqrt(lambda) (2pi)^-q sum_n b_n e^{i n theta} e^{-i n xi_k}:
  // a forward DFT over the cubature grid.
  const int q = frame.dim();
  const int M = frame.grid_side();
  std::vector<std::complex<double>> buf(frame.num_needlets());
  const auto flat = frame.shell_flat();
  const auto b = frame.window_values();
  for (std::size_t i = 0; i < frame.shell_size(); ++i) {
    const auto n = flat.subspan(i * static_cast<std::size_t>(q), static_cast<std::size_t>(q));
    double phase = 0.0;
    for (int d = 0; d < q; ++d) phase += n[static_cast<std::size_t>(d)] * theta[static_cast<std::size_t>(d)];
    buf[detail::wrapped_offset(n, M)] += b[i] * std::polar(1.0, phase);
  }
  detail::fft_cube(buf, q, M, detail::FftSign::Forward);
  const double norm = std::sqrt(frame.cubature_weight()) * std::pow(kTwoPi, -q);
  std::vector<double> out(buf.size());
  for (std::size_t k = 0; k < buf.size(); ++k) out[k] = norm * buf[k].real();
  return out;
}

std::vector<double> needlet_on_grid(const NeedletFrame& frame, int side) {
  const int q = frame.dim();
  if (side <= 2 * frame.shell_radius()) throw InvalidArgument("grid side must exceed twice the shell radius");
  std::size_t total = 1;
  for (int d = 0; d < q; ++d) total *= static_cast<std::size_t>(side);
  std::vector<std::complex<double>> buf(total);
  const auto flat = frame.shell_flat();
  const auto b = frame.window_values();
  for (std::size_t i = 0; i < frame.shell_size(); ++i)
    buf[detail::wrapped_offset(flat.subspan(i * static_cast<std::size_t>(q), static_cast<std::size_t>(q)), side)] += b[i];
  detail::fft_cube(buf, q, side, detail::FftSign::Backward);
  const double norm = std::sqrt(frame.cubature_weight()) * std::pow(kTwoPi, -q);
  std::vector<double> out(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = norm * buf[i].real();
  return out;
}

double needlet_lp_norm(const NeedletFrame& frame, double p, int oversample) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("p must be finite and >= 1");
  const int q = frame.dim();
  const int r = frame.shell_radius();
  if (p == 2.0) {
    const auto w = frame.spectral_weights();
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    return std::sqrt(frame.cubature_weight() * std::pow(kTwoPi, -q) * s);
  }
  // |psi|^p is a trigonometric polynomial of degree p r for even p, so a grid
  // of side > p r integrates it exactly.
  int side = 0;
  if (p == 4.0) {
    side = 4 * r + 1;
  } else {
    if (oversample < 2) throw InvalidArgument("oversample must be >= 2");
    side = std::max(oversample * r, 4 * r + 1);
  }
  const auto values = needlet_on_grid(frame, side);
  double acc = 0.0;
  for (double v : values) acc += std::pow(std::abs(v), p);
  acc *= std::pow(kTwoPi / side, q);
  return std::pow(acc, 1.0 / p);
}

LpScan lp_norm_scan(int q, double B, const WindowFunction& window, double p,
                    std::span<const int> levels) {
  if (p != 1.0 && p != 2.0 && p != 4.0) throw InvalidArgument("lp_norm_scan supports p in {1, 2, 4}");
  if (levels.size() < 3) throw InvalidArgument("lp_norm_scan needs at least three levels");
  auto shared = std::make_shared<const WindowFunction>(window);
  LpScan scan;
  for (int j : levels) {
    const NeedletFrame frame(q, B, j, shared);
    scan.levels.push_back(j);
    scan.norms.push_back(needlet_lp_norm(frame, p));
  }
  const double n = static_cast<double>(levels.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    mx += scan.levels[i];
    my += std::log(scan.norms[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double dx = scan.levels[i] - mx;
    sxy += dx * (std::log(scan.norms[i]) - my);
    sxx += dx * dx;
  }
  scan.slope = sxy / sxx;
  return scan;
}

std::vector<double> needlet_coeffs(const HarmonicDensity& f, const NeedletFrame& frame) {
  if (f.dim() != frame.dim()) throw DimensionMismatch("density and frame dimensions differ");
  if (f.bandlimit() < frame.shell_radius())
    throw InsufficientBandlimit("density bandlimit does not cover the frequency shell");
  // beta_k = sqrt(lambda) (2pi)^{-q/2} sum_n b_n a_n e^{i n xi_k}.
  const int q = frame.dim();
  const int M = frame.grid_side();
  std::vector<std::complex<double>> buf(frame.num_needlets());
  const auto flat = frame.shell_flat();
  const auto b = frame.window_values();
  for (std::size_t i = 0; i < frame.shell_size(); ++i) {
    const auto n = flat.subspan(i * static_cast<std::size_t>(q), static_cast<std::size_t>(q));
    buf[detail::wrapped_offset(n, M)] += b[i] * f.coeff(n);
  }
  detail::fft_cube(buf, q, M, detail::FftSign::Backward);
  const double norm = std::sqrt(frame.cubature_weight()) * zero_mode(q);
  std::vector<double> beta(buf.size());
  for (std::size_t k = 0; k < buf.size(); ++k) beta[k] = norm * buf[k].real();
  return beta;
}

double needlet_synthesis(const NeedletFrame& frame, std::span<const double> beta,
                         std::span<const double> theta) {
  if (beta.size() != frame.num_needlets()) throw DimensionMismatch("coefficient count differs from needlet count");
  const auto psi = needlet_values(frame, theta);
  return std::inner_product(beta.begin(), beta.end(), psi.begin(), 0.0);
}

}  // namespace tn
