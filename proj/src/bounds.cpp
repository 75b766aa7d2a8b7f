#include "tn/bounds.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "detail.hpp"
#include "tn/errors.hpp"

namespace tn {

namespace {

struct RawSums {
  double variance = 0.0;  // sum_m g(m) |a_m|^2
  double l4 = 0.0;        // sum w1..w4 |a_{n1-n2+n3-n4}|^2
  double star21 = 0.0;    // sum w1..w4 a_{n1-n2} a_{n3-n4} conj(a_{n1-n2+n3-n4})
  double star11 = 0.0;    // sum w1..w4 a_{n1-n2} conj(a_{n3-n4}) a_{n3-n1} a_{n2-n4}
};

// Row-major offsets of the shell inside the box of radius 4r, relative to
// its center, so a difference of shell indices is a difference of offsets.
std::vector<std::ptrdiff_t> shell_offsets(const NeedletFrame& frame, int side) {
  const auto uq = static_cast<std::size_t>(frame.dim());
  const auto flat = frame.shell_flat();
  std::vector<std::ptrdiff_t> off(frame.shell_size());
  for (std::size_t i = 0; i < off.size(); ++i) {
    std::ptrdiff_t o = 0;
    for (std::size_t d = 0; d < uq; ++d) o = o * side + flat[i * uq + d];
    off[i] = o;
  }
  return off;
}

RawSums direct_sums(const NeedletFrame& frame, const HarmonicDensity& f, std::span<const double> w) {
  const int r = frame.shell_radius();
  const LatticeBox box(frame.dim(), 4 * r);
  std::vector<std::complex<double>> a(box.size());
  std::vector<int> m(static_cast<std::size_t>(frame.dim()));
  for (std::size_t i = 0; i < box.size(); ++i) {
    box.index_at(i, m);
    a[i] = f.coeff(m);
  }
  const auto center = static_cast<std::ptrdiff_t>(box.size() / 2);
  const auto off = shell_offsets(frame, box.side());
  const std::size_t S = off.size();
  auto at = [&](std::ptrdiff_t o) { return a[static_cast<std::size_t>(center + o)]; };

  RawSums s;
  for (std::size_t i1 = 0; i1 < S; ++i1)
    for (std::size_t i2 = 0; i2 < S; ++i2) s.variance += w[i1] * w[i2] * std::norm(at(off[i1] - off[i2]));

  for (std::size_t i1 = 0; i1 < S; ++i1) {
    double l4 = 0.0;
    std::complex<double> s21 = 0.0, s11 = 0.0;
    for (std::size_t i2 = 0; i2 < S; ++i2) {
      const double w12 = w[i1] * w[i2];
      const auto a12 = at(off[i1] - off[i2]);
      for (std::size_t i3 = 0; i3 < S; ++i3) {
        const double w123 = w12 * w[i3];
        const auto a31 = at(off[i3] - off[i1]);
        for (std::size_t i4 = 0; i4 < S; ++i4) {
          const double ww = w123 * w[i4];
          const auto a34 = at(off[i3] - off[i4]);
          const auto sum = at(off[i1] - off[i2] + off[i3] - off[i4]);
          l4 += ww * std::norm(sum);
          s21 += ww * a12 * a34 * std::conj(sum);
          s11 += ww * a12 * std::conj(a34) * a31 * at(off[i2] - off[i4]);
        }
      }
    }
    s.l4 += l4;
    s.star21 += s21.real();
    s.star11 += s11.real();
  }
  return s;
}

RawSums convolution_sums(const NeedletFrame& frame, const HarmonicDensity& f,
                         std::span<const double> w) {
  const int q = frame.dim();
  const int r = frame.shell_radius();
  const int side = 8 * r + 1;
  std::vector<std::complex<double>> spectrum;
  const auto g = detail::shell_autocorrelation(frame, w, side, &spectrum);
  const auto a = detail::place_coeffs(f, 4 * r, side);
  const double inv = 1.0 / static_cast<double>(g.size());

  RawSums s;
  for (std::size_t m = 0; m < g.size(); ++m) s.variance += g[m].real() * std::norm(a[m]);

  // (g * g)^ = g^^2.
  auto gg = spectrum;
  for (auto& v : gg) v *= v;
  detail::fft_cube(gg, q, side, detail::FftSign::Backward);
  for (std::size_t k = 0; k < gg.size(); ++k) s.l4 += gg[k].real() * inv * std::norm(a[k]);

  // sum_{m1, m2} (g a)(m1) (g a)(m2) conj(a_{m1 + m2}).
  std::vector<std::complex<double>> ga(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) ga[m] = g[m].real() * a[m];
  detail::fft_cube(ga, q, side, detail::FftSign::Forward);
  for (auto& v : ga) v *= v;
  detail::fft_cube(ga, q, side, detail::FftSign::Backward);
  std::complex<double> s21 = 0.0;
  for (std::size_t k = 0; k < ga.size(); ++k) s21 += ga[k] * inv * std::conj(a[k]);
  s.star21 = s21.real();

  // The four-cycle sum is tr((D A)^4) with A_{n n'} = a_{n - n'} Hermitian;
  // with M = D^1/2 A D^1/2 it equals ||M^2||_F^2.
  const auto& shell = frame.shell();
  const auto S = static_cast<Eigen::Index>(frame.shell_size());
  Eigen::MatrixXcd M(S, S);
  for (Eigen::Index i = 0; i < S; ++i)
    for (Eigen::Index k = 0; k < S; ++k)
      M(i, k) = std::sqrt(w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(k)]) *
                f.coeff(shell[static_cast<std::size_t>(i)] - shell[static_cast<std::size_t>(k)]);
  const Eigen::MatrixXcd M2 = M * M;
  s.star11 = M2.squaredNorm();
  return s;
}

double checked_nonnegative(double v, double scale, const char* what) {
  if (v >= 0.0) return v;
  if (v < -1e-10 * scale) {
    std::ostringstream msg;
    msg << what << " came out negative (" << v << ")";
    throw NumericalError(msg.str());
  }
  return 0.0;
}

}  // namespace

ContractionNorms contraction_norms(const NeedletFrame& frame, const HarmonicDensity& f,
                                   double intensity, const ContractionOptions& options) {
  if (f.dim() != frame.dim()) throw DimensionMismatch("density and frame dimensions differ");
  const int r = frame.shell_radius();
  if (f.bandlimit() < 4 * r)
    throw InsufficientBandlimit("density bandlimit must reach four times the shell radius");
  if (!(intensity > 0.0)) throw InvalidArgument("intensity must be > 0");

  std::vector<double> w(frame.spectral_weights().begin(), frame.spectral_weights().end());
  for (double& v : w) v *= options.kernel_scale;

  const auto S = static_cast<double>(frame.shell_size());
  const bool direct_ok = S * S * S * S <= static_cast<double>(options.direct_term_cap);
  const double grid_bytes = static_cast<double>(detail::cube_size(frame.dim(), 8 * r + 1)) * 16.0 * 6.0;
  const double matrix_bytes = S * S * 16.0 * 3.0;
  const bool conv_ok = grid_bytes + matrix_bytes <= static_cast<double>(options.memory_cap_bytes);

  SumPath path = options.path;
  if (path == SumPath::Auto) path = conv_ok ? SumPath::Convolution : SumPath::Direct;
  if (path == SumPath::Direct && !direct_ok)
    throw ShellTooLarge("shell too large for the direct four-fold sum");
  if (path == SumPath::Convolution && !conv_ok)
    throw ShellTooLarge("convolution path exceeds the memory cap");

  const RawSums s = path == SumPath::Direct ? direct_sums(frame, f, w) : convolution_sums(frame, f, w);

  const int q = frame.dim();
  const double R = intensity;
  ContractionNorms n;
  n.variance = 8.0 * R * R * std::pow(kTwoPi, -q) * s.variance;
  const double scale = n.variance * n.variance;
  n.l4_fourth = checked_nonnegative(4.0 * R * R * std::pow(kTwoPi, -3 * q) * s.l4, scale, "L4 norm");
  n.star21_sq = checked_nonnegative(8.0 * R * R * R * std::pow(kTwoPi, -2.5 * q) * s.star21, scale,
                                    "(2,1) contraction norm");
  n.star11_sq = checked_nonnegative(16.0 * R * R * R * R * std::pow(kTwoPi, -2 * q) * s.star11, scale,
                                    "(1,1) contraction norm");
  return n;
}

BoundTerms bound_terms(const ContractionNorms& norms) {
  if (!(norms.variance > 0.0)) throw NonpositiveVariance("variance must be > 0");
  BoundTerms t;
  t.star11 = kStar11Constant * std::sqrt(norms.star11_sq) / norms.variance;
  t.star21 = kStar21Constant * std::sqrt(norms.star21_sq) / norms.variance;
  t.l4 = kL4Constant * std::sqrt(norms.l4_fourth) / norms.variance;
  return t;
}

double wasserstein_bound(const ContractionNorms& norms) { return bound_terms(norms).total(); }

std::string_view to_string(Regime r) {
  return r == Regime::AlphaAtLeastOne ? "alpha_ge_1" : "alpha_lt_1";
}

Regime regime_for(double alpha) {
  if (!(alpha >= 0.5)) throw InvalidAlpha("alpha must be >= 1/2");
  return alpha >= 1.0 ? Regime::AlphaAtLeastOne : Regime::AlphaBelowOne;
}

EnvelopeTerms envelope_terms(int q, double B, int j, double intensity, double alpha,
                             Condition condition) {
  if (!(alpha >= 0.5)) throw InvalidAlpha("alpha must be >= 1/2");
  if (!(intensity > 0.0)) throw InvalidArgument("intensity must be > 0");
  if (!(B > 1.0)) throw InvalidArgument("B must be > 1");
  const double J = condition == Condition::Cond2 ? static_cast<double>(j) * q : static_cast<double>(j);
  const double root = 1.0 / std::sqrt(intensity);
  EnvelopeTerms e;
  e.first = root * std::pow(B, J / 4.0);
  if (alpha >= 1.0) {
    e.second = root;
    e.third = std::pow(B, -J / 2.0);
  } else {
    e.second = root * std::pow(B, J * (1.0 - alpha));
    e.third = std::pow(B, J * (1.0 - 2.0 * alpha));
  }
  return e;
}

double rate_envelope(int q, double B, int j, double intensity, double alpha, Condition condition) {
  return envelope_terms(q, B, j, intensity, alpha, condition).total();
}

double clt_quantity(int q, double B, int j, double intensity, double alpha, Condition condition) {
  if (!(alpha >= 0.5)) throw InvalidAlpha("alpha must be >= 1/2");
  const double J = condition == Condition::Cond2 ? static_cast<double>(j) * q : static_cast<double>(j);
  return std::pow(intensity, -0.5) * std::pow(B, J * std::max(0.25, 1.0 - alpha));
}

bool clt_condition(int q, double B, std::span<const int> levels,
                   std::span<const double> intensities, double alpha, Condition condition) {
  if (levels.size() != intensities.size() || levels.size() < 2)
    throw InvalidArgument("clt_condition needs two or more paired (j, R) values");
  double prev = clt_quantity(q, B, levels[0], intensities[0], alpha, condition);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double cur = clt_quantity(q, B, levels[i], intensities[i], alpha, condition);
    if (!(cur < prev)) return false;
    prev = cur;
  }
  return true;
}

BoundReport bound_report(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                         const ContractionOptions& options) {
  BoundReport r;
  r.norms = contraction_norms(frame, f, intensity, options);
  r.terms = bound_terms(r.norms);
  r.wasserstein_bound = r.terms.total();
  r.q = frame.dim();
  r.B = frame.scale();
  r.j = frame.level();
  r.intensity = intensity;
  r.condition = f.condition() == Condition::Custom ? Condition::Cond1 : f.condition();
  // A density without a decay model (e.g. uniform) is treated as arbitrarily smooth.
  r.alpha = f.condition() == Condition::Custom ? std::max(f.alpha(), 1.0) : f.alpha();
  r.regime = regime_for(r.alpha);
  r.envelope = envelope_terms(r.q, r.B, r.j, intensity, r.alpha, r.condition);
  r.rate_envelope = r.envelope.total();
  return r;
}

}  // namespace tn
