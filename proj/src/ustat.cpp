#include "tn/ustat.hpp"

#include <cmath>
#include <numeric>

#include "detail.hpp"
#include "tn/errors.hpp"

namespace tn {

namespace {

void check_samples(const NeedletFrame& frame, const PointSample& s1, const PointSample& s2) {
  if (s1.dim() != frame.dim() || s2.dim() != frame.dim())
    throw DimensionMismatch("sample dimension differs from frame dimension");
  if (s1.label() != 1 || s2.label() != 2)
    throw InvalidArgument("samples must carry labels 1 and 2");
}

void check_point(const NeedletFrame& frame, const LabeledPoint& p) {
  if (static_cast<int>(p.theta.size()) != frame.dim())
    throw DimensionMismatch("point dimension differs from frame dimension");
  if (p.label != 1 && p.label != 2) throw InvalidArgument("point label must be 1 or 2");
}

// Adds sign * sum_{x in sample} e^{i <n, x>} to acc[n] for every shell n.
void accumulate_transform(const NeedletFrame& frame, const PointSample& sample, double sign,
                          std::vector<std::complex<double>>& acc) {
  const int q = frame.dim();
  const auto uq = static_cast<std::size_t>(q);
  const int r = frame.shell_radius();
  const auto side = static_cast<std::size_t>(2 * r + 1);
  const auto flat = frame.shell_flat();
  std::vector<std::complex<double>> tables(side * uq);
  for (std::size_t p = 0; p < sample.size(); ++p) {
    const auto x = sample.point(p);
    for (std::size_t d = 0; d < uq; ++d)
      detail::phase_table(x[d], r, std::span(tables).subspan(d * side, side));
    for (std::size_t i = 0; i < frame.shell_size(); ++i) {
      std::complex<double> z = tables[static_cast<std::size_t>(flat[i * uq] + r)];
      for (std::size_t d = 1; d < uq; ++d) z *= tables[d * side + static_cast<std::size_t>(flat[i * uq + d] + r)];
      acc[i] += sign * z;
    }
  }
}

// sum_n w_n e^{i <n, x - y>} (complex).
std::complex<double> kernel_sum(const NeedletFrame& frame, std::span<const double> x,
                                std::span<const double> y) {
  const int q = frame.dim();
  const auto uq = static_cast<std::size_t>(q);
  const auto flat = frame.shell_flat();
  const auto w = frame.spectral_weights();
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < frame.shell_size(); ++i) {
    double phase = 0.0;
    for (std::size_t d = 0; d < uq; ++d) phase += flat[i * uq + d] * (x[d] - y[d]);
    acc += w[i] * std::polar(1.0, phase);
  }
  return acc;
}

}  // namespace

double compute_U(const NeedletFrame& frame, const PointSample& sample1, const PointSample& sample2) {
  check_samples(frame, sample1, sample2);
  std::vector<std::complex<double>> T(frame.shell_size());
  accumulate_transform(frame, sample1, 1.0, T);
  accumulate_transform(frame, sample2, -1.0, T);
  const auto w = frame.spectral_weights();
  double quad = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) quad += w[i] * std::norm(T[i]);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const auto total = static_cast<double>(sample1.size() + sample2.size());
  return std::pow(kTwoPi, -frame.dim()) * (quad - total * wsum);
}

double compute_U_needlet_sum(const NeedletFrame& frame, const PointSample& sample1,
                             const PointSample& sample2) {
  check_samples(frame, sample1, sample2);
  const std::size_t K = frame.num_needlets();
  std::vector<double> diff(K, 0.0);
  std::vector<double> diag(K, 0.0);
  auto add = [&](const PointSample& s, double sign) {
    for (std::size_t p = 0; p < s.size(); ++p) {
      const auto psi = needlet_values(frame, s.point(p));
      for (std::size_t k = 0; k < K; ++k) {
        diff[k] += sign * psi[k];
        diag[k] += psi[k] * psi[k];
      }
    }
  };
  add(sample1, 1.0);
  add(sample2, -1.0);
  double u = 0.0;
  for (std::size_t k = 0; k < K; ++k) u += diff[k] * diff[k] - diag[k];
  return u;
}

double kernel_h(const NeedletFrame& frame, const LabeledPoint& p1, const LabeledPoint& p2) {
  check_point(frame, p1);
  check_point(frame, p2);
  const auto v = kernel_sum(frame, p1.theta, p2.theta) * std::pow(kTwoPi, -frame.dim());
  if (std::abs(v.imag()) > 1e-10) throw NumericalError("kernel has a non-real value");
  return (p1.label == p2.label ? 1.0 : -1.0) * v.real();
}

double kernel_h_needlet_sum(const NeedletFrame& frame, const LabeledPoint& p1,
                            const LabeledPoint& p2) {
  check_point(frame, p1);
  check_point(frame, p2);
  const auto a = needlet_values(frame, p1.theta);
  const auto b = needlet_values(frame, p2.theta);
  const double s = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  return (p1.label == p2.label ? 1.0 : -1.0) * s;
}

double double_integral_oracle(const NeedletFrame& frame, const HarmonicDensity& f1,
                              const HarmonicDensity& f2, double intensity,
                              const PointSample& sample1, const PointSample& sample2) {
  check_samples(frame, sample1, sample2);
  if (f1.dim() != frame.dim() || f2.dim() != frame.dim())
    throw DimensionMismatch("density dimension differs from frame dimension");
  const int q = frame.dim();
  const double norm = std::pow(kTwoPi, -q);

  // Off-diagonal atom sum, pair by pair.
  struct Atom {
    std::span<const double> x;
    double sign;
  };
  std::vector<Atom> atoms;
  for (std::size_t p = 0; p < sample1.size(); ++p) atoms.push_back({sample1.point(p), 1.0});
  for (std::size_t p = 0; p < sample2.size(); ++p) atoms.push_back({sample2.point(p), -1.0});
  double pairs = 0.0;
  for (std::size_t a = 0; a < atoms.size(); ++a)
    for (std::size_t b = a + 1; b < atoms.size(); ++b)
      pairs += 2.0 * atoms[a].sign * atoms[b].sign * norm * kernel_sum(frame, atoms[a].x, atoms[b].x).real();

  // H(p) = R sign_p sum_n w_n s_n(x_p) (a1_n - a2_n); C = R^2 sum_n w_n |a1_n - a2_n|^2.
  const auto w = frame.spectral_weights();
  const auto& shell = frame.shell();
  std::vector<std::complex<double>> delta(frame.shell_size());
  double C = 0.0;
  for (std::size_t i = 0; i < frame.shell_size(); ++i) {
    delta[i] = f1.coeff(shell[i]) - f2.coeff(shell[i]);
    C += w[i] * std::norm(delta[i]);
  }
  C *= intensity * intensity;
  double H = 0.0;
  for (const auto& atom : atoms) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < frame.shell_size(); ++i) s += w[i] * basis_eval(shell[i], atom.x) * delta[i];
    H += atom.sign * intensity * s.real();
  }
  return pairs - 2.0 * H + C;
}

double double_integral_oracle(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                              const PointSample& sample1, const PointSample& sample2) {
  return double_integral_oracle(frame, f, f, intensity, sample1, sample2);
}

double analytic_variance(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                         SumPath path) {
  if (f.dim() != frame.dim()) throw DimensionMismatch("density and frame dimensions differ");
  const int r = frame.shell_radius();
  if (f.bandlimit() < 2 * r)
    throw InsufficientBandlimit("density bandlimit must reach twice the shell radius");
  const int q = frame.dim();
  const auto w = frame.spectral_weights();
  const std::size_t S = frame.shell_size();
  if (path == SumPath::Auto) path = S * S <= 10'000'000 ? SumPath::Direct : SumPath::Convolution;

  double sum = 0.0;
  if (path == SumPath::Direct) {
    const auto& shell = frame.shell();
    for (std::size_t i = 0; i < S; ++i) {
      double row = 0.0;
      for (std::size_t k = 0; k < S; ++k) row += w[k] * std::norm(f.coeff(shell[i] - shell[k]));
      sum += w[i] * row;
    }
  } else {
    const int side = 4 * r + 1;
    const auto g = detail::shell_autocorrelation(frame, w, side);
    const auto a = detail::place_coeffs(f, 2 * r, side);
    for (std::size_t m = 0; m < g.size(); ++m) sum += g[m].real() * std::norm(a[m]);
  }
  return 8.0 * intensity * intensity * std::pow(kTwoPi, -q) * sum;
}

double normalize(double u, double variance) {
  if (!(variance > 0.0)) throw NonpositiveVariance("variance must be > 0");
  return u / std::sqrt(variance);
}

UStatResult evaluate_ustat(const NeedletFrame& frame, const HarmonicDensity& f, double intensity,
                           const PointSample& sample1, const PointSample& sample2) {
  UStatResult r;
  r.u_value = compute_U(frame, sample1, sample2);
  r.variance = analytic_variance(frame, f, intensity);
  r.normalized = normalize(r.u_value, r.variance);
  r.j = frame.level();
  r.B = frame.scale();
  r.intensity = intensity;
  return r;
}

}  // namespace tn
