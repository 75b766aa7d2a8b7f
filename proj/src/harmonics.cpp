#include "tn/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "detail.hpp"
#include "tn/errors.hpp"

namespace tn {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Cond1: return "cond1";
    case Condition::Cond2: return "cond2";
    case Condition::Custom: return "custom";
  }
  return "custom";
}

Condition parse_condition(std::string_view s) {
  if (s == "cond1" || s == "1" || s == "Cond1") return Condition::Cond1;
  if (s == "cond2" || s == "2" || s == "Cond2") return Condition::Cond2;
  if (s == "custom" || s == "Custom") return Condition::Custom;
  throw ParseError("unknown condition '" + std::string(s) + "'");
}

double zero_mode(int q) { return std::pow(kTwoPi, -0.5 * q); }

std::complex<double> basis_eval(std::span<const int> n, std::span<const double> theta) {
  if (n.size() != theta.size()) throw DimensionMismatch("basis_eval: |n| != |theta|");
  double phase = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) phase += n[i] * theta[i];
  return zero_mode(static_cast<int>(n.size())) * std::polar(1.0, phase);
}

namespace {

double unit_coefficient(std::span<const int> n, double alpha, Condition condition) {
  if (condition == Condition::Cond1) return std::pow(eigenvalue(n) + 1.0, -alpha);
  double p = 1.0;
  for (int c : n) p *= std::pow(std::abs(c) + 1.0, -alpha);
  return p;
}

void check_decay_args(int q, double alpha, int bandlimit, Condition condition) {
  if (q < 1) throw InvalidArgument("dimension q must be >= 1");
  if (!(alpha >= 0.5)) throw InvalidAlpha("alpha must be >= 1/2");
  if (bandlimit < 1) throw InvalidArgument("bandlimit must be >= 1");
  if (condition == Condition::Custom) throw InvalidArgument("condition must be cond1 or cond2");
}

// Complex sum_n a_n s_n(theta) over the retained box.
std::complex<double> synthesize(const HarmonicDensity& f, std::span<const double> theta) {
  const int q = f.dim();
  const int L = f.bandlimit();
  const auto side = static_cast<std::size_t>(2 * L + 1);
  std::vector<std::complex<double>> tables(side * static_cast<std::size_t>(q));
  for (int d = 0; d < q; ++d)
    detail::phase_table(theta[static_cast<std::size_t>(d)], L,
                        std::span(tables).subspan(static_cast<std::size_t>(d) * side, side));

  // Contract the box one coordinate at a time, last coordinate first.
  std::vector<std::complex<double>> cur(f.coeffs().begin(), f.coeffs().end());
  for (int d = q - 1; d >= 0; --d) {
    const std::size_t outer = cur.size() / side;
    const auto* tab = tables.data() + static_cast<std::size_t>(d) * side;
    std::vector<std::complex<double>> next(outer);
    for (std::size_t o = 0; o < outer; ++o) {
      std::complex<double> acc = 0.0;
      const auto* row = cur.data() + o * side;
      for (std::size_t i = 0; i < side; ++i) acc += row[i] * tab[i];
      next[o] = acc;
    }
    cur.swap(next);
  }
  return cur[0] * zero_mode(q);
}

}  // namespace

std::complex<double> HarmonicDensity::coeff(std::span<const int> n) const {
  if (!box_.contains(n)) return 0.0;
  return coeffs_[box_.offset(n)];
}

HarmonicDensity HarmonicDensity::from_coefficients(int q, int bandlimit,
                                                   std::vector<std::complex<double>> coeffs,
                                                   Condition condition, double alpha, double c) {
  HarmonicDensity f;
  f.box_ = LatticeBox(q, bandlimit);
  if (coeffs.size() != f.box_.size())
    throw InvalidDensity("coefficient table does not match the bandlimit box");
  f.coeffs_ = std::move(coeffs);
  f.condition_ = condition;
  f.alpha_ = alpha;
  f.c_ = c;

  double amax = 0.0;
  for (const auto& a : f.coeffs_) amax = std::max(amax, std::abs(a));
  const std::size_t center = f.box_.size() / 2;  // offset of n = 0
  const double a0 = zero_mode(q);
  if (std::abs(f.coeffs_[center] - a0) > 1e-12 * a0)
    throw InvalidDensity("a_0 must equal (2pi)^{-q/2} for a probability density");
  // Reversing the row-major box maps n to -n.
  for (std::size_t i = 0; i < f.box_.size(); ++i) {
    const auto& a = f.coeffs_[i];
    const auto& b = f.coeffs_[f.box_.size() - 1 - i];
    if (std::abs(b - std::conj(a)) > 1e-12 * amax)
      throw InvalidDensity("coefficients are not Hermitian; density would not be real");
  }

  const int side = std::max(kScanOversample * bandlimit, 2 * bandlimit + 1);
  const auto grid = density_on_grid(f, side);
  const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
  f.grid_min_ = *mn;
  f.grid_max_ = *mx;
  if (f.grid_min_ <= kPositivityFloor) {
    std::ostringstream msg;
    msg << "density minimum " << f.grid_min_ << " on the scan grid is below the positivity floor "
        << kPositivityFloor;
    throw PositivityViolation(msg.str());
  }
  return f;
}

double default_scale(int q, double alpha, int bandlimit, Condition condition) {
  check_decay_args(q, alpha, bandlimit, condition);
  const LatticeBox box(q, bandlimit);
  std::vector<int> n(static_cast<std::size_t>(q));
  double total = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    box.index_at(i, n);
    if (std::all_of(n.begin(), n.end(), [](int c) { return c == 0; })) continue;
    total += unit_coefficient(n, alpha, condition);
  }
  return 0.8 * zero_mode(q) / total;
}

HarmonicDensity make_density(int q, double alpha, double c, int bandlimit, Condition condition) {
  check_decay_args(q, alpha, bandlimit, condition);
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("scale c must be finite and >= 0");
  const LatticeBox box(q, bandlimit);
  std::vector<std::complex<double>> coeffs(box.size());
  std::vector<int> n(static_cast<std::size_t>(q));
  for (std::size_t i = 0; i < box.size(); ++i) {
    box.index_at(i, n);
    coeffs[i] = c * unit_coefficient(n, alpha, condition);
  }
  coeffs[box.size() / 2] = zero_mode(q);
  return HarmonicDensity::from_coefficients(q, bandlimit, std::move(coeffs), condition, alpha, c);
}

HarmonicDensity uniform_density(int q, int bandlimit) {
  const LatticeBox box(q, bandlimit);
  std::vector<std::complex<double>> coeffs(box.size());
  coeffs[box.size() / 2] = zero_mode(q);
  return HarmonicDensity::from_coefficients(q, bandlimit, std::move(coeffs));
}

double density_eval(const HarmonicDensity& f, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != f.dim())
    throw DimensionMismatch("density_eval: point dimension differs from density");
  const auto v = synthesize(f, theta);
  if (std::abs(v.imag()) > 1e-10) throw NumericalError("density has a non-real value");
  return v.real();
}

void density_eval_batch(const HarmonicDensity& f, std::span<const double> points,
                        std::span<double> out) {
  const int q = f.dim();
  const std::size_t count = points.size() / static_cast<std::size_t>(q);
  if (out.size() < count) throw InvalidArgument("density_eval_batch: output too small");
  if (q != 1) {
    for (std::size_t p = 0; p < count; ++p)
      out[p] = synthesize(f, points.subspan(p * static_cast<std::size_t>(q), static_cast<std::size_t>(q))).real();
    return;
  }
  // q = 1 with Hermitian coefficients:
  // f = (2pi)^{-1/2} [a_0 + 2 sum_{n>0} (Re a_n cos n theta - Im a_n sin n theta)].
  const int L = f.bandlimit();
  const auto coeffs = f.coeffs();
  const double norm = zero_mode(1);
  constexpr std::size_t kBlock = 256;
  double c[kBlock], s[kBlock], cb[kBlock], sb[kBlock], acc[kBlock];
  for (std::size_t start = 0; start < count; start += kBlock) {
    const std::size_t m = std::min(kBlock, count - start);
    for (std::size_t i = 0; i < m; ++i) {
      cb[i] = std::cos(points[start + i]);
      sb[i] = std::sin(points[start + i]);
      c[i] = 1.0;
      s[i] = 0.0;
      acc[i] = 0.0;
    }
    for (int n = 1; n <= L; ++n) {
      const double ar = coeffs[static_cast<std::size_t>(L + n)].real();
      const double ai = coeffs[static_cast<std::size_t>(L + n)].imag();
      if (n % 64 == 0) {
        for (std::size_t i = 0; i < m; ++i) {
          c[i] = std::cos(n * points[start + i]);
          s[i] = std::sin(n * points[start + i]);
        }
      } else {
        for (std::size_t i = 0; i < m; ++i) {
          const double cn = c[i] * cb[i] - s[i] * sb[i];
          s[i] = s[i] * cb[i] + c[i] * sb[i];
          c[i] = cn;
        }
      }
      for (std::size_t i = 0; i < m; ++i) acc[i] += ar * c[i] - ai * s[i];
    }
    const double a0 = coeffs[static_cast<std::size_t>(L)].real();
    for (std::size_t i = 0; i < m; ++i) out[start + i] = norm * (a0 + 2.0 * acc[i]);
  }
}

std::vector<double> density_on_grid(const HarmonicDensity& f, int side) {
  const int q = f.dim();
  const int L = f.bandlimit();
  if (side <= 2 * L) throw InvalidArgument("grid side must exceed twice the bandlimit");
  std::size_t total = 1;
  for (int d = 0; d < q; ++d) total *= static_cast<std::size_t>(side);
  std::vector<std::complex<double>> buf(total);
  std::vector<int> n(static_cast<std::size_t>(q));
  const auto coeffs = f.coeffs();
  for (std::size_t i = 0; i < f.box().size(); ++i) {
    f.box().index_at(i, n);
    buf[detail::wrapped_offset(n, side)] = coeffs[i];
  }
  detail::fft_cube(buf, q, side, detail::FftSign::Backward);
  std::vector<double> values(total);
  const double norm = zero_mode(q);
  for (std::size_t i = 0; i < total; ++i) values[i] = norm * buf[i].real();
  return values;
}

double density_sup(const HarmonicDensity& f, double margin) {
  return (1.0 + margin) * f.grid_max();
}

void write_coefficients(std::ostream& os, const HarmonicDensity& f) {
  const auto old_prec = os.precision(17);
  std::vector<int> n(static_cast<std::size_t>(f.dim()));
  const auto coeffs = f.coeffs();
  for (std::size_t i = 0; i < f.box().size(); ++i) {
    f.box().index_at(i, n);
    for (int c : n) os << c << ' ';
    os << coeffs[i].real() << ' ' << coeffs[i].imag() << '\n';
  }
  os.precision(old_prec);
}

HarmonicDensity read_coefficients(std::istream& is) {
  std::map<std::vector<int>, std::complex<double>> rows;
  std::string line;
  int q = -1;
  int L = 0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> fields;
    for (double v; ls >> v;) fields.push_back(v);
    if (!ls.eof()) throw ParseError("coefficient table: bad token on line " + std::to_string(lineno));
    if (fields.empty()) continue;
    if (fields.size() < 3) throw ParseError("coefficient table: too few columns on line " + std::to_string(lineno));
    const int cols = static_cast<int>(fields.size()) - 2;
    if (q < 0) q = cols;
    if (cols != q) throw ParseError("coefficient table: inconsistent column count on line " + std::to_string(lineno));
    std::vector<int> n(static_cast<std::size_t>(q));
    for (int d = 0; d < q; ++d) {
      const double v = fields[static_cast<std::size_t>(d)];
      if (v != std::floor(v)) throw ParseError("coefficient table: non-integer index on line " + std::to_string(lineno));
      n[static_cast<std::size_t>(d)] = static_cast<int>(v);
      L = std::max(L, std::abs(n[static_cast<std::size_t>(d)]));
    }
    const std::complex<double> a(fields[static_cast<std::size_t>(q)], fields[static_cast<std::size_t>(q) + 1]);
    if (!rows.emplace(std::move(n), a).second)
      throw ParseError("coefficient table: duplicate index on line " + std::to_string(lineno));
  }
  if (q < 1) throw ParseError("coefficient table is empty");
  L = std::max(L, 1);
  const LatticeBox box(q, L);
  std::vector<std::complex<double>> coeffs(box.size());
  for (const auto& [n, a] : rows) coeffs[box.offset(n)] = a;
  return HarmonicDensity::from_coefficients(q, L, std::move(coeffs));
}

}  // namespace tn
