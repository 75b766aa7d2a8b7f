#include "tn/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "tn/errors.hpp"

namespace tn {

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("multi-index dimensions differ");
  MultiIndex r;
  r.components.resize(a.components.size());
  std::transform(a.components.begin(), a.components.end(), b.components.begin(),
                 r.components.begin(), std::minus<>());
  return r;
}

MultiIndex operator-(const MultiIndex& a) {
  MultiIndex r = a;
  for (int& c : r.components) c = -c;
  return r;
}

double eigenvalue(std::span<const int> n) {
  double s = 0.0;
  for (int c : n) s += static_cast<double>(c) * c;
  return std::sqrt(s);
}

double torus_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("point dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::fmod(std::abs(a[i] - b[i]), kTwoPi);
    d = std::min(d, kTwoPi - d);
    s += d * d;
  }
  return std::sqrt(s);
}

LatticeBox::LatticeBox(int q, int radius) : q_(q), radius_(radius), size_(1) {
  if (q < 1) throw InvalidArgument("lattice dimension must be >= 1");
  if (radius < 0) throw InvalidArgument("lattice radius must be >= 0");
  for (int i = 0; i < q; ++i) size_ *= static_cast<std::size_t>(side());
}

bool LatticeBox::contains(std::span<const int> n) const {
  if (static_cast<int>(n.size()) != q_) return false;
  return std::all_of(n.begin(), n.end(), [r = radius_](int c) { return c >= -r && c <= r; });
}

std::size_t LatticeBox::offset(std::span<const int> n) const {
  std::size_t off = 0;
  const auto s = static_cast<std::size_t>(side());
  for (int c : n) off = off * s + static_cast<std::size_t>(c + radius_);
  return off;
}

void LatticeBox::index_at(std::size_t offset, std::span<int> out) const {
  const auto s = static_cast<std::size_t>(side());
  for (int d = q_ - 1; d >= 0; --d) {
    out[static_cast<std::size_t>(d)] = static_cast<int>(offset % s) - radius_;
    offset /= s;
  }
}

MultiIndex LatticeBox::index_at(std::size_t offset) const {
  MultiIndex n;
  n.components.resize(static_cast<std::size_t>(q_));
  index_at(offset, n.components);
  return n;
}

}  // namespace tn
