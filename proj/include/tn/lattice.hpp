#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace tn {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A frequency n = (n_1, ..., n_q) in Z^q.
struct MultiIndex {
  std::vector<int> components;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> c) : components(std::move(c)) {}
  MultiIndex(std::initializer_list<int> c) : components(c) {}

  int dim() const { return static_cast<int>(components.size()); }
  int operator[](int i) const { return components[static_cast<std::size_t>(i)]; }
  std::span<const int> view() const { return components; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

MultiIndex operator-(const MultiIndex& a, const MultiIndex& b);
MultiIndex operator-(const MultiIndex& a);

/// Laplace-Beltrami eigenvalue ell_n = ||n||_2 of the torus harmonic s_n.
double eigenvalue(std::span<const int> n);
inline double eigenvalue(const MultiIndex& n) { return eigenvalue(n.view()); }

/// Geodesic distance on T^q between two points of [0, 2pi)^q.
double torus_distance(std::span<const double> a, std::span<const double> b);

/// Row-major indexing of the integer box [-radius, radius]^q.
class LatticeBox {
 public:
  LatticeBox() = default;
  LatticeBox(int q, int radius);

  int dim() const { return q_; }
  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }
  std::size_t size() const { return size_; }

  bool contains(std::span<const int> n) const;
  /// Requires contains(n).
  std::size_t offset(std::span<const int> n) const;
  /// Inverse of offset().
  void index_at(std::size_t offset, std::span<int> out) const;
  MultiIndex index_at(std::size_t offset) const;

 private:
  int q_ = 0;
  int radius_ = 0;
  std::size_t size_ = 0;
};

}  // namespace tn
