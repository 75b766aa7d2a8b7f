#include <cmath>

#include "tn/errors.hpp"
#include "tn/frame.hpp"

namespace tn {

WindowFunction::WindowFunction(double B, int resolution)
    : B_(B), resolution_(resolution), lo_(1.0 / B), step_(0.0), total_(0.0) {
  if (!(B > 1.0) || !std::isfinite(B)) throw InvalidArgument("window scale B must be > 1");
  if (resolution < 1024) throw InvalidArgument("window resolution must be >= 1024");
  step_ = (1.0 - lo_) / resolution;
  cumulative_.assign(static_cast<std::size_t>(resolution) + 1, 0.0);
  for (int i = 0; i < resolution; ++i) {
    const double a = lo_ + i * step_;
    const double cell = step_ / 6.0 * (bump(a) + 4.0 * bump(a + 0.5 * step_) + bump(a + step_));
    cumulative_[static_cast<std::size_t>(i) + 1] = cumulative_[static_cast<std::size_t>(i)] + cell;
  }
  total_ = cumulative_.back();
}

double WindowFunction::bump(double u) const {
  const double s = 2.0 * (u - lo_) / (1.0 - lo_) - 1.0;
  const double d = 1.0 - s * s;
  if (d <= 0.0) return 0.0;
  return std::exp(-1.0 / d);
}

double WindowFunction::phi(double t) const {
  if (t <= lo_) return 1.0;
  if (t >= 1.0) return 0.0;
  const double x = (t - lo_) / step_;
  auto i = static_cast<std::size_t>(x);
  if (i >= static_cast<std::size_t>(resolution_)) i = static_cast<std::size_t>(resolution_) - 1;
  const double u = x - static_cast<double>(i);
  const double a = lo_ + static_cast<double>(i) * step_;
  const double y0 = cumulative_[i];
  const double y1 = cumulative_[i + 1];
  const double d0 = bump(a) * step_;
  const double d1 = bump(a + step_) * step_;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double integral = (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d0 +
                          (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * d1;
  const double v = 1.0 - integral / total_;
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

double WindowFunction::squared(double x) const {
  if (x <= lo_ || x >= B_) return 0.0;
  const double v = phi(x / B_) - phi(x);
  return v < 0.0 ? 0.0 : v;
}

double WindowFunction::operator()(double x) const { return std::sqrt(squared(x)); }

WindowFunction build_window(double B, int resolution) { return WindowFunction(B, resolution); }

}  // namespace tn
