#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "tn/harmonics.hpp"

namespace tn {

/// Identifies an independent random stream: (base seed, replica, substream).
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::uint64_t substream = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Mixes a key into a 64-bit engine seed (splitmix64 finalizer chain).
std::uint64_t stream_seed(const StreamKey& key);

/// A mt19937_64 engine seeded deterministically from a StreamKey.
class RngStream {
 public:
  explicit RngStream(const StreamKey& key) : key_(key), engine_(stream_seed(key)) {}

  const StreamKey& key() const { return key_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  StreamKey key_;
  std::mt19937_64 engine_;
};

/// Realized Poisson points on one labeled copy of T^q.
class PointSample {
 public:
  PointSample(int label, int q, double intensity, StreamKey trace, std::vector<double> coords);

  int label() const { return label_; }
  int dim() const { return q_; }
  double intensity() const { return intensity_; }
  const StreamKey& seed_trace() const { return trace_; }

  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(q_); }
  bool empty() const { return coords_.empty(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * static_cast<std::size_t>(q_),
                                                    static_cast<std::size_t>(q_));
  }
  /// size() * dim() coordinates, point-major.
  std::span<const double> coords() const { return coords_; }

 private:
  int label_;
  int q_;
  double intensity_;
  StreamKey trace_;
  std::vector<double> coords_;
};

/// Poisson random measure with control R_t f(theta) dtheta: N ~ Poisson(R_t)
/// points drawn i.i.d. from f by rejection against the uniform proposal.
/// Throws InvalidArgument, EnvelopeBreach, RejectionStall.
PointSample sample_process(const HarmonicDensity& f, double intensity, int label, RngStream& rng);

/// Two independent processes labeled 1 and 2, drawn from substreams 1 and 2
/// of `key` (key.substream is ignored). Throws DimensionMismatch.
std::pair<PointSample, PointSample> sample_pair(const HarmonicDensity& f1,
                                                const HarmonicDensity& f2, double intensity,
                                                const StreamKey& key);

/// One row per point: `label theta_1 ... theta_q`.
void write_samples(std::ostream& os, std::span<const PointSample> samples);
/// Reads rows back, grouped by label in ascending label order.
std::vector<PointSample> read_samples(std::istream& is, double intensity = 0.0);

}  // namespace tn
