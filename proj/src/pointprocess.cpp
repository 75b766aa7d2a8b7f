#include "tn/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "tn/errors.hpp"

namespace tn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kMinAcceptance = 1e-4;
constexpr std::size_t kStallCheckAfter = 100000;

}  // namespace

std::uint64_t stream_seed(const StreamKey& key) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ key.replica);
  h = splitmix64(h ^ (key.substream * 0xd1b54a32d192ed03ULL));
  return h;
}

PointSample::PointSample(int label, int q, double intensity, StreamKey trace,
                         std::vector<double> coords)
    : label_(label), q_(q), intensity_(intensity), trace_(trace), coords_(std::move(coords)) {
  if (q < 1) throw InvalidArgument("point dimension must be >= 1");
  if (coords_.size() % static_cast<std::size_t>(q) != 0)
    throw DimensionMismatch("coordinate count is not a multiple of the dimension");
}

PointSample sample_process(const HarmonicDensity& f, double intensity, int label, RngStream& rng) {
  if (!(intensity > 0.0) || !std::isfinite(intensity))
    throw InvalidArgument("intensity must be finite and > 0");
  const int q = f.dim();
  const auto uq = static_cast<std::size_t>(q);
  auto& eng = rng.engine();
  const auto count = static_cast<std::size_t>(std::poisson_distribution<long long>(intensity)(eng));
  const double envelope = density_sup(f);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> coords;
  coords.reserve(count * uq);
  std::vector<double> proposals;
  std::vector<double> heights;
  std::vector<double> values;
  std::size_t proposed = 0;
  while (coords.size() < count * uq) {
    const std::size_t need = count - coords.size() / uq;
    const std::size_t block = std::max<std::size_t>(64, need + need / 4);
    proposals.resize(block * uq);
    heights.resize(block);
    values.resize(block);
    for (std::size_t i = 0; i < block; ++i) {
      for (std::size_t d = 0; d < uq; ++d) proposals[i * uq + d] = angle(eng);
      heights[i] = envelope * unit(eng);
    }
    density_eval_batch(f, proposals, values);
    for (std::size_t i = 0; i < block && coords.size() < count * uq; ++i) {
      if (values[i] > envelope) {
        std::ostringstream msg;
        msg << "density value " << values[i] << " exceeds rejection envelope " << envelope;
        throw EnvelopeBreach(msg.str());
      }
      ++proposed;
      if (heights[i] < values[i])
        coords.insert(coords.end(), proposals.begin() + static_cast<std::ptrdiff_t>(i * uq),
                      proposals.begin() + static_cast<std::ptrdiff_t>((i + 1) * uq));
    }
    if (proposed >= kStallCheckAfter &&
        static_cast<double>(coords.size() / uq) < kMinAcceptance * static_cast<double>(proposed))
      throw RejectionStall("rejection sampler acceptance rate fell below 1e-4");
  }
  return PointSample(label, q, intensity, rng.key(), std::move(coords));
}

std::pair<PointSample, PointSample> sample_pair(const HarmonicDensity& f1,
                                                const HarmonicDensity& f2, double intensity,
                                                const StreamKey& key) {
  if (f1.dim() != f2.dim()) throw DimensionMismatch("the two densities live on different tori");
  RngStream r1({key.seed, key.replica, 1});
  RngStream r2({key.seed, key.replica, 2});
  auto s1 = sample_process(f1, intensity, 1, r1);
  auto s2 = sample_process(f2, intensity, 2, r2);
  return {std::move(s1), std::move(s2)};
}

void write_samples(std::ostream& os, std::span<const PointSample> samples) {
  const auto old_prec = os.precision(17);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << s.label();
      for (double t : s.point(i)) os << ' ' << t;
      os << '\n';
    }
  }
  os.precision(old_prec);
}

std::vector<PointSample> read_samples(std::istream& is, double intensity) {
  std::map<int, std::vector<double>> groups;
  std::string line;
  int q = -1;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> fields;
    for (double v; ls >> v;) fields.push_back(v);
    if (!ls.eof()) throw ParseError("sample file: bad token on line " + std::to_string(lineno));
    if (fields.empty()) continue;
    if (fields.size() < 2) throw ParseError("sample file: missing coordinates on line " + std::to_string(lineno));
    const int cols = static_cast<int>(fields.size()) - 1;
    if (q < 0) q = cols;
    if (cols != q) throw ParseError("sample file: inconsistent dimension on line " + std::to_string(lineno));
    if (fields[0] != std::floor(fields[0])) throw ParseError("sample file: non-integer label on line " + std::to_string(lineno));
    auto& g = groups[static_cast<int>(fields[0])];
    g.insert(g.end(), fields.begin() + 1, fields.end());
  }
  std::vector<PointSample> out;
  for (auto& [label, coords] : groups)
    out.emplace_back(label, q, intensity, StreamKey{}, std::move(coords));
  return out;
}

}  // namespace tn
