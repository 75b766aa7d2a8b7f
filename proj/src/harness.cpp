#include "tn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "tn/errors.hpp"
#include "tn/ustat.hpp"

namespace tn {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

// int_{-inf}^x Phi
double phi_integral(double x) { return x * normal_cdf(x) + normal_pdf(x); }

// int_x^inf (1 - Phi)
double tail_integral(double x) { return normal_pdf(x) - x * normal_cdf(-x); }

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::vector<double> sorted_copy(std::span<const double> samples) {
  if (samples.size() < 2) throw TooFewSamples("need at least two samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

double empirical_wasserstein(std::span<const double> samples) {
  const auto x = sorted_copy(samples);
  const auto n = static_cast<double>(x.size());
  double total = phi_integral(x.front()) + tail_integral(x.back());
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i];
    const double b = x[i + 1];
    if (b <= a) continue;
    const double c = static_cast<double>(i + 1) / n;
    // int_a^b (c - Phi) over the piece where c > Phi, and the reverse beyond.
    const double z = std::clamp(normal_quantile(c), a, b);
    const double below = c * (z - a) - (phi_integral(z) - phi_integral(a));
    const double above = (phi_integral(b) - phi_integral(z)) - c * (b - z);
    total += std::max(below, 0.0) + std::max(above, 0.0);
  }
  return total;
}

double ks_distance(std::span<const double> samples) {
  const auto x = sorted_copy(samples);
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("config key '" + std::string(key) + "': not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ParseError("config key '" + std::string(key) + "': trailing characters in '" + s + "'");
  return out;
}

long long parse_int(std::string_view key, std::string_view v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e15)
    throw ParseError("config key '" + std::string(key) + "': not an integer");
  return static_cast<long long>(d);
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : v) {
    if (ch == ',' || ch == ' ' || ch == ';') {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

AlternativeDensity& alternative(ExperimentConfig& cfg) {
  if (!cfg.alternative) cfg.alternative.emplace();
  return *cfg.alternative;
}

}  // namespace

void apply_config_value(ExperimentConfig& cfg, std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "q") {
    cfg.q = static_cast<int>(parse_int(key, value));
  } else if (key == "B") {
    cfg.B = parse_double(key, value);
  } else if (key == "j" || key == "levels") {
    cfg.levels.clear();
    for (const auto& s : split_list(value)) cfg.levels.push_back(static_cast<int>(parse_int(key, s)));
  } else if (key == "R" || key == "R_t" || key == "intensity" || key == "intensities") {
    cfg.intensities.clear();
    for (const auto& s : split_list(value)) cfg.intensities.push_back(parse_double(key, s));
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "condition") {
    cfg.condition = parse_condition(trim(value));
  } else if (key == "c") {
    const std::string s = trim(value);
    if (s == "auto" || s.empty()) cfg.c.reset();
    else cfg.c = parse_double(key, s);
  } else if (key == "bandlimit") {
    cfg.bandlimit = static_cast<int>(parse_int(key, value));
  } else if (key == "replicas") {
    cfg.replicas = static_cast<int>(parse_int(key, value));
  } else if (key == "seed" || key == "base_seed") {
    const long long s = parse_int(key, value);
    if (s < 0) throw ParseError("seed must be >= 0");
    cfg.base_seed = static_cast<std::uint64_t>(s);
  } else if (key == "workers") {
    cfg.workers = static_cast<int>(parse_int(key, value));
  } else if (key == "level" || key == "test_level") {
    cfg.test_level = parse_double(key, value);
  } else if (key == "alt_alpha") {
    alternative(cfg).alpha = parse_double(key, value);
  } else if (key == "alt_c") {
    alternative(cfg).c = parse_double(key, value);
  } else if (key == "alt_condition") {
    alternative(cfg).condition = parse_condition(trim(value));
  } else if (key == "alternative") {
    const std::string s = trim(value);
    if (s == "none" || s == "off" || s == "0") cfg.alternative.reset();
    else if (s == "on" || s == "1" || s == "default") alternative(cfg);
    else throw ParseError("alternative must be on/off");
  } else if (key == "output" || key == "out") {
    cfg.output = trim(value);
  } else {
    throw ParseError("unknown config key '" + key + "'");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_config_value(cfg, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.q < 1) throw InvalidArgument("q must be >= 1");
  if (!(cfg.B > 1.0)) throw InvalidArgument("B must be > 1");
  if (cfg.levels.empty()) throw InvalidArgument("at least one level j is required");
  for (int j : cfg.levels)
    if (j < 0) throw InvalidArgument("levels must be >= 0");
  if (cfg.intensities.empty()) throw InvalidArgument("at least one intensity is required");
  for (double r : cfg.intensities)
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("intensities must be finite and > 0");
  if (!(cfg.alpha >= 0.5)) throw InvalidAlpha("alpha must be >= 1/2");
  if (cfg.condition == Condition::Custom) throw InvalidArgument("condition must be cond1 or cond2");
  if (cfg.c && !(*cfg.c >= 0.0)) throw InvalidArgument("c must be >= 0");
  if (cfg.bandlimit < 0) throw InvalidArgument("bandlimit must be >= 0");
  if (cfg.replicas < 100) throw InvalidArgument("replicas must be >= 100");
  if (cfg.workers < 1) throw InvalidArgument("workers must be >= 1");
  if (!(cfg.test_level > 0.0 && cfg.test_level < 1.0)) throw InvalidArgument("test level must lie in (0, 1)");
  if (cfg.alternative) {
    if (!(cfg.alternative->alpha >= 0.5)) throw InvalidAlpha("alternative alpha must be >= 1/2");
    if (!(cfg.alternative->c >= 0.0)) throw InvalidArgument("alternative c must be >= 0");
    if (cfg.alternative->condition == Condition::Custom)
      throw InvalidArgument("alternative condition must be cond1 or cond2");
  }
}

namespace {

int resolve_bandlimit(const ExperimentConfig& cfg) {
  if (cfg.bandlimit > 0) return cfg.bandlimit;
  const int jmax = *std::max_element(cfg.levels.begin(), cfg.levels.end());
  return 4 * static_cast<int>(std::floor(std::pow(cfg.B, jmax + 1) * (1.0 + 1e-12)));
}

// Runs body(i) for i in [0, count) over `workers` threads; the first
// exception is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, int workers, Body body) {
  const auto nthreads = static_cast<std::size_t>(std::max(1, workers));
  if (nthreads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < std::min(nthreads, count); ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

constexpr std::uint64_t kAlternativeStreams = std::uint64_t{1} << 62;

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report;
  report.config = cfg;
  const int L = resolve_bandlimit(cfg);
  const double c = cfg.c ? *cfg.c : default_scale(cfg.q, cfg.alpha, L, cfg.condition);
  const HarmonicDensity f = make_density(cfg.q, cfg.alpha, c, L, cfg.condition);
  std::optional<HarmonicDensity> alt;
  if (cfg.alternative)
    alt = make_density(cfg.q, cfg.alternative->alpha, cfg.alternative->c, L, cfg.alternative->condition);
  auto window = std::make_shared<const WindowFunction>(cfg.B, kDefaultWindowResolution);
  const double critical = normal_quantile(1.0 - cfg.test_level / 2.0);
  const auto reps = static_cast<std::size_t>(cfg.replicas);

  std::uint64_t config_index = 0;
  for (int j : cfg.levels) {
    const NeedletFrame frame(cfg.q, cfg.B, j, window);
    for (double R : cfg.intensities) {
      const auto start = std::chrono::steady_clock::now();
      ExperimentRow row;
      row.q = cfg.q;
      row.B = cfg.B;
      row.j = j;
      row.intensity = R;
      row.alpha = cfg.alpha;
      row.condition = cfg.condition;
      row.replicas = cfg.replicas;

      row.analytic_variance = analytic_variance(frame, f, R);
      const double sd = std::sqrt(row.analytic_variance);
      const auto norms = contraction_norms(frame, f, R);
      row.bound = bound_terms(norms);
      row.envelope = envelope_terms(cfg.q, cfg.B, j, R, cfg.alpha, cfg.condition);

      const std::uint64_t stream_base = config_index << 32;
      row.statistics.assign(reps, 0.0);
      parallel_for(reps, cfg.workers, [&](std::size_t r) {
        const auto [s1, s2] = sample_pair(f, f, R, {cfg.base_seed, stream_base + r, 0});
        row.statistics[r] = compute_U(frame, s1, s2) / sd;
      });

      const auto n = static_cast<double>(reps);
      const auto& x = row.statistics;
      row.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
      double m2 = 0.0, m4 = 0.0;
      std::size_t rejected = 0;
      for (double v : x) {
        const double d = v - row.mean;
        m2 += d * d;
        m4 += d * d * d * d;
        if (std::abs(v) > critical) ++rejected;
      }
      row.variance = m2 / (n - 1.0);
      row.mean_se = std::sqrt(row.variance / n);
      const double mu2 = m2 / n;
      row.variance_se = std::sqrt(std::max(m4 / n - mu2 * mu2, 0.0) / n);
      row.wasserstein = empirical_wasserstein(x);
      row.ks = ks_distance(x);
      row.rejection_rate = static_cast<double>(rejected) / n;

      row.power = std::numeric_limits<double>::quiet_NaN();
      if (alt) {
        std::vector<char> reject(reps, 0);
        parallel_for(reps, cfg.workers, [&](std::size_t r) {
          const auto [s1, s2] = sample_pair(f, *alt, R, {cfg.base_seed, kAlternativeStreams + stream_base + r, 0});
          reject[r] = std::abs(compute_U(frame, s1, s2) / sd) > critical ? 1 : 0;
        });
        row.power = static_cast<double>(std::count(reject.begin(), reject.end(), 1)) / n;
      }
      row.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.rows.push_back(std::move(row));
      ++config_index;
    }
  }
  return report;
}

namespace {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "q",           "B",          "j",          "intensity",      "alpha",         "condition",
      "replicas",    "mean",       "variance",   "mean_se",        "variance_se",   "wasserstein",
      "ks",          "analytic_variance",        "bound_star11",   "bound_star21",  "bound_l4",
      "bound_total", "envelope_first",           "envelope_second", "envelope_third", "envelope_total",
      "rejection_rate", "power"};
  return cols;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_csv_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return parse_double("csv", s);
}

}  // namespace

void write_csv(std::ostream& os, const ExperimentReport& report, bool include_runtime) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  if (include_runtime) os << ",runtime_seconds";
  os << '\n';
  for (const auto& r : report.rows) {
    os << r.q << ',' << fmt(r.B) << ',' << r.j << ',' << fmt(r.intensity) << ',' << fmt(r.alpha) << ','
       << to_string(r.condition) << ',' << r.replicas << ',' << fmt(r.mean) << ',' << fmt(r.variance) << ','
       << fmt(r.mean_se) << ',' << fmt(r.variance_se) << ',' << fmt(r.wasserstein) << ',' << fmt(r.ks) << ','
       << fmt(r.analytic_variance) << ',' << fmt(r.bound.star11) << ',' << fmt(r.bound.star21) << ','
       << fmt(r.bound.l4) << ',' << fmt(r.bound.total()) << ',' << fmt(r.envelope.first) << ','
       << fmt(r.envelope.second) << ',' << fmt(r.envelope.third) << ',' << fmt(r.envelope.total()) << ','
       << fmt(r.rejection_rate) << ',' << fmt(r.power);
    if (include_runtime) os << ',' << fmt(r.runtime_seconds);
    os << '\n';
  }
}

void write_json(std::ostream& os, const ExperimentReport& report, bool include_runtime) {
  using nlohmann::ordered_json;
  const auto& cfg = report.config;
  ordered_json config = {
      {"q", cfg.q},
      {"B", cfg.B},
      {"levels", cfg.levels},
      {"intensities", cfg.intensities},
      {"alpha", cfg.alpha},
      {"condition", to_string(cfg.condition)},
      {"c", cfg.c ? ordered_json(*cfg.c) : ordered_json("auto")},
      {"bandlimit", cfg.bandlimit},
      {"replicas", cfg.replicas},
      {"base_seed", cfg.base_seed},
      {"test_level", cfg.test_level},
  };
  if (cfg.alternative)
    config["alternative"] = {{"alpha", cfg.alternative->alpha},
                             {"c", cfg.alternative->c},
                             {"condition", to_string(cfg.alternative->condition)}};
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json row = {
        {"q", r.q},
        {"B", r.B},
        {"j", r.j},
        {"intensity", r.intensity},
        {"alpha", r.alpha},
        {"condition", to_string(r.condition)},
        {"replicas", r.replicas},
        {"mean", r.mean},
        {"variance", r.variance},
        {"mean_se", r.mean_se},
        {"variance_se", r.variance_se},
        {"wasserstein", r.wasserstein},
        {"ks", r.ks},
        {"analytic_variance", r.analytic_variance},
        {"bound", {{"star11", r.bound.star11}, {"star21", r.bound.star21}, {"l4", r.bound.l4}, {"total", r.bound.total()}}},
        {"envelope",
         {{"first", r.envelope.first}, {"second", r.envelope.second}, {"third", r.envelope.third}, {"total", r.envelope.total()}}},
        {"rejection_rate", r.rejection_rate},
        {"power", std::isnan(r.power) ? ordered_json(nullptr) : ordered_json(r.power)},
    };
    if (include_runtime) row["runtime_seconds"] = r.runtime_seconds;
    rows.push_back(std::move(row));
  }
  ordered_json doc = {
      {"config", std::move(config)},
      {"note", "constants in the rate envelope are unspecified; compare slopes, not levels"},
      {"rows", std::move(rows)},
  };
  os << doc.dump(2) << '\n';
}

std::vector<ExperimentRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty CSV");
  std::map<std::string, std::size_t> index;
  {
    std::istringstream hs(line);
    std::string name;
    for (std::size_t i = 0; std::getline(hs, name, ','); ++i) index[trim(name)] = i;
  }
  for (const auto& c : csv_columns())
    if (!index.contains(c)) throw ParseError("CSV header lacks column '" + c + "'");
  std::vector<ExperimentRow> rows;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(trim(cell));
    if (f.size() < index.size()) throw ParseError("CSV row has too few fields");
    auto get = [&](const char* name) { return parse_csv_double(f[index.at(name)]); };
    ExperimentRow r;
    r.q = static_cast<int>(get("q"));
    r.B = get("B");
    r.j = static_cast<int>(get("j"));
    r.intensity = get("intensity");
    r.alpha = get("alpha");
    r.condition = parse_condition(f[index.at("condition")]);
    r.replicas = static_cast<int>(get("replicas"));
    r.mean = get("mean");
    r.variance = get("variance");
    r.mean_se = get("mean_se");
    r.variance_se = get("variance_se");
    r.wasserstein = get("wasserstein");
    r.ks = get("ks");
    r.analytic_variance = get("analytic_variance");
    r.bound = {get("bound_star11"), get("bound_star21"), get("bound_l4")};
    r.envelope = {get("envelope_first"), get("envelope_second"), get("envelope_third")};
    r.rejection_rate = get("rejection_rate");
    r.power = get("power");
    if (index.contains("runtime_seconds")) r.runtime_seconds = get("runtime_seconds");
    rows.push_back(std::move(r));
  }
  return rows;
}

SlopeFit log_slope(std::span<const double> x, std::span<const double> values) {
  if (x.size() != values.size()) throw DimensionMismatch("x and values differ in length");
  if (x.size() < 3) throw InsufficientPoints("slope fit needs at least three points");
  const std::size_t n = x.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0)) throw InvalidArgument("log slope needs positive values");
    y[i] = std::log(values[i]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientPoints("slope fit needs distinct x values");
  SlopeFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    rss += e * e;
  }
  fit.std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  const double t = boost::math::quantile(
      boost::math::complement(boost::math::students_t_distribution<double>(static_cast<double>(n - 2)), 0.025));
  fit.ci_low = fit.slope - t * fit.std_error;
  fit.ci_high = fit.slope + t * fit.std_error;
  return fit;
}

std::string_view to_string(RateQuantity q) {
  switch (q) {
    case RateQuantity::Bound: return "bound";
    case RateQuantity::BoundStar11: return "bound_star11";
    case RateQuantity::BoundStar21: return "bound_star21";
    case RateQuantity::BoundL4: return "bound_l4";
    case RateQuantity::Envelope: return "envelope";
    case RateQuantity::AnalyticVariance: return "analytic_variance";
    case RateQuantity::Wasserstein: return "wasserstein";
    case RateQuantity::Ks: return "ks";
  }
  return "bound";
}

double rate_value(const ExperimentRow& row, RateQuantity q) {
  switch (q) {
    case RateQuantity::Bound: return row.bound.total();
    case RateQuantity::BoundStar11: return row.bound.star11;
    case RateQuantity::BoundStar21: return row.bound.star21;
    case RateQuantity::BoundL4: return row.bound.l4;
    case RateQuantity::Envelope: return row.envelope.total();
    case RateQuantity::AnalyticVariance: return row.analytic_variance;
    case RateQuantity::Wasserstein: return row.wasserstein;
    case RateQuantity::Ks: return row.ks;
  }
  return 0.0;
}

SlopeFit rate_regression(std::span<const ExperimentRow> rows, SweepAxis axis, RateQuantity q) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(axis == SweepAxis::Level ? static_cast<double>(r.j) : std::log(r.intensity));
    y.push_back(rate_value(r, q));
  }
  return log_slope(x, y);
}

TestDecision hypothesis_test(const PointSample& sample1, const PointSample& sample2,
                             const NeedletFrame& frame, const HarmonicDensity& f0,
                             double intensity, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("test level must lie in (0, 1)");
  TestDecision d;
  d.statistic = normalize(compute_U(frame, sample1, sample2), analytic_variance(frame, f0, intensity));
  d.p_value = std::erfc(std::abs(d.statistic) / std::sqrt(2.0));
  d.reject = d.p_value < level;
  return d;
}

}  // namespace tn
