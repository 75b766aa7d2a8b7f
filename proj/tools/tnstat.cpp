// tnstat: command line front end for the needlet two-sample statistic.
//
// Parameters come from an optional key=value config file (same keys as the
// experiment harness), then `--set key=value`, then the explicit flags.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tn/bounds.hpp"
#include "tn/errors.hpp"
#include "tn/frame.hpp"
#include "tn/harmonics.hpp"
#include "tn/harness.hpp"
#include "tn/pointprocess.hpp"
#include "tn/ustat.hpp"

namespace {

using nlohmann::ordered_json;
using namespace tn;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
  std::vector<std::string> sets;
  std::string coeffs;
};

ExperimentConfig load_config(const Common& common) {
  ExperimentConfig cfg;
  if (!common.config.empty()) {
    std::ifstream in(common.config);
    if (!in) throw InvalidArgument("cannot open config file " + common.config);
    apply_config_text(cfg, in);
  }
  for (const auto& kv : common.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
    apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) cfg.base_seed = *common.seed;
  if (common.workers) cfg.workers = *common.workers;
  if (!common.out.empty()) cfg.output = common.out;
  return cfg;
}

int bandlimit_for(const ExperimentConfig& cfg) {
  if (cfg.bandlimit > 0) return cfg.bandlimit;
  const int jmax = *std::max_element(cfg.levels.begin(), cfg.levels.end());
  return 4 * static_cast<int>(std::floor(std::pow(cfg.B, jmax + 1) * (1.0 + 1e-12)));
}

// A coefficient table wins over the model parameters.
HarmonicDensity load_density(const Common& common, const ExperimentConfig& cfg) {
  if (!common.coeffs.empty()) {
    std::ifstream in(common.coeffs);
    if (!in) throw InvalidArgument("cannot open coefficient file " + common.coeffs);
    return read_coefficients(in);
  }
  const int L = bandlimit_for(cfg);
  const double c = cfg.c ? *cfg.c : default_scale(cfg.q, cfg.alpha, L, cfg.condition);
  return make_density(cfg.q, cfg.alpha, c, L, cfg.condition);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path);
  os.precision(17);
  return os;
}

void emit_json(const ordered_json& doc, const std::string& prefix) {
  std::cout << doc.dump(2) << '\n';
  if (!prefix.empty()) open_out(prefix + ".json") << doc.dump(2) << '\n';
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

// ---------------------------------------------------------------------------

void window_check(const Common& common, double B, int resolution, int levels, int points) {
  const auto w = build_window(B, resolution);
  double support = 0.0, pou = 0.0;
  std::vector<std::vector<std::string>> table;
  const double top = B * 1.1;
  for (int i = 0; i <= points; ++i) {
    const double x = top * i / points;
    const double v = w.squared(x);
    if (x <= 1.0 / B || x >= B) support = std::max(support, std::abs(v));
    table.push_back({num(x), num(w(x)), num(v), num(w.phi(x))});
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, levels * std::log(B));
  for (int i = 0; i < points; ++i) {
    const double x = std::exp(u(rng));
    double s = 0.0;
    for (int j = 0; j <= levels + 1; ++j) s += w.squared(std::pow(B, -j) * x);
    pou = std::max(pou, std::abs(s - 1.0));
  }
  ordered_json doc = {{"B", B},
                      {"resolution", resolution},
                      {"support_max_outside", support},
                      {"partition_of_unity_max_error", pou},
                      {"partition_range", {1.0, std::pow(B, levels)}}};
  emit_json(doc, common.out);
  if (!common.out.empty()) write_table(common.out + ".csv", {"x", "b", "b_squared", "phi"}, table);
}

void frame_check(const Common& common) {
  const auto cfg = load_config(common);
  auto window = std::make_shared<const WindowFunction>(cfg.B, kDefaultWindowResolution);
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<std::string>> table;
  for (int j : cfg.levels) {
    const auto frame = build_frame(cfg.q, cfg.B, j, window);
    // exactness of the cubature on s_n conj(s_m): sum_k e^{i(n-m) xi_k} = M^q [n = m]
    double cub = 0.0;
    const int M = frame.grid_side();
    const std::size_t S = frame.shell_size();
    if (S <= 4000) {
      for (std::size_t a = 0; a < S; ++a)
        for (std::size_t b = 0; b < S; ++b) {
          std::complex<double> prod = 1.0;
          for (int m = 0; m < cfg.q; ++m) {
            const int d = frame.shell()[a][m] - frame.shell()[b][m];
            std::complex<double> s = 0.0;
            for (int k = 0; k < M; ++k) s += std::polar(1.0, kTwoPi * d * k / M);
            prod *= s / static_cast<double>(M);
          }
          cub = std::max(cub, std::abs(prod - (a == b ? 1.0 : 0.0)));
        }
    }
    const double l2 = needlet_lp_norm(frame, 2.0), l4 = needlet_lp_norm(frame, 4.0);
    rows.push_back({{"j", j},
                    {"shell_size", S},
                    {"shell_radius", frame.shell_radius()},
                    {"grid_side", M},
                    {"needlets", frame.num_needlets()},
                    {"cubature_weight", frame.cubature_weight()},
                    {"cubature_max_error", S <= 4000 ? ordered_json(cub) : ordered_json(nullptr)},
                    {"l2_norm", l2},
                    {"l4_norm", l4}});
    table.push_back({std::to_string(j), std::to_string(S), std::to_string(frame.shell_radius()), std::to_string(M),
                     std::to_string(frame.num_needlets()), num(frame.cubature_weight()),
                     S <= 4000 ? num(cub) : "", num(l2), num(l4)});
  }
  emit_json({{"q", cfg.q}, {"B", cfg.B}, {"levels", rows}}, common.out);
  if (!common.out.empty())
    write_table(common.out + ".csv",
                {"j", "shell_size", "shell_radius", "grid_side", "needlets", "cubature_weight", "cubature_max_error",
                 "l2_norm", "l4_norm"},
                table);
}

void simulate(const Common& common, std::uint64_t replica, const std::string& coeffs_out) {
  const auto cfg = load_config(common);
  const auto f = load_density(common, cfg);
  const double R = cfg.intensities.front();
  const auto [s1, s2] = sample_pair(f, f, R, {cfg.base_seed, replica, 0});
  const std::vector<PointSample> both{s1, s2};
  if (common.out.empty()) {
    std::cout.precision(17);
    write_samples(std::cout, both);
  } else {
    auto os = open_out(common.out);
    write_samples(os, both);
    std::cerr << "wrote " << s1.size() << " + " << s2.size() << " points to " << common.out << '\n';
  }
  if (!coeffs_out.empty()) {
    auto os = open_out(coeffs_out);
    write_coefficients(os, f);
  }
}

void ustat(const Common& common, const std::string& samples_path) {
  const auto cfg = load_config(common);
  std::ifstream in(samples_path);
  if (!in) throw InvalidArgument("cannot open sample file " + samples_path);
  const double R = cfg.intensities.front();
  const auto groups = read_samples(in, R);
  const auto f = load_density(common, cfg);
  std::optional<PointSample> s1, s2;
  for (const auto& g : groups) {
    if (g.label() == 1) s1 = g;
    else if (g.label() == 2) s2 = g;
    else throw ParseError("sample labels must be 1 or 2");
  }
  if (!s1) s1 = PointSample(1, f.dim(), R, {}, {});
  if (!s2) s2 = PointSample(2, f.dim(), R, {}, {});
  auto window = std::make_shared<const WindowFunction>(cfg.B, kDefaultWindowResolution);
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<std::string>> table;
  for (int j : cfg.levels) {
    const auto frame = build_frame(f.dim(), cfg.B, j, window);
    const auto res = evaluate_ustat(frame, f, R, *s1, *s2);
    const auto test = hypothesis_test(*s1, *s2, frame, f, R, cfg.test_level);
    rows.push_back({{"j", j},
                    {"u", res.u_value},
                    {"variance", res.variance},
                    {"normalized", res.normalized},
                    {"p_value", test.p_value},
                    {"reject", test.reject}});
    table.push_back({std::to_string(j), num(res.u_value), num(res.variance), num(res.normalized), num(test.p_value),
                     test.reject ? "1" : "0"});
  }
  emit_json({{"n1", s1->size()},
             {"n2", s2->size()},
             {"intensity", R},
             {"B", cfg.B},
             {"test_level", cfg.test_level},
             {"levels", rows}},
            common.out);
  if (!common.out.empty())
    write_table(common.out + ".csv", {"j", "u", "variance", "normalized", "p_value", "reject"}, table);
}

void bound(const Common& common, const std::string& path) {
  const auto cfg = load_config(common);
  const auto f = load_density(common, cfg);
  ContractionOptions opt;
  if (path == "direct") opt.path = SumPath::Direct;
  else if (path == "convolution") opt.path = SumPath::Convolution;
  auto window = std::make_shared<const WindowFunction>(cfg.B, kDefaultWindowResolution);
  ordered_json rows = ordered_json::array();
  std::vector<std::vector<std::string>> table;
  for (int j : cfg.levels) {
    const auto frame = build_frame(f.dim(), cfg.B, j, window);
    for (double R : cfg.intensities) {
      const auto rep = bound_report(frame, f, R, opt);
      const double clt = clt_quantity(rep.q, rep.B, j, R, rep.alpha, rep.condition);
      rows.push_back({{"j", j},
                      {"intensity", R},
                      {"alpha", rep.alpha},
                      {"condition", to_string(rep.condition)},
                      {"regime", to_string(rep.regime)},
                      {"variance", rep.norms.variance},
                      {"l4_fourth", rep.norms.l4_fourth},
                      {"star21_sq", rep.norms.star21_sq},
                      {"star11_sq", rep.norms.star11_sq},
                      {"bound", {{"star11", rep.terms.star11}, {"star21", rep.terms.star21}, {"l4", rep.terms.l4},
                                 {"total", rep.wasserstein_bound}}},
                      {"envelope", {{"first", rep.envelope.first}, {"second", rep.envelope.second},
                                    {"third", rep.envelope.third}, {"total", rep.rate_envelope}}},
                      {"clt_quantity", clt}});
      table.push_back({std::to_string(f.dim()), num(cfg.B), std::to_string(j), num(R), num(rep.alpha),
                       std::string(to_string(rep.condition)), std::string(to_string(rep.regime)),
                       num(rep.norms.variance), num(rep.norms.l4_fourth), num(rep.norms.star21_sq),
                       num(rep.norms.star11_sq), num(rep.terms.star11), num(rep.terms.star21), num(rep.terms.l4),
                       num(rep.wasserstein_bound), num(rep.envelope.first), num(rep.envelope.second),
                       num(rep.envelope.third), num(rep.rate_envelope), num(clt)});
    }
  }
  emit_json({{"q", f.dim()},
             {"B", cfg.B},
             {"note", "constants in the rate envelope are unspecified; compare slopes, not levels"},
             {"rows", rows}},
            common.out);
  if (!common.out.empty())
    write_table(common.out + ".csv",
                {"q", "B", "j", "intensity", "alpha", "condition", "regime", "variance", "l4_fourth", "star21_sq",
                 "star11_sq", "bound_star11", "bound_star21", "bound_l4", "bound_total", "envelope_first",
                 "envelope_second", "envelope_third", "envelope_total", "clt_quantity"},
                table);
}

void experiment(const Common& common, bool runtime) {
  const auto cfg = load_config(common);
  const auto report = run_experiment(cfg);
  {
    auto os = open_out(cfg.output + ".csv");
    write_csv(os, report, runtime);
  }
  {
    auto os = open_out(cfg.output + ".json");
    write_json(os, report, runtime);
  }
  std::printf("%3s %10s %9s %9s %9s %9s %9s %9s\n", "j", "R", "mean", "variance", "d_W", "KS", "bound", "reject");
  for (const auto& r : report.rows)
    std::printf("%3d %10g %9.4f %9.4f %9.4f %9.4f %9.4f %9.4f\n", r.j, r.intensity, r.mean, r.variance, r.wasserstein,
                r.ks, r.bound.total(), r.rejection_rate);
  std::printf("wrote %s.csv and %s.json\n", cfg.output.c_str(), cfg.output.c_str());
}

const std::vector<RateQuantity> kAllQuantities{RateQuantity::Bound,    RateQuantity::BoundStar11,
                                               RateQuantity::BoundStar21, RateQuantity::BoundL4,
                                               RateQuantity::Envelope, RateQuantity::AnalyticVariance,
                                               RateQuantity::Wasserstein, RateQuantity::Ks};

void rates(const Common& common, const std::string& input, const std::string& axis_name,
           const std::vector<std::string>& quantity_names) {
  std::ifstream in(input);
  if (!in) throw InvalidArgument("cannot open " + input);
  const auto rows = read_csv(in);
  std::vector<RateQuantity> quantities;
  for (const auto& name : quantity_names) {
    auto it = std::find_if(kAllQuantities.begin(), kAllQuantities.end(),
                           [&](RateQuantity q) { return to_string(q) == name; });
    if (it == kAllQuantities.end()) throw InvalidArgument("unknown quantity " + name);
    quantities.push_back(*it);
  }
  if (quantities.empty()) quantities = kAllQuantities;

  // Sweep along one axis with the other held fixed.
  const bool by_level = axis_name == "j";
  std::map<double, std::vector<ExperimentRow>> groups;
  for (const auto& r : rows) groups[by_level ? r.intensity : static_cast<double>(r.j)].push_back(r);
  ordered_json out = ordered_json::array();
  std::vector<std::vector<std::string>> table;
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(), [&](const auto& a, const auto& b) {
      return by_level ? a.j < b.j : a.intensity < b.intensity;
    });
    if (group.size() < 3) continue;
    const double logB = std::log(group.front().B);
    for (RateQuantity q : quantities) {
      const auto fit = rate_regression(group, by_level ? SweepAxis::Level : SweepAxis::LogIntensity, q);
      // along j the natural unit is log B per level
      const double scale = by_level ? logB : 1.0;
      out.push_back({{"axis", by_level ? "j" : "log_intensity"},
                     {by_level ? "intensity" : "j", key},
                     {"quantity", to_string(q)},
                     {"slope", fit.slope / scale},
                     {"ci_low", fit.ci_low / scale},
                     {"ci_high", fit.ci_high / scale},
                     {"std_error", fit.std_error / scale},
                     {"points", fit.points}});
      table.push_back({by_level ? "j" : "log_intensity", num(key), std::string(to_string(q)), num(fit.slope / scale),
                       num(fit.ci_low / scale), num(fit.ci_high / scale), num(fit.std_error / scale),
                       std::to_string(fit.points)});
    }
  }
  if (out.empty()) throw InsufficientPoints("no group has three or more configurations along the axis");
  emit_json({{"unit", by_level ? "slope per level in units of log B" : "slope against log intensity"},
             {"slopes", out}},
            common.out);
  if (!common.out.empty())
    write_table(common.out + ".csv",
                {"axis", "fixed", "quantity", "slope", "ci_low", "ci_high", "std_error", "points"}, table);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Needlet two-sample statistics on the torus"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "base seed");
  app.add_option("--workers", common.workers, "worker threads for replicas");
  app.add_option("--out", common.out, "output path or prefix");
  app.add_option("--set", common.sets, "override one config key, key=value (repeatable)");
  app.fallthrough();

  double wB = 2.0;
  int wres = kDefaultWindowResolution, wlevels = 8, wpoints = 2000;
  auto* wc = app.add_subcommand("window-check", "support and partition of unity of the window");
  wc->add_option("--B", wB, "dilation base");
  wc->add_option("--resolution", wres, "table resolution");
  wc->add_option("--levels", wlevels, "partition checked on [1, B^levels]");
  wc->add_option("--points", wpoints, "sample points");

  auto* fc = app.add_subcommand("frame-check", "shell, cubature and needlet norms for each level j");

  std::uint64_t replica = 0;
  std::string coeffs_out;
  auto* sim = app.add_subcommand("simulate", "draw one labeled pair of Poisson samples");
  sim->add_option("--coeffs", common.coeffs, "coefficient table (n_1 .. n_q re im)");
  sim->add_option("--replica", replica, "replica index of the random stream");
  sim->add_option("--coeffs-out", coeffs_out, "also write the density's coefficient table");

  std::string samples;
  auto* us = app.add_subcommand("ustat", "U-statistic, variance and test for a sample file");
  us->add_option("--samples", samples, "sample file (label theta_1 .. theta_q)")->required();
  us->add_option("--coeffs", common.coeffs, "null density as a coefficient table");

  std::string path = "auto";
  auto* bd = app.add_subcommand("bound", "contraction norms, Wasserstein bound and rate envelope");
  bd->add_option("--coeffs", common.coeffs, "coefficient table (n_1 .. n_q re im)");
  bd->add_option("--path", path, "lattice sum path")->check(CLI::IsMember({"auto", "direct", "convolution"}));

  bool runtime = false;
  auto* ex = app.add_subcommand("experiment", "Monte Carlo replicas, distances to N(0,1), size and power");
  ex->add_flag("--runtime", runtime, "include per-row runtime (not reproducible)");

  std::string input, axis = "j";
  std::vector<std::string> quantities;
  auto* rt = app.add_subcommand("rates", "log-slopes of report columns along j or log R");
  rt->add_option("--in", input, "experiment CSV")->required()->check(CLI::ExistingFile);
  rt->add_option("--axis", axis, "sweep axis")->check(CLI::IsMember({"j", "R"}));
  rt->add_option("--quantity", quantities, "columns to regress (default all)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*wc) window_check(common, wB, wres, wlevels, wpoints);
    else if (*fc) frame_check(common);
    else if (*sim) simulate(common, replica, coeffs_out);
    else if (*us) ustat(common, samples);
    else if (*bd) bound(common, path);
    else if (*ex) experiment(common, runtime);
    else if (*rt) rates(common, input, axis, quantities);
  } catch (const tn::Error& e) {
    std::cerr << "tnstat: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
