#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tn/bounds.hpp"
#include "tn/errors.hpp"
#include "tn/frame.hpp"
#include "tn/harmonics.hpp"
#include "tn/harness.hpp"
#include "tn/pointprocess.hpp"
#include "tn/ustat.hpp"

namespace py = pybind11;
using namespace tn;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (n, q) array of angles -> PointSample
PointSample to_sample(int label, int q, double intensity, const Points& pts) {
  if (pts.ndim() != 2 && !(pts.ndim() == 1 && q == 1)) throw DimensionMismatch("points must have shape (n, q)");
  if (pts.ndim() == 2 && pts.shape(1) != q) throw DimensionMismatch("points must have q columns");
  std::vector<double> coords(pts.data(), pts.data() + pts.size());
  return PointSample(label, q, intensity, {}, std::move(coords));
}

py::array_t<double> to_array(const PointSample& s) {
  py::array_t<double> out({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.dim())});
  std::copy(s.coords().begin(), s.coords().end(), out.mutable_data());
  return out;
}

std::vector<int> index_of(const MultiIndex& n) { return {n.view().begin(), n.view().end()}; }

void set_config(ExperimentConfig& cfg, const py::dict& kw) {
  for (auto item : kw) {
    const auto key = py::str(item.first).cast<std::string>();
    std::string value;
    if (py::isinstance<py::list>(item.second) || py::isinstance<py::tuple>(item.second)) {
      for (auto v : item.second) value += py::str(v).cast<std::string>() + ",";
    } else if (py::isinstance<py::bool_>(item.second)) {
      value = item.second.cast<bool>() ? "on" : "off";
    } else {
      value = py::str(item.second).cast<std::string>();
    }
    apply_config_value(cfg, key, value);
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Needlet two-sample statistics on the torus";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<PositivityViolation>(m, "PositivityViolation", base.ptr());
  py::register_exception<InvalidDensity>(m, "InvalidDensity", base.ptr());
  py::register_exception<InsufficientBandlimit>(m, "InsufficientBandlimit", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<NonpositiveVariance>(m, "NonpositiveVariance", base.ptr());
  py::register_exception<TooFewSamples>(m, "TooFewSamples", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::enum_<Condition>(m, "Condition")
      .value("Cond1", Condition::Cond1)
      .value("Cond2", Condition::Cond2)
      .value("Custom", Condition::Custom);
  py::enum_<SumPath>(m, "SumPath")
      .value("Auto", SumPath::Auto)
      .value("Direct", SumPath::Direct)
      .value("Convolution", SumPath::Convolution);

  py::class_<HarmonicDensity>(m, "HarmonicDensity")
      .def_property_readonly("dim", &HarmonicDensity::dim)
      .def_property_readonly("bandlimit", &HarmonicDensity::bandlimit)
      .def_property_readonly("alpha", &HarmonicDensity::alpha)
      .def_property_readonly("scale", &HarmonicDensity::scale)
      .def_property_readonly("condition", &HarmonicDensity::condition)
      .def_property_readonly("grid_min", &HarmonicDensity::grid_min)
      .def("coeff", [](const HarmonicDensity& f, std::vector<int> n) { return f.coeff(n); }, py::arg("n"))
      .def("coefficients",
           [](const HarmonicDensity& f) {
             py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(f.coeffs().size()));
             std::copy(f.coeffs().begin(), f.coeffs().end(), out.mutable_data());
             return out;
           },
           "box-ordered table, last coordinate fastest")
      .def("__call__",
           [](const HarmonicDensity& f, const Points& pts) {
             const auto n = static_cast<std::size_t>(pts.size()) / static_cast<std::size_t>(f.dim());
             if (n * static_cast<std::size_t>(f.dim()) != static_cast<std::size_t>(pts.size()))
               throw DimensionMismatch("point array size is not a multiple of q");
             py::array_t<double> out(static_cast<py::ssize_t>(n));
             density_eval_batch(f, {pts.data(), static_cast<std::size_t>(pts.size())},
                                {out.mutable_data(), n});
             return out;
           },
           py::arg("points"))
      .def("to_text", [](const HarmonicDensity& f) {
        std::ostringstream os;
        write_coefficients(os, f);
        return os.str();
      });

  m.def("make_density", &make_density, py::arg("q"), py::arg("alpha"), py::arg("c"), py::arg("bandlimit"),
        py::arg("condition") = Condition::Cond1);
  m.def("default_scale", &default_scale, py::arg("q"), py::arg("alpha"), py::arg("bandlimit"),
        py::arg("condition") = Condition::Cond1);
  m.def("uniform_density", &uniform_density, py::arg("q"), py::arg("bandlimit"));
  m.def("density_from_text", [](const std::string& text) {
    std::istringstream is(text);
    return read_coefficients(is);
  });

  py::class_<WindowFunction, std::shared_ptr<WindowFunction>>(m, "WindowFunction")
      .def(py::init<double, int>(), py::arg("B"), py::arg("resolution") = kDefaultWindowResolution)
      .def_property_readonly("B", &WindowFunction::scale)
      .def("squared",
           [](const WindowFunction& w, py::array_t<double> x) {
             return py::vectorize([&w](double v) { return w.squared(v); })(x);
           })
      .def("__call__", [](const WindowFunction& w, py::array_t<double> x) {
        return py::vectorize([&w](double v) { return w(v); })(x);
      });

  py::class_<NeedletFrame>(m, "NeedletFrame")
      .def(py::init([](int q, double B, int j, int resolution) {
             return NeedletFrame(q, B, j, std::make_shared<const WindowFunction>(B, resolution));
           }),
           py::arg("q"), py::arg("B"), py::arg("j"), py::arg("resolution") = kDefaultWindowResolution)
      .def_property_readonly("dim", &NeedletFrame::dim)
      .def_property_readonly("B", &NeedletFrame::scale)
      .def_property_readonly("j", &NeedletFrame::level)
      .def_property_readonly("shell_size", &NeedletFrame::shell_size)
      .def_property_readonly("shell_radius", &NeedletFrame::shell_radius)
      .def_property_readonly("num_needlets", &NeedletFrame::num_needlets)
      .def_property_readonly("cubature_weight", &NeedletFrame::cubature_weight)
      .def_property_readonly("shell",
                             [](const NeedletFrame& fr) {
                               std::vector<std::vector<int>> out;
                               for (const auto& n : fr.shell()) out.push_back(index_of(n));
                               return out;
                             })
      .def_property_readonly("spectral_weights",
                             [](const NeedletFrame& fr) {
                               return std::vector<double>(fr.spectral_weights().begin(), fr.spectral_weights().end());
                             })
      .def("needlet_values",
           [](const NeedletFrame& fr, std::vector<double> theta) { return needlet_values(fr, theta); },
           py::arg("theta"))
      .def("lp_norm", &needlet_lp_norm, py::arg("p"), py::arg("oversample") = 16);

  m.def("needlet_coeffs", &needlet_coeffs, py::arg("f"), py::arg("frame"));
  m.def("needlet_synthesis",
        [](const NeedletFrame& fr, std::vector<double> beta, std::vector<double> theta) {
          return needlet_synthesis(fr, beta, theta);
        },
        py::arg("frame"), py::arg("beta"), py::arg("theta"));

  m.def("sample_pair",
        [](const HarmonicDensity& f1, const HarmonicDensity& f2, double intensity, std::uint64_t seed,
           std::uint64_t replica) {
          const auto [a, b] = sample_pair(f1, f2, intensity, {seed, replica, 0});
          return py::make_tuple(to_array(a), to_array(b));
        },
        py::arg("f1"), py::arg("f2"), py::arg("intensity"), py::arg("seed"), py::arg("replica") = 0,
        "two independent Poisson samples as (n, q) arrays of angles");

  m.def("compute_u",
        [](const NeedletFrame& fr, const Points& x1, const Points& x2) {
          return compute_U(fr, to_sample(1, fr.dim(), 0.0, x1), to_sample(2, fr.dim(), 0.0, x2));
        },
        py::arg("frame"), py::arg("sample1"), py::arg("sample2"));
  m.def("kernel_h",
        [](const NeedletFrame& fr, int l1, std::vector<double> t1, int l2, std::vector<double> t2) {
          return kernel_h(fr, {l1, std::move(t1)}, {l2, std::move(t2)});
        },
        py::arg("frame"), py::arg("label1"), py::arg("theta1"), py::arg("label2"), py::arg("theta2"));
  m.def("analytic_variance", &analytic_variance, py::arg("frame"), py::arg("f"), py::arg("intensity"),
        py::arg("path") = SumPath::Auto);
  m.def("evaluate_ustat",
        [](const NeedletFrame& fr, const HarmonicDensity& f, double intensity, const Points& x1,
           const Points& x2) {
          const auto r = evaluate_ustat(fr, f, intensity, to_sample(1, fr.dim(), intensity, x1),
                                        to_sample(2, fr.dim(), intensity, x2));
          return py::dict(py::arg("u") = r.u_value, py::arg("variance") = r.variance,
                          py::arg("normalized") = r.normalized);
        },
        py::arg("frame"), py::arg("f"), py::arg("intensity"), py::arg("sample1"), py::arg("sample2"));
  m.def("hypothesis_test",
        [](const NeedletFrame& fr, const HarmonicDensity& f0, double intensity, const Points& x1,
           const Points& x2, double level) {
          const auto d = hypothesis_test(to_sample(1, fr.dim(), intensity, x1), to_sample(2, fr.dim(), intensity, x2),
                                         fr, f0, intensity, level);
          return py::dict(py::arg("reject") = d.reject, py::arg("p_value") = d.p_value,
                          py::arg("statistic") = d.statistic);
        },
        py::arg("frame"), py::arg("f0"), py::arg("intensity"), py::arg("sample1"), py::arg("sample2"),
        py::arg("level") = 0.05);

  m.def("bound_report",
        [](const NeedletFrame& fr, const HarmonicDensity& f, double intensity, SumPath path) {
          ContractionOptions opt;
          opt.path = path;
          const auto r = bound_report(fr, f, intensity, opt);
          py::dict norms(py::arg("variance") = r.norms.variance, py::arg("l4_fourth") = r.norms.l4_fourth,
                         py::arg("star21_sq") = r.norms.star21_sq, py::arg("star11_sq") = r.norms.star11_sq);
          py::dict terms(py::arg("star11") = r.terms.star11, py::arg("star21") = r.terms.star21,
                         py::arg("l4") = r.terms.l4);
          py::dict env(py::arg("first") = r.envelope.first, py::arg("second") = r.envelope.second,
                       py::arg("third") = r.envelope.third);
          return py::dict(py::arg("norms") = norms, py::arg("terms") = terms,
                          py::arg("wasserstein_bound") = r.wasserstein_bound, py::arg("envelope") = env,
                          py::arg("rate_envelope") = r.rate_envelope,
                          py::arg("regime") = std::string(to_string(r.regime)));
        },
        py::arg("frame"), py::arg("f"), py::arg("intensity"), py::arg("path") = SumPath::Auto);
  m.def("wasserstein_bound",
        [](double l4_fourth, double star21_sq, double star11_sq, double variance) {
          return wasserstein_bound({l4_fourth, star21_sq, star11_sq, variance});
        },
        py::arg("l4_fourth"), py::arg("star21_sq"), py::arg("star11_sq"), py::arg("variance"));
  m.def("rate_envelope", &rate_envelope, py::arg("q"), py::arg("B"), py::arg("j"), py::arg("intensity"),
        py::arg("alpha"), py::arg("condition") = Condition::Cond1);

  m.def("empirical_wasserstein",
        [](const Points& x) { return empirical_wasserstein({x.data(), static_cast<std::size_t>(x.size())}); });
  m.def("ks_distance", [](const Points& x) { return ks_distance({x.data(), static_cast<std::size_t>(x.size())}); });

  m.def("run_experiment",
        [](const py::kwargs& kw) {
          ExperimentConfig cfg;
          set_config(cfg, kw);
          ExperimentReport rep;
          {
            py::gil_scoped_release release;
            rep = run_experiment(cfg);
          }
          std::ostringstream csv, json;
          write_csv(csv, rep);
          write_json(json, rep);
          py::list stats;
          for (const auto& r : rep.rows) {
            py::array_t<double> a(static_cast<py::ssize_t>(r.statistics.size()));
            std::copy(r.statistics.begin(), r.statistics.end(), a.mutable_data());
            stats.append(a);
          }
          return py::dict(py::arg("csv") = csv.str(), py::arg("json") = json.str(), py::arg("statistics") = stats);
        },
        "runs the Monte Carlo harness; keyword arguments are config keys");
}
