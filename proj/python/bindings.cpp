#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hpcfe/bench.hpp"
#include "hpcfe/cascade.hpp"
#include "hpcfe/cli.hpp"
#include "hpcfe/error.hpp"
#include "hpcfe/hpcfe.hpp"
#include "hpcfe/io.hpp"
#include "hpcfe/twin.hpp"

namespace py = pybind11;
using namespace hpcfe;

namespace {

HpcfeConfig make_config(int degree, int order, double nugget, bool zero_mean_trend) {
  HpcfeConfig c;
  c.basis.degree = degree;
  c.basis.interaction_order = order;
  c.kernel.nugget = nugget;
  c.zero_mean_trend = zero_mean_trend;
  return c;
}

InputBounds bounds_from(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  InputBounds b{lower, upper};
  b.validate();
  return b;
}

py::tuple prediction_tuple(const Prediction& p) { return py::make_tuple(p.mean, p.variance); }

py::dict metrics_dict(const uq::Metrics& m) {
  py::dict d;
  d["rmse"] = m.rmse;
  d["ks_distance"] = m.ks_distance;
  d["mean_abs_error"] = m.mean_abs_error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid polynomial correlated function expansion surrogates";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<HpcfeConfig>(m, "Config")
      .def(py::init(&make_config), py::arg("degree") = 5, py::arg("order") = 2, py::arg("nugget") = 1e-8,
           py::arg("zero_mean_trend") = false)
      .def_property(
          "degree", [](const HpcfeConfig& c) { return c.basis.degree; },
          [](HpcfeConfig& c, int v) { c.basis.degree = v; })
      .def_property(
          "order", [](const HpcfeConfig& c) { return c.basis.interaction_order; },
          [](HpcfeConfig& c, int v) { c.basis.interaction_order = v; })
      .def_property(
          "nugget", [](const HpcfeConfig& c) { return c.kernel.nugget; },
          [](HpcfeConfig& c, double v) { c.kernel.nugget = v; })
      .def_readwrite("zero_mean_trend", &HpcfeConfig::zero_mean_trend)
      .def("to_json", [](const HpcfeConfig& c) { return io::to_json(c).dump(); });

  py::class_<HpcfeModel>(m, "Model")
      .def_property_readonly("f0", &HpcfeModel::f0)
      .def_property_readonly("alpha", &HpcfeModel::alpha)
      .def_property_readonly("sigma2", &HpcfeModel::sigma2)
      .def_property_readonly("lengthscales", [](const HpcfeModel& mo) { return mo.kernel().lengthscales; })
      .def("predict", [](const HpcfeModel& mo, const Eigen::MatrixXd& x) { return prediction_tuple(mo.predict(x)); },
           py::arg("x"), "Returns (mean, variance).")
      .def("to_json", [](const HpcfeModel& mo) { return io::to_json(mo).dump(); });

  m.def(
      "train",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& lower,
         const Eigen::VectorXd& upper, const HpcfeConfig& config) {
        return train(config, bounds_from(lower, upper), x, y);
      },
      py::arg("x"), py::arg("y"), py::arg("lower"), py::arg("upper"), py::arg("config") = HpcfeConfig{});

  py::class_<DeepHpcfeModel>(m, "Cascade")
      .def_property_readonly("levels", [](const DeepHpcfeModel& c) { return c.stages().size(); })
      .def(
          "predict",
          [](const DeepHpcfeModel& c, const Eigen::MatrixXd& x) {
            return prediction_tuple(c.predict(x).levels.back());
          },
          py::arg("x"), "Top-level (mean, variance).")
      .def("to_json", [](const DeepHpcfeModel& c) { return io::to_json(c).dump(); });

  m.def(
      "train_cascade",
      [](const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& levels, const Eigen::VectorXd& lower,
         const Eigen::VectorXd& upper, std::vector<HpcfeConfig> configs, bool modified) {
        FidelityDataset data;
        data.bounds = bounds_from(lower, upper);
        int label = 1;
        for (const auto& [x, y] : levels) {
          FidelityLevel lv;
          lv.level = label++;
          lv.x = x;
          lv.y = y;
          data.levels.push_back(std::move(lv));
        }
        CascadeOptions opts;
        if (!configs.empty()) opts.configs = std::move(configs);
        opts.modified = modified;
        return train_cascade(opts, data).model;
      },
      py::arg("levels"), py::arg("lower"), py::arg("upper"), py::arg("configs") = std::vector<HpcfeConfig>{},
      py::arg("modified") = false, "levels: list of (x, y) pairs, lowest fidelity first.");

  m.def(
      "load_model",
      [](const std::string& text) { return io::any_model_from_json(nlohmann::json::parse(text)); },
      py::arg("text"), "Loads a model or cascade document; single models become one-stage cascades.");

  m.def(
      "pedagogical",
      [](double x) {
        const auto v = bench::pedagogical(x);
        return py::make_tuple(v.low, v.high);
      },
      py::arg("x"), "Returns (low, high).");

  m.def(
      "buckling",
      [](int level, double a, double b, double t, double e, double mu) {
        return bench::buckling(level, bench::PlateParams{a, b, t, e, mu});
      },
      py::arg("level"), py::arg("a"), py::arg("b"), py::arg("t"), py::arg("e"), py::arg("mu"));

  m.def(
      "run_study",
      [](const std::string& name, std::uint64_t seed, std::vector<Eigen::Index> counts) {
        bench::StudyConfig cfg = bench::default_study(name, seed);
        if (!counts.empty()) cfg.design.counts = std::move(counts);
        const bench::StudyResult r = bench::run_study(cfg);
        py::dict d;
        d["multi_fidelity"] = metrics_dict(r.mf);
        d["hf_only"] = metrics_dict(r.hf);
        d["lf_only"] = metrics_dict(r.lf);
        return d;
      },
      py::arg("bench"), py::arg("seed") = 0, py::arg("counts") = std::vector<Eigen::Index>{});

  m.def(
      "twin_scenario",
      [](const std::string& quantity, const std::string& domain, Eigen::Index hf_points) {
        const twin::ScenarioConfig sc =
            twin::default_scenario(twin::quantity_from_string(quantity), twin::domain_from_string(domain), hf_points);
        const twin::SimulatedMeasurements meas = twin::simulate(sc);
        const twin::TwinState st = twin::track(sc.nominal, meas.lf, meas.hf, sc.track);
        const twin::TruthComparison cmp = twin::compare_with_truth(st, sc.schedule, sc.single_fidelity);
        py::dict d;
        d["t_s"] = st.query_times;
        d["mean"] = st.tracked_mean;
        d["truth"] = cmp.truth;
        d["mf_rmse"] = cmp.mf_rmse;
        d["sf_rmse"] = cmp.sf_rmse;
        return d;
      },
      py::arg("quantity"), py::arg("domain"), py::arg("hf_points"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"hpcfe"};
        for (const auto& a : args) argv.push_back(a.c_str());
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
