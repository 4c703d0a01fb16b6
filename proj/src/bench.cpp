#include "hpcfe/bench.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hpcfe/error.hpp"

namespace hpcfe::bench {

PedagogicalValues pedagogical(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("pedagogical: x must lie in [0, 1]");
  const double low = std::sin(8.0 * std::numbers::pi * x);
  return {low, (x - std::numbers::sqrt2) * low * low};
}

double plate_buckling_load(const PlateParams& p) {
  if (!(p.a > 0.0 && p.b > 0.0 && p.t > 0.0 && p.e > 0.0))
    throw ValidationError("buckling: a, b, t and E must be positive");
  if (!(p.mu > 0.0 && p.mu < 0.5)) throw ValidationError("buckling: Poisson's ratio must lie in (0, 0.5)");
  double k = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= 10; ++m) {
    const double r = m * p.b / p.a + p.a / (m * p.b);
    k = std::min(k, r * r);
  }
  const double rigidity = p.e * p.t * p.t * p.t / (12.0 * (1.0 - p.mu * p.mu));
  return k * std::numbers::pi * std::numbers::pi * rigidity / (p.b * p.b);
}

double buckling(int level, const PlateParams& p) {
  const double lf = plate_buckling_load(p);
  if (level == 1) return lf;
  const double l2 = lf * (1.0 + 0.08 * std::sin(std::numbers::pi * p.a / p.b) - 0.03 * (p.t / p.b));
  if (level == 2) return l2;
  if (level == 3) return l2 * (1.0 - 0.02 * p.mu / 0.3);
  throw ValidationError("buckling: level must be 1, 2 or 3");
}

Eigen::VectorXd BenchmarkProblem::evaluate(std::size_t level_index, const Eigen::MatrixXd& x) const {
  if (level_index >= levels.size()) throw ValidationError("benchmark: no such fidelity level");
  if (x.cols() != dim()) throw ValidationError("benchmark: input dimension mismatch");
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = levels[level_index](x.row(i).transpose());
  return y;
}

std::vector<uq::RandomVariableSpec> plate_input_distributions() {
  using uq::Distribution;
  return {
      {Distribution::Normal, 3.0, 0.05, "a"},
      {Distribution::Normal, 2.0, 0.05, "b"},
      {Distribution::Rayleigh, 0.2, 0.075, "t"},
      {Distribution::Lognormal, 2e9, 0.1, "E"},
      {Distribution::Lognormal, 0.3, 0.025, "mu"},
  };
}

BenchmarkProblem pedagogical_problem() {
  BenchmarkProblem p;
  p.name = "pedagogical";
  p.bounds = InputBounds::unit_box(1);
  p.levels = {[](const Eigen::VectorXd& x) { return pedagogical(x[0]).low; },
              [](const Eigen::VectorXd& x) { return pedagogical(x[0]).high; }};
  p.level_labels = {"low", "high"};
  p.inputs = {{uq::Distribution::Uniform, 0.5, 1.0 / std::sqrt(3.0), "x"}};
  return p;
}

BenchmarkProblem buckling_problem() {
  BenchmarkProblem p;
  p.name = "buckling";
  p.inputs = plate_input_distributions();
  p.bounds = uq::training_bounds(p.inputs);
  for (int level = 1; level <= 3; ++level) {
    p.levels.push_back([level](const Eigen::VectorXd& x) {
      return buckling(level, PlateParams{x[0], x[1], x[2], x[3], x[4]});
    });
  }
  p.level_labels = {"LF", "HF1", "HF2"};
  return p;
}

BenchmarkProblem problem_by_name(const std::string& name) {
  if (name == "pedagogical") return pedagogical_problem();
  if (name == "buckling") return buckling_problem();
  throw ValidationError("unknown benchmark '" + name + "'");
}

}  // namespace hpcfe::bench

namespace hpcfe::bench {

void StudyConfig::validate(const BenchmarkProblem& problem) const {
  design.validate();
  const std::size_t levels = data_override ? data_override->levels.size() : design.counts.size();
  if (levels != problem.levels.size() && !data_override)
    throw ValidationError("study: benchmark '" + problem.name + "' has " + std::to_string(problem.levels.size()) +
                          " fidelity levels but the design lists " + std::to_string(design.counts.size()));
  if (level_configs.size() != 1 && level_configs.size() != levels)
    throw ValidationError("study: need one model config per level (or a single shared one)");
  if (test_points < 2 || mcs_samples < 2 || kde_points < 2) throw ValidationError("study: sample counts must be >= 2");
}

StudyConfig default_study(const std::string& bench, std::uint64_t seed) {
  StudyConfig c;
  c.bench = bench;
  c.design.kind = DesignKind::UniformRandom;
  c.design.nested = true;
  c.design.seed = seed;
  if (bench == "pedagogical") {
    c.design.counts = {50, 16};
    HpcfeConfig lf;
    HpcfeConfig hf;
    hf.basis.degree = 1;
    c.level_configs = {lf, hf};
    c.single_fidelity = lf;
  } else if (bench == "buckling") {
    c.design.counts = {210, 15, 8};
    HpcfeConfig lf;
    lf.basis.degree = 2;
    lf.basis.interaction_order = 1;
    HpcfeConfig up;
    up.basis.degree = 1;
    up.basis.interaction_order = 1;
    c.level_configs = {lf, up, up};
    c.single_fidelity = lf;
  } else {
    throw ValidationError("unknown benchmark '" + bench + "'");
  }
  return c;
}

StudyResult run_study(const StudyConfig& config) {
  const BenchmarkProblem problem = problem_by_name(config.bench);
  config.validate(problem);

  FidelityDataset data;
  if (config.data_override) {
    data = *config.data_override;
    if (data.dim() != problem.dim())
      throw ValidationError("study: override data has dimension " + std::to_string(data.dim()) + ", benchmark needs " +
                            std::to_string(problem.dim()));
  } else {
    data.bounds = problem.bounds;
    const std::vector<Eigen::MatrixXd> xs = nested_design(config.design, problem.bounds);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      FidelityLevel lv;
      lv.level = static_cast<int>(i) + 1;
      lv.label = problem.level_labels[i];
      lv.x = xs[i];
      lv.y = problem.evaluate(i, xs[i]);
      data.levels.push_back(std::move(lv));
    }
  }

  CascadeOptions options;
  options.configs = config.level_configs;
  options.modified = config.modified;
  CascadeTrainResult trained = train_cascade(options, data);

  StudyResult r{data, trained.model, {}, {}, {}, {}, {}, {}, {}, {}, {}, 0, false};
  if (problem.dim() == 1) {
    r.eval_x = Eigen::VectorXd::LinSpaced(config.test_points, problem.bounds.lower[0], problem.bounds.upper[0]);
  } else {
    r.monte_carlo = true;
    r.mcs_seed = config.design.seed ^ 0x5bd1e9955bd1e995ULL;
    r.eval_x = uq::sample(problem.inputs, config.mcs_samples, r.mcs_seed).values;
  }
  r.truth = problem.evaluate(problem.levels.size() - 1, r.eval_x);

  const CascadePrediction pred = r.model.predict(r.eval_x);
  r.mf_mean = pred.top().mean;
  r.mf_variance = pred.top().variance;
  r.lf_only = pred.levels.front().mean;
  const FidelityLevel& top = data.levels.back();
  r.hf_only = train(config.single_fidelity, data.bounds, top.x, top.y).predict(r.eval_x).mean;

  r.mf = uq::compare(r.mf_mean, r.truth);
  r.hf = uq::compare(r.hf_only, r.truth);
  r.lf = uq::compare(r.lf_only, r.truth);
  return r;
}

}  // namespace hpcfe::bench
