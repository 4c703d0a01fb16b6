#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpcfe/basis.hpp"
#include "hpcfe/cascade.hpp"
#include "hpcfe/design.hpp"
#include "hpcfe/uq.hpp"

namespace hpcfe::bench {

struct PedagogicalValues {
  double low;
  double high;
};

// g_low = sin(8 pi x), g_high = (x - sqrt 2) g_low^2 on [0, 1].
PedagogicalValues pedagogical(double x);

struct PlateParams {
  double a;   // length
  double b;   // breadth
  double t;   // thickness
  double e;   // Young's modulus
  double mu;  // Poisson's ratio
};

// Classical simply supported plate under uniaxial load:
// N = k pi^2 D / b^2, D = E t^3 / (12 (1 - mu^2)),
// k = min_{m = 1..10} (m b / a + a / (m b))^2.
double plate_buckling_load(const PlateParams& p);

/// Critical load at fidelity `level`.
///   1: the classical formula above.
///   2: level 1 * (1 + 0.08 sin(pi a / b) - 0.03 t / b)
///   3: level 2 * (1 - 0.02 mu / 0.3)
/// Levels 2 and 3 are synthetic stand-ins for finite-element results; real
/// data can replace them through the fidelity CSV path.
double buckling(int level, const PlateParams& p);

using LevelFunction = std::function<double(const Eigen::VectorXd&)>;

struct BenchmarkProblem {
  std::string name;
  InputBounds bounds;                           // training box
  std::vector<LevelFunction> levels;            // lowest fidelity first
  std::vector<std::string> level_labels;
  std::vector<uq::RandomVariableSpec> inputs;   // for propagation studies

  Eigen::Index dim() const { return bounds.dim(); }
  Eigen::VectorXd evaluate(std::size_t level_index, const Eigen::MatrixXd& x) const;
};

BenchmarkProblem pedagogical_problem();
BenchmarkProblem buckling_problem();
BenchmarkProblem problem_by_name(const std::string& name);

// Plate inputs with the reference distributions (a, b, t, E, mu).
std::vector<uq::RandomVariableSpec> plate_input_distributions();

// One multi-fidelity study: build the design, train the cascade and both
// single-fidelity baselines, evaluate all three against the top-level truth.
struct StudyConfig {
  std::string bench;
  DesignSpec design;
  std::vector<HpcfeConfig> level_configs;  // one per fidelity level
  HpcfeConfig single_fidelity;             // HF-only baseline
  bool modified = false;
  Eigen::Index test_points = 1000;   // grid size for 1-D problems
  Eigen::Index mcs_samples = 10000;  // propagation sample count otherwise
  Eigen::Index kde_points = 512;
  // Replaces the synthetic training data when set.
  std::optional<FidelityDataset> data_override;

  void validate(const BenchmarkProblem& problem) const;
};

// Defaults: pedagogical (50, 16) uniform_random, stage configs (s=5, M=2)
// then (s=1, M=2); buckling (210, 15, 8), stage configs (s=2, M=1) then
// (s=1, M=1), trend kept at every stage.
StudyConfig default_study(const std::string& bench, std::uint64_t seed = 0);

struct StudyResult {
  FidelityDataset data;
  DeepHpcfeModel model;
  Eigen::MatrixXd eval_x;          // test grid or Monte Carlo inputs
  Eigen::VectorXd truth;           // top-level function at eval_x
  Eigen::VectorXd mf_mean, mf_variance, hf_only, lf_only;
  uq::Metrics mf, hf, lf;
  std::uint64_t mcs_seed = 0;
  bool monte_carlo = false;
};

StudyResult run_study(const StudyConfig& config);

}  // namespace hpcfe::bench
