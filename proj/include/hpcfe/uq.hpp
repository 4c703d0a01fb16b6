#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hpcfe/basis.hpp"

namespace hpcfe::uq {

enum class Distribution { Normal, Lognormal, Rayleigh, Uniform };

std::string to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

// Mean and coefficient of variation. For Uniform the COV fixes the half
// width (sqrt(3) * cov * mean); Rayleigh has a fixed COV, so `cov` is ignored.
struct RandomVariableSpec {
  Distribution family = Distribution::Normal;
  double mean = 0.0;
  double cov = 0.0;
  std::string name;

  void validate() const;
};

struct NormalParams { double mu, sigma; };
struct LognormalParams { double mu_ln, sigma_ln; };
struct RayleighParams { double scale; };
struct UniformParams { double lower, upper; };
using NativeParams = std::variant<NormalParams, LognormalParams, RayleighParams, UniformParams>;

NativeParams to_native_params(const RandomVariableSpec& spec);

// Standard deviation of the distribution actually sampled.
double stddev(const RandomVariableSpec& spec);
double quantile(const RandomVariableSpec& spec, double p);

// mean +/- 3 sd per variable, lower end clipped to the 0.1% quantile so
// positive variables keep positive support.
InputBounds training_bounds(const std::vector<RandomVariableSpec>& specs);

struct SampleBatch {
  Eigen::MatrixXd values;
  std::uint64_t seed = 0;
  std::vector<RandomVariableSpec> specs;
};

// Column j draws from CounterRng(seed, stream = j); reproducible per seed.
SampleBatch sample(const std::vector<RandomVariableSpec>& specs, Eigen::Index n, std::uint64_t seed);

// Silverman's rule, 1.06 * sd * n^(-1/5).
double silverman_bandwidth(const Eigen::VectorXd& samples);

// g equally spaced points from min - 4h to max + 4h.
Eigen::VectorXd kde_grid(const Eigen::VectorXd& samples, Eigen::Index g);

Eigen::VectorXd kde_pdf(const Eigen::VectorXd& samples, const Eigen::VectorXd& grid);

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& oracle);
double mean_abs_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& oracle);
// Two-sample Kolmogorov-Smirnov statistic; lengths may differ.
double ks_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Metrics {
  double rmse = 0.0;
  double ks_distance = 0.0;
  double mean_abs_error = 0.0;
};

Metrics compare(const Eigen::VectorXd& predicted, const Eigen::VectorXd& oracle);

}  // namespace hpcfe::uq
