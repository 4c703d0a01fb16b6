#include "hpcfe/uq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/rayleigh.hpp>

#include "hpcfe/error.hpp"
#include "hpcfe/rng.hpp"

namespace hpcfe::uq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::Normal: return "normal";
    case Distribution::Lognormal: return "lognormal";
    case Distribution::Rayleigh: return "rayleigh";
    case Distribution::Uniform: return "uniform";
  }
  return "unknown";
}

Distribution distribution_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "normal") return Distribution::Normal;
  if (s == "lognormal") return Distribution::Lognormal;
  if (s == "rayleigh") return Distribution::Rayleigh;
  if (s == "uniform") return Distribution::Uniform;
  throw ValidationError("unsupported distribution '" + name + "'");
}

void RandomVariableSpec::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(cov)) throw ValidationError("random variable: non-finite parameters");
  if (family == Distribution::Lognormal || family == Distribution::Rayleigh) {
    if (!(mean > 0.0)) throw ValidationError("random variable: " + to_string(family) + " needs a positive mean");
  }
  if (family == Distribution::Rayleigh) return;
  if (mean == 0.0) throw ValidationError("random variable: COV parameterisation needs a non-zero mean");
  if (!(cov > 0.0)) throw ValidationError("random variable: cov must be positive");
}

NativeParams to_native_params(const RandomVariableSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Distribution::Normal:
      return NormalParams{spec.mean, std::abs(spec.mean) * spec.cov};
    case Distribution::Lognormal: {
      const double sigma_ln = std::sqrt(std::log1p(spec.cov * spec.cov));
      return LognormalParams{std::log(spec.mean) - 0.5 * sigma_ln * sigma_ln, sigma_ln};
    }
    case Distribution::Rayleigh:
      return RayleighParams{spec.mean / std::sqrt(std::numbers::pi / 2.0)};
    case Distribution::Uniform: {
      const double half = std::sqrt(3.0) * spec.cov * std::abs(spec.mean);
      return UniformParams{spec.mean - half, spec.mean + half};
    }
  }
  throw ValidationError("random variable: unsupported family");
}

double stddev(const RandomVariableSpec& spec) {
  return std::visit(
      Overloaded{
          [](const NormalParams& p) { return p.sigma; },
          [](const LognormalParams& p) {
            return std::sqrt(std::expm1(p.sigma_ln * p.sigma_ln)) * std::exp(p.mu_ln + 0.5 * p.sigma_ln * p.sigma_ln);
          },
          [](const RayleighParams& p) { return p.scale * std::sqrt((4.0 - std::numbers::pi) / 2.0); },
          [](const UniformParams& p) { return (p.upper - p.lower) / std::sqrt(12.0); },
      },
      to_native_params(spec));
}

double quantile(const RandomVariableSpec& spec, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw ValidationError("quantile: probability must lie in (0, 1)");
  return std::visit(
      Overloaded{
          [&](const NormalParams& p) { return boost::math::quantile(boost::math::normal(p.mu, p.sigma), prob); },
          [&](const LognormalParams& p) {
            return boost::math::quantile(boost::math::lognormal(p.mu_ln, p.sigma_ln), prob);
          },
          [&](const RayleighParams& p) { return boost::math::quantile(boost::math::rayleigh(p.scale), prob); },
          [&](const UniformParams& p) { return p.lower + prob * (p.upper - p.lower); },
      },
      to_native_params(spec));
}

InputBounds training_bounds(const std::vector<RandomVariableSpec>& specs) {
  if (specs.empty()) throw ValidationError("training bounds: no variables");
  InputBounds b{Eigen::VectorXd(static_cast<Eigen::Index>(specs.size())),
                Eigen::VectorXd(static_cast<Eigen::Index>(specs.size()))};
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const double sd = stddev(specs[j]);
    const auto jj = static_cast<Eigen::Index>(j);
    b.lower[jj] = std::max(specs[j].mean - 3.0 * sd, quantile(specs[j], 1e-3));
    b.upper[jj] = specs[j].mean + 3.0 * sd;
  }
  return b;
}

SampleBatch sample(const std::vector<RandomVariableSpec>& specs, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample: n must be >= 1");
  if (specs.empty()) throw ValidationError("sample: no variables");
  SampleBatch batch;
  batch.seed = seed;
  batch.specs = specs;
  batch.values.resize(n, static_cast<Eigen::Index>(specs.size()));
  for (std::size_t j = 0; j < specs.size(); ++j) {
    const NativeParams params = to_native_params(specs[j]);
    const CounterRng rng(seed, static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::uint64_t>(i);
      batch.values(i, static_cast<Eigen::Index>(j)) = std::visit(
          Overloaded{
              [&](const NormalParams& p) { return p.mu + p.sigma * rng.normal(k); },
              [&](const LognormalParams& p) { return std::exp(p.mu_ln + p.sigma_ln * rng.normal(k)); },
              [&](const RayleighParams& p) { return p.scale * std::sqrt(-2.0 * std::log(rng.uniform(k))); },
              [&](const UniformParams& p) { return p.lower + rng.uniform(k) * (p.upper - p.lower); },
          },
          params);
    }
  }
  return batch;
}

double silverman_bandwidth(const Eigen::VectorXd& samples) {
  const Eigen::Index n = samples.size();
  if (n < 2) throw ValidationError("kde: at least 2 samples required");
  const double mean = samples.mean();
  const double var = (samples.array() - mean).square().sum() / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw ValidationError("kde: samples have zero variance");
  return 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
}

Eigen::VectorXd kde_grid(const Eigen::VectorXd& samples, Eigen::Index g) {
  if (g < 2) throw ValidationError("kde grid: need at least 2 points");
  const double h = silverman_bandwidth(samples);
  return Eigen::VectorXd::LinSpaced(g, samples.minCoeff() - 4.0 * h, samples.maxCoeff() + 4.0 * h);
}

Eigen::VectorXd kde_pdf(const Eigen::VectorXd& samples, const Eigen::VectorXd& grid) {
  const double h = silverman_bandwidth(samples);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  // Sorting lets each grid point sum only samples within 8.5 bandwidths.
  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = 8.5 * h;
  Eigen::VectorXd out(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), x - cutoff);
    auto hi = std::upper_bound(sorted.begin(), sorted.end(), x + cutoff);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double u = (x - *it) / h;
      s += std::exp(-0.5 * u * u);
    }
    out[i] = s * norm;
  }
  return out;
}

double trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ValidationError("trapezoid: length mismatch");
  double s = 0.0;
  for (Eigen::Index i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

namespace {
void require_same_nonempty(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
  if (a.size() == 0 || b.size() == 0) throw ValidationError(std::string(what) + ": empty input");
  if (a.size() != b.size()) throw ValidationError(std::string(what) + ": length mismatch");
}
}  // namespace

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& oracle) {
  require_same_nonempty(predicted, oracle, "rmse");
  return std::sqrt((predicted - oracle).squaredNorm() / static_cast<double>(predicted.size()));
}

double mean_abs_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& oracle) {
  require_same_nonempty(predicted, oracle, "mean_abs_error");
  return (predicted - oracle).cwiseAbs().mean();
}

double ks_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0) throw ValidationError("ks: empty input");
  std::vector<double> sa(a.data(), a.data() + a.size());
  std::vector<double> sb(b.data(), b.data() + b.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

Metrics compare(const Eigen::VectorXd& predicted, const Eigen::VectorXd& oracle) {
  return {rmse(predicted, oracle), ks_distance(predicted, oracle), mean_abs_error(predicted, oracle)};
}

}  // namespace hpcfe::uq
