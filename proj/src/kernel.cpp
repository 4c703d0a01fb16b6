#include "hpcfe/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace hpcfe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lengthscales(const Eigen::VectorXd& ls) {
  for (Eigen::Index k = 0; k < ls.size(); ++k) {
    if (!(ls[k] > 0.0) || !std::isfinite(ls[k])) {
      std::ostringstream os;
      os << "kernel: lengthscale " << k << " must be positive and finite, got " << ls[k];
      throw ValidationError(os.str());
    }
  }
}

Eigen::MatrixXd se_cross(const Eigen::VectorXd& ls, const Eigen::MatrixXd& a,
                         const Eigen::MatrixXd& b) {
  const Eigen::VectorXd inv = (2.0 * ls.array().square()).inverse().matrix();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double diff = a(i, k) - b(j, k);
        s += diff * diff * inv[k];
      }
      out(i, j) = std::exp(-s);
    }
  }
  return out;
}

Eigen::MatrixXd se_self(const Eigen::VectorXd& ls, const Eigen::MatrixXd& a, double nugget) {
  const Eigen::Index n = a.rows();
  const Eigen::VectorXd inv = (2.0 * ls.array().square()).inverse().matrix();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = 1.0 + nugget;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double diff = a(i, k) - a(j, k);
        s += diff * diff * inv[k];
      }
      out(i, j) = out(j, i) = std::exp(-s);
    }
  }
  return out;
}

struct Candidate {
  Eigen::VectorXd log_ls;
  double value = kInf;
};

class Objective {
public:
  Objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& d, double nugget)
      : z_(z), d_(d), nugget_(nugget) {}

  double operator()(const Eigen::VectorXd& log_ls) const {
    return concentrated_objective(z_, d_, log_ls.array().exp().matrix(), nugget_);
  }

private:
  const Eigen::MatrixXd& z_;
  const Eigen::VectorXd& d_;
  double nugget_;
};

// Golden-section search on coordinate k within [lo, hi]; returns the best
// point found, never worse than `start`.
Candidate golden_line(const Objective& f, const Candidate& start, Eigen::Index k, double lo,
                      double hi) {
  constexpr double kRatio = 0.6180339887498949;
  Candidate best = start;
  Eigen::VectorXd x = start.log_ls;
  auto eval = [&](double t) {
    x[k] = t;
    const double v = f(x);
    if (v < best.value) {
      best.value = v;
      best.log_ls = x;
    }
    return v;
  };
  double a = lo;
  double b = hi;
  double c = b - kRatio * (b - a);
  double e = a + kRatio * (b - a);
  double fc = eval(c);
  double fe = eval(e);
  while (b - a > 1e-4) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kRatio * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kRatio * (b - a);
      fe = eval(e);
    }
  }
  return best;
}

Candidate refine(const Objective& f, Candidate cand, double log_lo, double log_hi,
                 double half_width, int max_sweeps) {
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double before = cand.value;
    for (Eigen::Index k = 0; k < cand.log_ls.size(); ++k) {
      const double lo = std::max(log_lo, cand.log_ls[k] - half_width);
      const double hi = std::min(log_hi, cand.log_ls[k] + half_width);
      cand = golden_line(f, cand, k, lo, hi);
    }
    if (!(before - cand.value > 1e-9 * std::max(1.0, std::abs(before)))) break;
  }
  return cand;
}

}  // namespace

void KernelSpec::validate(Eigen::Index dim) const {
  if (lengthscales.size() != dim) {
    std::ostringstream os;
    os << "kernel: " << lengthscales.size() << " lengthscales for dimension " << dim;
    throw ValidationError(os.str());
  }
  check_lengthscales(lengthscales);
  if (!(nugget >= 0.0)) throw ValidationError("kernel: nugget must be non-negative");
}

Eigen::MatrixXd corr_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a) {
  spec.validate(a.cols());
  return se_self(spec.lengthscales, a, spec.nugget);
}

Eigen::MatrixXd corr_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ValidationError("kernel: input column counts differ");
  spec.validate(a.cols());
  return se_cross(spec.lengthscales, a, b);
}

std::optional<Eigen::LLT<Eigen::MatrixXd>> factor_correlation(const Eigen::MatrixXd& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  if (!(diag.array().square().minCoeff() > 1e-15)) return std::nullopt;
  return llt;
}

double concentrated_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                              const Eigen::VectorXd& lengthscales, double nugget) {
  const auto llt = factor_correlation(se_self(lengthscales, z, nugget));
  if (!llt) return kInf;
  const double n = static_cast<double>(z.rows());
  const double logdet = 2.0 * llt->matrixLLT().diagonal().array().log().sum();
  const Eigen::VectorXd w = llt->matrixL().solve(d);
  const double quad = w.squaredNorm();
  if (!(quad > 0.0)) return kInf;
  return logdet / n + std::log(quad);
}

KernelFit fit_hyperparameters(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                              const KernelFitOptions& options,
                              const std::optional<Eigen::VectorXd>& warm_start) {
  const Eigen::Index n = z.rows();
  const Eigen::Index dim = z.cols();
  if (n < 2) throw ValidationError("kernel fit: at least 2 samples required");
  if (d.size() != n) throw ValidationError("kernel fit: target length does not match samples");
  if (dim < 1) throw ValidationError("kernel fit: zero input dimension");
  if (!(options.bounds.lower > 0.0 && options.bounds.lower < options.bounds.upper))
    throw ValidationError("kernel fit: invalid lengthscale bounds");
  if (options.starts < 1) throw ValidationError("kernel fit: need at least one start");
  if (!(options.nugget >= 0.0)) throw ValidationError("kernel fit: negative nugget");
  if (d.cwiseAbs().maxCoeff() == 0.0)
    throw ZeroResidualError("kernel fit: residual is identically zero");

  const double log_lo = std::log(options.bounds.lower);
  const double log_hi = std::log(options.bounds.upper);
  const double spacing =
      options.starts > 1 ? (log_hi - log_lo) / (options.starts - 1) : (log_hi - log_lo);
  const Objective f(z, d, options.nugget);

  std::vector<Candidate> seeds(static_cast<std::size_t>(options.starts));
  for (int s = 0; s < options.starts; ++s) {
    const double t = options.starts > 1 ? log_lo + s * spacing : 0.5 * (log_lo + log_hi);
    seeds[s].log_ls = Eigen::VectorXd::Constant(dim, t);
    seeds[s].value = f(seeds[s].log_ls);
  }

  std::vector<std::size_t> order(seeds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return seeds[a].value < seeds[b].value; });

  Candidate best = seeds[order.front()];
  if (warm_start) {
    if (warm_start->size() != dim) throw ValidationError("kernel fit: warm start dimension");
    Candidate w;
    w.log_ls = warm_start->array().max(options.bounds.lower).min(options.bounds.upper).log();
    w.value = f(w.log_ls);
    if (std::isfinite(w.value)) {
      w = refine(f, w, log_lo, log_hi, 0.5 * spacing, options.max_sweeps);
      if (w.value < best.value) best = w;
    }
  } else {
    const std::size_t count =
        std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(1, options.refined_starts)));
    for (std::size_t i = 0; i < count; ++i) {
      const Candidate& seed = seeds[order[i]];
      if (!std::isfinite(seed.value)) break;
      const Candidate r = refine(f, seed, log_lo, log_hi, spacing, options.max_sweeps);
      if (r.value < best.value) best = r;
    }
  }

  if (!std::isfinite(best.value)) {
    throw NumericalError(
        "kernel fit: correlation matrix is numerically singular for every lengthscale "
        "(duplicate inputs?)");
  }

  KernelFit fit;
  fit.kernel.lengthscales = best.log_ls.array().exp();
  fit.kernel.nugget = options.nugget;
  fit.objective = best.value;
  const auto llt = factor_correlation(se_self(fit.kernel.lengthscales, z, options.nugget));
  fit.sigma2 = llt->matrixL().solve(d).squaredNorm() / static_cast<double>(n);
  return fit;
}

}  // namespace hpcfe
