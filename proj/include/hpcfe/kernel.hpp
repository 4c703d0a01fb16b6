#pragma once

#include <optional>

#include <Eigen/Dense>

#include "hpcfe/error.hpp"

namespace hpcfe {

enum class KernelFamily { SquaredExponential };

struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  Eigen::VectorXd lengthscales;
  double nugget = 1e-8;

  void validate(Eigen::Index dim) const;
};

// Thrown when the residual handed to the likelihood search is identically
// zero; the caller is expected to drop the GP stage.
class ZeroResidualError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Training correlation matrix R(A, A) with the nugget on the diagonal.
Eigen::MatrixXd corr_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a);

// Cross correlation r(A, B); no nugget.
Eigen::MatrixXd corr_matrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b);

// Cholesky factor of R that refuses numerically singular matrices (a pivot
// below 1e-15 relative to the unit diagonal).
std::optional<Eigen::LLT<Eigen::MatrixXd>> factor_correlation(const Eigen::MatrixXd& r);

struct LengthscaleBounds {
  double lower = 1e-2;
  double upper = 1e2;
};

struct KernelFitOptions {
  LengthscaleBounds bounds;
  double nugget = 1e-8;
  int starts = 8;
  int refined_starts = 2;
  int max_sweeps = 4;
};

struct KernelFit {
  KernelSpec kernel;
  double sigma2 = 0.0;
  double objective = 0.0;
};

// (1/n) log|R| + log(d^T R^-1 d). +infinity when R cannot be factored.
double concentrated_objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                              const Eigen::VectorXd& lengthscales, double nugget);

/// Minimises the concentrated objective over the lengthscale box.
///
/// Deterministic: `starts` isotropic log-spaced seeds, then coordinate-wise
/// golden-section refinement in log space from the best `refined_starts`
/// seeds (ties broken by seed index). Passing `warm_start` refines from that
/// point alone, with the seeds still evaluated so the result never loses to
/// one of them. The returned sigma2 is d^T R^-1 d / n for the given `d`.
KernelFit fit_hyperparameters(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                              const KernelFitOptions& options = {},
                              const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

}  // namespace hpcfe
