#pragma once

#include <optional>

#include <Eigen/Dense>

#include "hpcfe/basis.hpp"
#include "hpcfe/kernel.hpp"

namespace hpcfe {

struct HpcfeConfig {
  BasisSpec basis;
  KernelFitOptions kernel;
  // GP-only model: no f0, no polynomial trend.
  bool zero_mean_trend = false;
  // Relative singular-value cutoff for pseudo-inverses and rank decisions.
  double pinv_tolerance = 1e-6;
  // Relative tolerance below which two rows of [C | D] count as duplicates.
  double dedup_tolerance = 1e-12;
  // Kernel-fit / coefficient-solve alternations. 1 reproduces the one-pass
  // ordering (fit lengthscales on y - f0, then solve once).
  int max_iterations = 20;
  double coefficient_tolerance = 1e-8;
  // Homotopy weight matrix (q x q); identity when unset.
  std::optional<Eigen::MatrixXd> weight_matrix;

  void validate(Eigen::Index dim) const;
};

enum class ProjectorForm {
  PseudoInverse,  // P = I - pinv(C') C'
  LiteralInverse  // P = I - inv(C') C', square C' only
};

struct ReducedSystem {
  Eigen::MatrixXd c;
  Eigen::VectorXd d;
  std::vector<Eigen::Index> kept_rows;
};

// Drops zero rows, duplicate rows and linearly dependent rows of C alpha = D.
ReducedSystem reduce_normal_equations(const Eigen::MatrixXd& c, const Eigen::VectorXd& d,
                                      double dedup_tolerance, double rank_tolerance);

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rel_tolerance);

/// Homotopy-projected least-squares coefficients.
///
/// alpha0 = pinv(C') D'. With P the null-space projector of C' and
/// P W = U diag(D_r, 0) V^T, the trailing q - r singular directions give
/// alpha = V_t (U_t^T V_t)^-1 U_t^T alpha0. The correction only moves alpha0
/// inside null(C'), so ||C' alpha - D'|| equals the least-squares residual.
/// With W = I the result is the minimum-norm solution.
Eigen::VectorXd solve_coefficients(const Eigen::MatrixXd& c_reduced,
                                   const Eigen::VectorXd& d_reduced,
                                   const Eigen::MatrixXd& weight, double pinv_tolerance = 1e-12,
                                   ProjectorForm form = ProjectorForm::PseudoInverse);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;      // clamped at zero
  Eigen::VectorXd raw_variance;  // before clamping
  bool extrapolated = false;
};

// Everything needed to rebuild a trained model; this is what gets persisted.
struct HpcfeState {
  HpcfeConfig config;
  InputBounds bounds;
  double f0 = 0.0;
  Eigen::VectorXd alpha;
  KernelSpec kernel;
  double sigma2 = 0.0;
  bool gp_active = false;
  int iterations = 0;
  Eigen::MatrixXd z_train;
  Eigen::VectorXd y_train;
  Eigen::VectorXd residual;  // y - f0 - Psi alpha
};

class HpcfeModel {
public:
  explicit HpcfeModel(HpcfeState state);

  const HpcfeState& state() const { return state_; }
  Eigen::Index input_dim() const { return state_.bounds.dim(); }
  Eigen::Index sample_count() const { return state_.z_train.rows(); }
  double f0() const { return state_.f0; }
  const Eigen::VectorXd& alpha() const { return state_.alpha; }
  const KernelSpec& kernel() const { return state_.kernel; }
  double sigma2() const { return state_.sigma2; }
  bool gp_active() const { return state_.gp_active; }
  const Eigen::MatrixXd& design_matrix() const { return psi_; }
  const Eigen::LLT<Eigen::MatrixXd>& r_factor() const { return llt_; }

  // Reduced normal equations C' alpha = D' at the stored kernel and residual.
  ReducedSystem normal_equations() const;

  Prediction predict(const Eigen::MatrixXd& x) const;

private:
  HpcfeState state_;
  Eigen::MatrixXd psi_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;    // R^-1 residual
  Eigen::MatrixXd c_pinv_;     // pinv(Psi^T R^-1 Psi)
};

// Requires n >= min_samples, which defaults to d + 2. Cascade stages pass
// the dimension of the original inputs instead of the augmented one.
HpcfeModel train(const HpcfeConfig& config, const InputBounds& bounds, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, Eigen::Index min_samples = -1);

}  // namespace hpcfe
