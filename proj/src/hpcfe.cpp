#include "hpcfe/hpcfe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hpcfe/error.hpp"

namespace hpcfe {

namespace {

Eigen::Index numerical_rank(const Eigen::VectorXd& singular_values, double rel_tolerance) {
  if (singular_values.size() == 0) return 0;
  const double smax = singular_values.maxCoeff();
  if (!(smax > 0.0)) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values[i] > rel_tolerance * smax) ++r;
  return r;
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void HpcfeConfig::validate(Eigen::Index dim) const {
  if (!zero_mean_trend) basis.clamped_to(dim).validate(dim);
  if (!(pinv_tolerance > 0.0 && pinv_tolerance < 1.0))
    throw ValidationError("pinv_tolerance must lie in (0, 1)");
  if (!(dedup_tolerance >= 0.0)) throw ValidationError("dedup_tolerance must be non-negative");
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(kernel.nugget >= 0.0)) throw ValidationError("nugget must be non-negative");
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rel_tolerance) {
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::Index r = numerical_rank(s, rel_tolerance);
  if (r == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  return svd.matrixV().leftCols(r) * s.head(r).cwiseInverse().asDiagonal() *
         svd.matrixU().leftCols(r).transpose();
}

ReducedSystem reduce_normal_equations(const Eigen::MatrixXd& c, const Eigen::VectorXd& d,
                                      double dedup_tolerance, double rank_tolerance) {
  if (c.rows() != d.size()) throw ValidationError("normal equations: row count mismatch");
  const Eigen::Index m = c.rows();
  Eigen::MatrixXd aug(m, c.cols() + 1);
  aug << c, d;
  const Eigen::VectorXd norms = aug.rowwise().norm();
  const double max_norm = m > 0 ? norms.maxCoeff() : 0.0;

  std::vector<Eigen::Index> candidates;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(norms[i] > dedup_tolerance * max_norm)) continue;
    bool duplicate = false;
    for (Eigen::Index j : candidates) {
      const double diff = (aug.row(i) - aug.row(j)).norm();
      if (diff <= dedup_tolerance * std::max(norms[i], norms[j])) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) candidates.push_back(i);
  }

  ReducedSystem out;
  if (candidates.empty()) {
    out.c.resize(0, c.cols());
    out.d.resize(0);
    return out;
  }

  // Rank-revealing pivoted QR on the transposed candidate rows picks a
  // maximal independent subset of equations.
  Eigen::MatrixXd ct(c.cols(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t k = 0; k < candidates.size(); ++k) ct.col(static_cast<Eigen::Index>(k)) = c.row(candidates[k]).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ct);
  qr.setThreshold(rank_tolerance);
  const Eigen::Index rank = qr.rank();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < rank; ++k) kept.push_back(candidates[qr.colsPermutation().indices()[k]]);
  std::sort(kept.begin(), kept.end());

  out.c.resize(static_cast<Eigen::Index>(kept.size()), c.cols());
  out.d.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.c.row(static_cast<Eigen::Index>(k)) = c.row(kept[k]);
    out.d[static_cast<Eigen::Index>(k)] = d[kept[k]];
  }
  out.kept_rows = std::move(kept);
  return out;
}

Eigen::VectorXd solve_coefficients(const Eigen::MatrixXd& c_reduced,
                                   const Eigen::VectorXd& d_reduced,
                                   const Eigen::MatrixXd& weight, double pinv_tolerance,
                                   ProjectorForm form) {
  const Eigen::Index q = c_reduced.cols();
  if (c_reduced.rows() != d_reduced.size())
    throw ValidationError("solve_coefficients: C' and D' row counts differ");
  if (weight.rows() != q || weight.cols() != q) {
    std::ostringstream os;
    os << "solve_coefficients: weight matrix is " << weight.rows() << "x" << weight.cols()
       << ", expected " << q << "x" << q;
    throw ValidationError(os.str());
  }
  if (c_reduced.size() == 0 || c_reduced.cwiseAbs().maxCoeff() == 0.0)
    throw NumericalError("solve_coefficients: C' is identically zero");
  if (!all_finite(c_reduced) || !all_finite(d_reduced))
    throw NumericalError("solve_coefficients: non-finite normal equations");

  const Eigen::MatrixXd c_pinv = pseudo_inverse(c_reduced, pinv_tolerance);
  const Eigen::VectorXd alpha0 = c_pinv * d_reduced;

  Eigen::MatrixXd projector;
  if (form == ProjectorForm::LiteralInverse) {
    if (c_reduced.rows() != q)
      throw ValidationError("solve_coefficients: literal inverse needs a square C'");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c_reduced);
    if (!lu.isInvertible()) throw NumericalError("solve_coefficients: C' is singular");
    projector = Eigen::MatrixXd::Identity(q, q) - lu.inverse() * c_reduced;
  } else {
    projector = Eigen::MatrixXd::Identity(q, q) - c_pinv * c_reduced;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(projector * weight, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // P W has unit-scale entries, so an absolute cutoff keeps P = 0 at rank 0.
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index r = 0;
  const double scale = std::max(1.0, weight.norm());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * scale) ++r;
  if (r == 0) return alpha0;
  if (r == q) throw NumericalError("solve_coefficients: P W has full rank; no admissible direction");

  const Eigen::MatrixXd u_t = svd.matrixU().rightCols(q - r);
  const Eigen::MatrixXd v_t = svd.matrixV().rightCols(q - r);
  const Eigen::MatrixXd m = u_t.transpose() * v_t;
  const Eigen::VectorXd rhs = u_t.transpose() * alpha0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
  return v_t * cod.solve(rhs);
}

HpcfeModel::HpcfeModel(HpcfeState state) : state_(std::move(state)) {
  auto& s = state_;
  s.bounds.validate();
  const Eigen::Index n = s.z_train.rows();
  const Eigen::Index dim = s.bounds.dim();
  s.config.validate(dim);
  if (s.z_train.cols() != dim) throw ValidationError("model: training inputs do not match bounds");
  if (s.y_train.size() != n || s.residual.size() != n)
    throw ValidationError("model: training outputs/residuals length mismatch");
  s.kernel.validate(dim);
  if (!(s.sigma2 >= 0.0)) throw ValidationError("model: sigma2 must be non-negative");

  if (s.config.zero_mean_trend) {
    psi_.resize(n, 0);
  } else {
    psi_ = build_design_matrix(s.config.basis.clamped_to(dim), s.z_train);
  }
  if (s.alpha.size() != psi_.cols()) throw ValidationError("model: coefficient count mismatch");

  const auto llt = factor_correlation(corr_matrix(s.kernel, s.z_train));
  if (!llt) throw NumericalError("model: training correlation matrix is singular");
  llt_ = *llt;
  weights_ = s.gp_active ? Eigen::VectorXd(llt_.solve(s.residual)) : Eigen::VectorXd::Zero(n);
  if (psi_.cols() > 0) {
    const Eigen::MatrixXd c = psi_.transpose() * llt_.solve(psi_);
    c_pinv_ = pseudo_inverse(c, s.config.pinv_tolerance);
  }
}

ReducedSystem HpcfeModel::normal_equations() const {
  const Eigen::VectorXd d = state_.y_train.array() - state_.f0;
  const Eigen::MatrixXd rinv_psi = llt_.solve(psi_);
  const Eigen::MatrixXd c = psi_.transpose() * rinv_psi;
  const Eigen::VectorXd rhs = rinv_psi.transpose() * d;
  return reduce_normal_equations(c, rhs, state_.config.dedup_tolerance,
                                 state_.config.pinv_tolerance);
}

Prediction HpcfeModel::predict(const Eigen::MatrixXd& x) const {
  const auto& s = state_;
  if (x.cols() != input_dim()) {
    std::ostringstream os;
    os << "predict: query has " << x.cols() << " columns, model expects " << input_dim();
    throw ValidationError(os.str());
  }
  const auto norm = normalize_inputs_lenient(s.bounds, x);
  const Eigen::Index m = x.rows();

  Prediction out;
  out.extrapolated = norm.extrapolated;
  out.mean = Eigen::VectorXd::Constant(m, s.f0);
  Eigen::MatrixXd phi;
  if (psi_.cols() > 0) {
    phi = build_design_matrix(s.config.basis.clamped_to(input_dim()), norm.z);
    out.mean += phi * s.alpha;
  }
  const Eigen::MatrixXd r = corr_matrix(s.kernel, norm.z, s.z_train);  // m x n
  if (s.gp_active) out.mean += r * weights_;

  out.raw_variance = Eigen::VectorXd::Zero(m);
  if (s.gp_active && s.sigma2 > 0.0) {
    const Eigen::MatrixXd rinv_rt = llt_.solve(r.transpose());  // n x m
    Eigen::VectorXd v = 1.0 - (r.transpose().array() * rinv_rt.array()).colwise().sum().transpose();
    if (psi_.cols() > 0) {
      const Eigen::MatrixXd u = psi_.transpose() * rinv_rt - phi.transpose();  // q x m
      v += (u.array() * (c_pinv_ * u).array()).colwise().sum().transpose().matrix();
    }
    out.raw_variance = s.sigma2 * v;
  }
  out.variance = out.raw_variance.cwiseMax(0.0);
  return out;
}

HpcfeModel train(const HpcfeConfig& config, const InputBounds& bounds, const Eigen::MatrixXd& x,
                 const Eigen::VectorXd& y, Eigen::Index min_samples) {
  bounds.validate();
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  if (dim != bounds.dim()) throw ValidationError("train: input dimension does not match bounds");
  if (y.size() != n) throw ValidationError("train: output length does not match inputs");
  const Eigen::Index required = min_samples < 0 ? dim + 2 : min_samples;
  if (n < required) {
    std::ostringstream os;
    os << "train: insufficient samples (" << n << " < " << required << ")";
    throw ValidationError(os.str());
  }
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("train: non-finite training data");
  config.validate(dim);

  HpcfeState s;
  s.config = config;
  s.bounds = bounds;
  s.z_train = normalize_inputs(bounds, x);
  s.y_train = y;
  s.f0 = config.zero_mean_trend ? 0.0 : y.mean();
  const Eigen::VectorXd d = y.array() - s.f0;

  const Eigen::MatrixXd psi = config.zero_mean_trend
                                  ? Eigen::MatrixXd(n, 0)
                                  : build_design_matrix(config.basis.clamped_to(dim), s.z_train);
  const Eigen::Index q = psi.cols();
  s.alpha = Eigen::VectorXd::Zero(q);
  s.kernel.lengthscales = Eigen::VectorXd::Ones(dim);
  s.kernel.nugget = config.kernel.nugget;

  const double d_scale = d.cwiseAbs().maxCoeff();
  if (d_scale == 0.0) {
    // Constant data: the mean carries everything.
    s.residual = d;
    s.gp_active = false;
    s.iterations = 0;
    return HpcfeModel(std::move(s));
  }

  Eigen::MatrixXd weight;
  if (q > 0) {
    weight = config.weight_matrix ? *config.weight_matrix : Eigen::MatrixXd::Identity(q, q);
    if (weight.rows() != q || weight.cols() != q)
      throw ValidationError("train: weight matrix does not match the basis size");
  }

  KernelFit fit = fit_hyperparameters(s.z_train, d, config.kernel);
  Eigen::VectorXd residual = d;
  bool gp_active = true;
  int iteration = 0;
  for (iteration = 1; iteration <= config.max_iterations; ++iteration) {
    if (q == 0) break;
    const auto llt = factor_correlation(corr_matrix(fit.kernel, s.z_train));
    if (!llt) throw NumericalError("train: correlation matrix is singular (duplicate inputs?)");
    const Eigen::MatrixXd rinv_psi = llt->solve(psi);
    const Eigen::MatrixXd c = psi.transpose() * rinv_psi;
    const Eigen::VectorXd rhs = rinv_psi.transpose() * d;
    const ReducedSystem reduced =
        reduce_normal_equations(c, rhs, config.dedup_tolerance, config.pinv_tolerance);
    if (reduced.c.rows() == 0) throw NumericalError("train: reduced normal equations are empty");
    const Eigen::VectorXd alpha =
        solve_coefficients(reduced.c, reduced.d, weight, config.pinv_tolerance);
    const double change = (alpha - s.alpha).norm() / std::max(1.0, alpha.norm());
    s.alpha = alpha;
    residual = d - psi * alpha;

    if (residual.cwiseAbs().maxCoeff() <= 1e-12 * d_scale) {
      // The trend interpolates the data; nothing is left for the GP.
      gp_active = false;
      break;
    }
    if (iteration > 1 && change < config.coefficient_tolerance) break;
    if (iteration == config.max_iterations) break;
    KernelFit next = fit_hyperparameters(s.z_train, residual, config.kernel, fit.kernel.lengthscales);
    if ((next.kernel.lengthscales - fit.kernel.lengthscales).norm() == 0.0) break;
    fit = std::move(next);
  }
  s.iterations = std::min(iteration, config.max_iterations);
  s.kernel = fit.kernel;
  s.residual = residual;
  s.gp_active = gp_active;

  if (gp_active) {
    const auto llt = factor_correlation(corr_matrix(s.kernel, s.z_train));
    if (!llt) throw NumericalError("train: correlation matrix is singular (duplicate inputs?)");
    s.sigma2 = llt->matrixL().solve(residual).squaredNorm() / static_cast<double>(n);
  } else {
    s.sigma2 = 0.0;
  }
  return HpcfeModel(std::move(s));
}

}  // namespace hpcfe
