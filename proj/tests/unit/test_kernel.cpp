#include <gtest/gtest.h>

#include <cmath>

#include "hpcfe/kernel.hpp"

using namespace hpcfe;

namespace {
KernelSpec spec1(double ell, double nugget = 0.0) {
  KernelSpec k;
  k.lengthscales = Eigen::VectorXd::Constant(1, ell);
  k.nugget = nugget;
  return k;
}
}  // namespace

TEST(CorrMatrix, SinglePointIsOnePlusNugget) {
  Eigen::MatrixXd a(1, 3);
  a << 0.2, -0.4, 0.9;
  KernelSpec k;
  k.lengthscales = Eigen::VectorXd::Constant(3, 0.7);
  k.nugget = 1e-6;
  const Eigen::MatrixXd r = corr_matrix(k, a);
  ASSERT_EQ(r.rows(), 1);
  EXPECT_DOUBLE_EQ(r(0, 0), 1.0 + 1e-6);
}

TEST(CorrMatrix, UnitLengthscaleOffDiagonal) {
  Eigen::MatrixXd a(2, 1);
  a << 0.0, 1.0;
  const Eigen::MatrixXd r = corr_matrix(spec1(1.0), a);
  EXPECT_NEAR(r(0, 1), 0.6065307, 1e-7);
  EXPECT_NEAR(r(1, 0), std::exp(-0.5), 1e-15);
}

TEST(CorrMatrix, LongLengthscaleLimit) {
  Eigen::MatrixXd a(3, 1);
  a << -1.0, 0.0, 1.0;
  const Eigen::MatrixXd r = corr_matrix(spec1(1e8), a);
  EXPECT_NEAR((r - Eigen::MatrixXd::Ones(3, 3)).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(CorrMatrix, CrossHasNoNugget) {
  Eigen::MatrixXd a(2, 1);
  a << 0.0, 0.5;
  const Eigen::MatrixXd r = corr_matrix(spec1(0.3, 0.1), a, a);
  EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
}

TEST(CorrMatrix, Errors) {
  EXPECT_THROW(corr_matrix(spec1(1.0), Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 2)), ValidationError);
  EXPECT_THROW(corr_matrix(spec1(0.0), Eigen::MatrixXd::Zero(2, 1)), ValidationError);
  EXPECT_THROW(corr_matrix(spec1(-1.0), Eigen::MatrixXd::Zero(2, 1)), ValidationError);
}

TEST(CorrMatrix, SymmetricPositiveDefiniteWithSmallNugget) {
  Eigen::MatrixXd a(20, 2);
  for (int i = 0; i < 20; ++i) a.row(i) << std::sin(1.3 * i), std::cos(0.7 * i * i);
  KernelSpec k;
  k.lengthscales = Eigen::VectorXd::Constant(2, 0.8);
  k.nugget = 1e-10;
  const Eigen::MatrixXd r = corr_matrix(k, a);
  EXPECT_EQ((r - r.transpose()).cwiseAbs().maxCoeff(), 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(FitHyperparameters, SingleSampleRejected) {
  EXPECT_THROW(fit_hyperparameters(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1)), ValidationError);
}

TEST(FitHyperparameters, ZeroResidualSignalled) {
  Eigen::MatrixXd z(3, 1);
  z << -1, 0, 1;
  EXPECT_THROW(fit_hyperparameters(z, Eigen::VectorXd::Zero(3)), ZeroResidualError);
}

TEST(FitHyperparameters, DuplicateRowsWithoutNuggetAreSingular) {
  Eigen::MatrixXd z(3, 1);
  z << 0.5, 0.5, -0.2;
  Eigen::VectorXd d(3);
  d << 1, -1, 0.3;
  KernelFitOptions opts;
  opts.nugget = 0.0;
  EXPECT_THROW(fit_hyperparameters(z, d, opts), NumericalError);
}

TEST(FitHyperparameters, MatchesGridSearchOracle) {
  Eigen::MatrixXd z(2, 1);
  z << 0.0, 1.0;
  Eigen::VectorXd d(2);
  d << 1.0, -1.0;
  const KernelFitOptions opts;
  const KernelFit fit = fit_hyperparameters(z, d, opts);
  double grid_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    const double ell = std::exp(std::log(opts.bounds.lower) +
                                (std::log(opts.bounds.upper) - std::log(opts.bounds.lower)) * i / 199.0);
    grid_min = std::min(grid_min, concentrated_objective(z, d, Eigen::VectorXd::Constant(1, ell), opts.nugget));
  }
  EXPECT_NEAR(fit.objective, grid_min, 1e-6);
  EXPECT_NEAR(fit.objective, concentrated_objective(z, d, fit.kernel.lengthscales, opts.nugget), 1e-14);
}

TEST(FitHyperparameters, NeverWorseThanAnySeed) {
  Eigen::MatrixXd z(15, 2);
  Eigen::VectorXd d(15);
  for (int i = 0; i < 15; ++i) {
    z.row(i) << std::sin(2.1 * i), std::cos(1.7 * i);
    d[i] = std::sin(3 * z(i, 0)) + 0.5 * z(i, 1) * z(i, 1) - 0.2;
  }
  const KernelFitOptions opts;
  const KernelFit fit = fit_hyperparameters(z, d, opts);
  for (int s = 0; s < opts.starts; ++s) {
    const double t = std::log(opts.bounds.lower) +
                     s * (std::log(opts.bounds.upper) - std::log(opts.bounds.lower)) / (opts.starts - 1);
    EXPECT_LE(fit.objective, concentrated_objective(z, d, Eigen::VectorXd::Constant(2, std::exp(t)), opts.nugget));
  }
  EXPECT_TRUE((fit.kernel.lengthscales.array() >= opts.bounds.lower * (1 - 1e-12)).all());
  EXPECT_TRUE((fit.kernel.lengthscales.array() <= opts.bounds.upper * (1 + 1e-12)).all());
  EXPECT_GT(fit.sigma2, 0.0);
}

TEST(FitHyperparameters, ScalingInvariance) {
  Eigen::MatrixXd z(12, 1);
  Eigen::VectorXd d(12);
  for (int i = 0; i < 12; ++i) {
    z(i, 0) = -1.0 + 2.0 * i / 11.0;
    d[i] = std::sin(4 * z(i, 0));
  }
  const KernelFit base = fit_hyperparameters(z, d);
  const KernelFit scaled = fit_hyperparameters(z, 4.0 * d);
  EXPECT_EQ(base.kernel.lengthscales[0], scaled.kernel.lengthscales[0]);
  EXPECT_NEAR(scaled.objective - base.objective, 2.0 * std::log(4.0), 1e-12);
  EXPECT_NEAR(scaled.sigma2 / base.sigma2, 16.0, 1e-9);
  const KernelFit other = fit_hyperparameters(z, 3.7 * d);
  EXPECT_NEAR(other.kernel.lengthscales[0], base.kernel.lengthscales[0], 1e-6 * base.kernel.lengthscales[0]);
}

TEST(FitHyperparameters, Deterministic) {
  Eigen::MatrixXd z(10, 2);
  Eigen::VectorXd d(10);
  for (int i = 0; i < 10; ++i) {
    z.row(i) << std::cos(0.9 * i), std::sin(0.4 * i);
    d[i] = z(i, 0) * z(i, 1) + 0.1 * i;
  }
  const KernelFit a = fit_hyperparameters(z, d);
  const KernelFit b = fit_hyperparameters(z, d);
  EXPECT_EQ(a.kernel.lengthscales, b.kernel.lengthscales);
  EXPECT_EQ(a.objective, b.objective);
}
