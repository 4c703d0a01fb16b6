#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hpcfe {

enum class PolynomialFamily { Legendre };

// Extended PCFE basis: univariate orthonormal polynomials up to `degree` and
// their tensor products over variable subsets of size <= `interaction_order`.
struct BasisSpec {
  PolynomialFamily family = PolynomialFamily::Legendre;
  int degree = 5;
  int interaction_order = 2;

  void validate(Eigen::Index dim) const;
  // Copy with the interaction order capped at `dim`.
  BasisSpec clamped_to(Eigen::Index dim) const;
};

struct InputBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  void validate() const;
  static InputBounds unit_box(Eigen::Index dim);
};

// One column of the design matrix: product of phi_{degrees[k]}(z_{vars[k]}).
struct BasisTerm {
  std::vector<int> vars;
  std::vector<int> degrees;
};

struct NormalizedInputs {
  Eigen::MatrixXd z;
  bool extrapolated = false;
};

// Affine map of each column onto [-1, 1]. Throws ValidationError on a
// dimension mismatch or on any sample outside the bounds.
Eigen::MatrixXd normalize_inputs(const InputBounds& bounds, const Eigen::MatrixXd& x);

// Same map without the range check; flags samples that land outside [-1, 1].
NormalizedInputs normalize_inputs_lenient(const InputBounds& bounds, const Eigen::MatrixXd& x);

/// Orthonormal Legendre polynomial on [-1, 1] under the weight 1/2:
/// sqrt(2m + 1) * P_m(z).
double legendre_orthonormal(int m, double z);

/// All basis terms in column order: variable subsets by increasing size, each
/// size in lexicographic order of the variable indices, then degree tuples in
/// lexicographic order.
std::vector<BasisTerm> enumerate_terms(const BasisSpec& spec, Eigen::Index dim);

Eigen::Index column_count(const BasisSpec& spec, Eigen::Index dim);

std::string term_label(const BasisTerm& term);

// n x q matrix Psi; the constant term is not included.
Eigen::MatrixXd build_design_matrix(const BasisSpec& spec, const Eigen::MatrixXd& z);

}  // namespace hpcfe
