#include "hpcfe/basis.hpp"

#include <cmath>
#include <sstream>

#include "hpcfe/error.hpp"

namespace hpcfe {

namespace {

// Advances `subset` to the next size-k combination of {0..n-1} in
// lexicographic order. Returns false after the last one.
bool next_combination(std::vector<int>& subset, int n) {
  const int k = static_cast<int>(subset.size());
  int i = k - 1;
  while (i >= 0 && subset[i] == n - k + i) --i;
  if (i < 0) return false;
  ++subset[i];
  for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
  return true;
}

bool next_degree_tuple(std::vector<int>& degrees, int max_degree) {
  for (int i = static_cast<int>(degrees.size()) - 1; i >= 0; --i) {
    if (degrees[i] < max_degree) {
      ++degrees[i];
      return true;
    }
    degrees[i] = 1;
  }
  return false;
}

}  // namespace

void BasisSpec::validate(Eigen::Index dim) const {
  if (degree < 1) throw ValidationError("basis degree must be >= 1");
  if (interaction_order < 1) throw ValidationError("interaction order must be >= 1");
  if (dim < 1) throw ValidationError("input dimension must be >= 1");
  if (interaction_order > dim) {
    std::ostringstream os;
    os << "interaction order " << interaction_order << " exceeds input dimension " << dim;
    throw ValidationError(os.str());
  }
}

BasisSpec BasisSpec::clamped_to(Eigen::Index dim) const {
  BasisSpec out = *this;
  if (dim >= 1 && out.interaction_order > dim) out.interaction_order = static_cast<int>(dim);
  return out;
}

void InputBounds::validate() const {
  if (lower.size() != upper.size()) throw ValidationError("bounds: lower/upper length mismatch");
  if (lower.size() == 0) throw ValidationError("bounds: empty");
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
      std::ostringstream os;
      os << "bounds: column " << j << " has lower >= upper";
      throw ValidationError(os.str());
    }
  }
}

InputBounds InputBounds::unit_box(Eigen::Index dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

NormalizedInputs normalize_inputs_lenient(const InputBounds& bounds, const Eigen::MatrixXd& x) {
  bounds.validate();
  if (x.cols() != bounds.dim()) {
    std::ostringstream os;
    os << "normalize: input has " << x.cols() << " columns, bounds have " << bounds.dim();
    throw ValidationError(os.str());
  }
  NormalizedInputs out;
  out.z.resize(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double width = bounds.upper[j] - bounds.lower[j];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = 2.0 * (x(i, j) - bounds.lower[j]) / width - 1.0;
      if (!std::isfinite(z)) throw ValidationError("normalize: non-finite input");
      if (std::abs(z) > 1.0 + 1e-12) out.extrapolated = true;
      out.z(i, j) = z;
    }
  }
  return out;
}

Eigen::MatrixXd normalize_inputs(const InputBounds& bounds, const Eigen::MatrixXd& x) {
  bounds.validate();
  if (x.cols() != bounds.dim()) {
    std::ostringstream os;
    os << "normalize: input has " << x.cols() << " columns, bounds have " << bounds.dim();
    throw ValidationError(os.str());
  }
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double tol = 1e-12 * std::max(1.0, bounds.upper[j] - bounds.lower[j]);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!(x(i, j) >= bounds.lower[j] - tol && x(i, j) <= bounds.upper[j] + tol)) {
        std::ostringstream os;
        os << "normalize: sample " << i << " column " << j << " value " << x(i, j)
           << " outside [" << bounds.lower[j] << ", " << bounds.upper[j] << "]";
        throw ValidationError(os.str());
      }
    }
  }
  Eigen::MatrixXd z = normalize_inputs_lenient(bounds, x).z;
  return z.cwiseMax(-1.0).cwiseMin(1.0);
}

double legendre_orthonormal(int m, double z) {
  if (m < 0) throw ValidationError("legendre: negative degree");
  double p_prev = 1.0;
  if (m == 0) return 1.0;
  double p = z;
  for (int k = 1; k < m; ++k) {
    const double next = ((2.0 * k + 1.0) * z * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = next;
  }
  return std::sqrt(2.0 * m + 1.0) * p;
}

std::vector<BasisTerm> enumerate_terms(const BasisSpec& spec, Eigen::Index dim) {
  spec.validate(dim);
  const int d = static_cast<int>(dim);
  std::vector<BasisTerm> terms;
  for (int k = 1; k <= spec.interaction_order; ++k) {
    std::vector<int> subset(k);
    for (int i = 0; i < k; ++i) subset[i] = i;
    do {
      std::vector<int> degrees(k, 1);
      do {
        terms.push_back({subset, degrees});
      } while (next_degree_tuple(degrees, spec.degree));
    } while (next_combination(subset, d));
  }
  return terms;
}

Eigen::Index column_count(const BasisSpec& spec, Eigen::Index dim) {
  spec.validate(dim);
  // sum_k C(d, k) s^k
  Eigen::Index total = 0;
  Eigen::Index binom = 1;
  Eigen::Index power = 1;
  for (Eigen::Index k = 1; k <= spec.interaction_order; ++k) {
    binom = binom * (dim - k + 1) / k;
    power *= spec.degree;
    total += binom * power;
  }
  return total;
}

std::string term_label(const BasisTerm& term) {
  std::ostringstream os;
  for (std::size_t k = 0; k < term.vars.size(); ++k) {
    if (k > 0) os << '*';
    os << "phi" << term.degrees[k] << "(z" << term.vars[k] + 1 << ')';
  }
  return os.str();
}

Eigen::MatrixXd build_design_matrix(const BasisSpec& spec, const Eigen::MatrixXd& z) {
  if (z.rows() == 0) throw ValidationError("design matrix: no samples");
  const auto terms = enumerate_terms(spec, z.cols());

  // Univariate values cached per (sample, variable, degree).
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  const int s = spec.degree;
  Eigen::MatrixXd uni(n, d * s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (int m = 1; m <= s; ++m) uni(i, j * s + (m - 1)) = legendre_orthonormal(m, z(i, j));
    }
  }

  Eigen::MatrixXd psi(n, static_cast<Eigen::Index>(terms.size()));
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const auto& t = terms[c];
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = 1.0;
      for (std::size_t k = 0; k < t.vars.size(); ++k) v *= uni(i, t.vars[k] * s + (t.degrees[k] - 1));
      psi(i, static_cast<Eigen::Index>(c)) = v;
    }
  }
  return psi;
}

}  // namespace hpcfe
