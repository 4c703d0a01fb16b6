#include "hpcfe/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hpcfe/error.hpp"
#include "hpcfe/rng.hpp"

namespace hpcfe {

void DesignSpec::validate() const {
  if (counts.empty()) throw ValidationError("design: no levels");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 1) throw ValidationError("design: counts must be positive");
    if (nested && i > 0 && counts[i] > counts[i - 1]) {
      std::ostringstream os;
      os << "design: nested level " << i + 1 << " asks for " << counts[i]
         << " points but its parent has " << counts[i - 1];
      throw ValidationError(os.str());
    }
  }
}

Eigen::MatrixXd uniform_grid(const InputBounds& bounds, Eigen::Index n) {
  bounds.validate();
  const Eigen::Index d = bounds.dim();
  if (n < 1) throw ValidationError("grid: need at least one point");
  Eigen::Index per_dim = static_cast<Eigen::Index>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
  Eigen::Index total = 1;
  for (Eigen::Index j = 0; j < d; ++j) total *= per_dim;
  if (total != n) {
    std::ostringstream os;
    os << "grid: " << n << " points is not a full tensor grid in " << d << " dimensions";
    throw ValidationError(os.str());
  }
  Eigen::MatrixXd out(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index rem = i;
    for (Eigen::Index j = d - 1; j >= 0; --j) {
      const Eigen::Index k = rem % per_dim;
      rem /= per_dim;
      const double t = per_dim > 1 ? static_cast<double>(k) / static_cast<double>(per_dim - 1) : 0.5;
      out(i, j) = bounds.lower[j] + t * (bounds.upper[j] - bounds.lower[j]);
    }
  }
  return out;
}

Eigen::MatrixXd uniform_random(const InputBounds& bounds, Eigen::Index n, std::uint64_t seed) {
  bounds.validate();
  if (n < 1) throw ValidationError("random design: need at least one point");
  Eigen::MatrixXd out(n, bounds.dim());
  for (Eigen::Index j = 0; j < bounds.dim(); ++j) {
    const CounterRng rng(seed, static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) = bounds.lower[j] + rng.uniform(static_cast<std::uint64_t>(i)) * (bounds.upper[j] - bounds.lower[j]);
    }
  }
  return out;
}

std::vector<Eigen::Index> maximin_subset(const Eigen::MatrixXd& points, const InputBounds& bounds,
                                         Eigen::Index count) {
  const Eigen::Index n = points.rows();
  if (count > n) throw ValidationError("maximin: subset larger than parent set");
  if (count < 1) throw ValidationError("maximin: empty subset requested");
  const Eigen::MatrixXd z = normalize_inputs_lenient(bounds, points).z;
  std::vector<Eigen::Index> chosen{0};
  Eigen::VectorXd dist(n);
  for (Eigen::Index i = 0; i < n; ++i) dist[i] = (z.row(i) - z.row(0)).squaredNorm();
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  taken[0] = true;
  while (static_cast<Eigen::Index>(chosen.size()) < count) {
    Eigen::Index best = -1;
    double best_dist = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (dist[i] > best_dist) {
        best_dist = dist[i];
        best = i;
      }
    }
    chosen.push_back(best);
    taken[static_cast<std::size_t>(best)] = true;
    for (Eigen::Index i = 0; i < n; ++i) dist[i] = std::min(dist[i], (z.row(i) - z.row(best)).squaredNorm());
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<Eigen::MatrixXd> nested_design(const DesignSpec& spec, const InputBounds& bounds) {
  spec.validate();
  bounds.validate();
  auto generate = [&](Eigen::Index n, std::uint64_t seed) {
    return spec.kind == DesignKind::UniformGrid ? uniform_grid(bounds, n)
                                                : uniform_random(bounds, n, seed);
  };
  std::vector<Eigen::MatrixXd> levels;
  levels.push_back(generate(spec.counts[0], spec.seed));
  for (std::size_t i = 1; i < spec.counts.size(); ++i) {
    if (spec.nested) {
      const auto& parent = levels.back();
      const auto idx = maximin_subset(parent, bounds, spec.counts[i]);
      Eigen::MatrixXd child(static_cast<Eigen::Index>(idx.size()), parent.cols());
      for (std::size_t k = 0; k < idx.size(); ++k) child.row(static_cast<Eigen::Index>(k)) = parent.row(idx[k]);
      levels.push_back(std::move(child));
    } else {
      // A hashed seed; offsetting the seed linearly would replay level 1's
      // counters shifted by i.
      const std::uint64_t level_seed = CounterRng(spec.seed, 0x6c6576656cULL + i).bits(0);
      levels.push_back(generate(spec.counts[i], level_seed));
    }
  }
  return levels;
}

}  // namespace hpcfe
