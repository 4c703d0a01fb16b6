#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hpcfe/basis.hpp"

namespace hpcfe {

enum class DesignKind { UniformGrid, UniformRandom };

struct DesignSpec {
  DesignKind kind = DesignKind::UniformGrid;
  std::vector<Eigen::Index> counts;  // per level, lowest fidelity first
  bool nested = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Full tensor grid with `per_dim` points per axis (endpoints included).
// With d = 1 and n points this is the usual linspace.
Eigen::MatrixXd uniform_grid(const InputBounds& bounds, Eigen::Index n);

Eigen::MatrixXd uniform_random(const InputBounds& bounds, Eigen::Index n, std::uint64_t seed);

// Indices of `count` rows of `points` chosen by greedy farthest-point
// (maximin) selection, starting from row 0; ties go to the lower index.
// Returned in ascending order. Distances are measured in bounds-normalized
// coordinates.
std::vector<Eigen::Index> maximin_subset(const Eigen::MatrixXd& points, const InputBounds& bounds,
                                         Eigen::Index count);

// Level 1 per `spec.kind`; deeper levels are copied rows of their parent
// (nested) or fresh designs of the same kind with a derived seed.
std::vector<Eigen::MatrixXd> nested_design(const DesignSpec& spec, const InputBounds& bounds);

}  // namespace hpcfe
