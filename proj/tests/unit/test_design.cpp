#include <gtest/gtest.h>

#include <set>

#include "hpcfe/design.hpp"
#include "hpcfe/error.hpp"

using namespace hpcfe;

namespace {
bool contains_row(const Eigen::MatrixXd& m, const Eigen::RowVectorXd& r) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if ((m.row(i).array() == r.array()).all()) return true;
  return false;
}
}  // namespace

TEST(Design, PedagogicalGridIsNested) {
  DesignSpec spec;
  spec.counts = {50, 16};
  const auto d = nested_design(spec, InputBounds::unit_box(1));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].rows(), 50);
  EXPECT_EQ(d[1].rows(), 16);
  for (Eigen::Index i = 0; i < d[1].rows(); ++i) EXPECT_TRUE(contains_row(d[0], d[1].row(i)));
  EXPECT_DOUBLE_EQ(d[0](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(d[0](49, 0), 1.0);
}

TEST(Design, EqualCountsGiveIdenticalSets) {
  DesignSpec spec;
  spec.counts = {12, 12};
  const auto d = nested_design(spec, InputBounds::unit_box(1));
  for (Eigen::Index i = 0; i < 12; ++i) EXPECT_TRUE(contains_row(d[1], d[0].row(i)));
}

TEST(Design, NestedGrowthRejected) {
  DesignSpec spec;
  spec.counts = {10, 20};
  EXPECT_THROW(nested_design(spec, InputBounds::unit_box(1)), ValidationError);
}

TEST(Design, RandomNestedThreeLevels) {
  DesignSpec spec;
  spec.kind = DesignKind::UniformRandom;
  spec.counts = {60, 15, 8};
  spec.seed = 42;
  const auto d = nested_design(spec, InputBounds::unit_box(5));
  for (Eigen::Index i = 0; i < d[2].rows(); ++i) EXPECT_TRUE(contains_row(d[1], d[2].row(i)));
  for (Eigen::Index i = 0; i < d[1].rows(); ++i) EXPECT_TRUE(contains_row(d[0], d[1].row(i)));
  EXPECT_TRUE((d[0].array() >= 0).all() && (d[0].array() <= 1).all());
}

TEST(Design, DeterministicPerSeed) {
  DesignSpec spec;
  spec.kind = DesignKind::UniformRandom;
  spec.counts = {30, 10};
  spec.seed = 9;
  const auto a = nested_design(spec, InputBounds::unit_box(2));
  const auto b = nested_design(spec, InputBounds::unit_box(2));
  EXPECT_EQ(a[0], b[0]);
  EXPECT_EQ(a[1], b[1]);
  spec.seed = 10;
  EXPECT_NE(nested_design(spec, InputBounds::unit_box(2))[0], a[0]);
}

TEST(Design, NonNestedLevelsAreFresh) {
  DesignSpec spec;
  spec.kind = DesignKind::UniformRandom;
  spec.counts = {20, 10};
  spec.nested = false;
  spec.seed = 3;
  const auto d = nested_design(spec, InputBounds::unit_box(1));
  EXPECT_EQ(d[1].rows(), 10);
  EXPECT_FALSE(contains_row(d[0], d[1].row(0)));
}

TEST(Design, MaximinStartsAtFirstRowAndSpreads) {
  const Eigen::MatrixXd pts = Eigen::VectorXd::LinSpaced(11, 0, 1);
  const auto idx = maximin_subset(pts, InputBounds::unit_box(1), 3);
  EXPECT_EQ(idx, (std::vector<Eigen::Index>{0, 5, 10}));
  EXPECT_THROW(maximin_subset(pts, InputBounds::unit_box(1), 12), ValidationError);
}

TEST(Design, UniformGridLinspace) {
  InputBounds b;
  b.lower = Eigen::VectorXd::Constant(1, 2.0);
  b.upper = Eigen::VectorXd::Constant(1, 4.0);
  const Eigen::MatrixXd g = uniform_grid(b, 5);
  EXPECT_DOUBLE_EQ(g(2, 0), 3.0);
  EXPECT_DOUBLE_EQ(g(4, 0), 4.0);
}
