#include "shrinker/equivariance.hpp"
#include "shrinker/gaussmetric.hpp"
#include "shrinker/seeds.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace shrinker;

namespace {

const double kUpper = 1 + 4 / std::exp(1.0);

SeedSpec one_end(int g, double t) {
  SeedSpec s;
  s.g_or_n = g;
  s.t = t;
  return s;
}

SeedSpec two_end(int n) {
  SeedSpec s;
  s.family = SeedFamily::TwoEnd;
  s.g_or_n = n;
  return s;
}

} // namespace

TEST(Seeds, GenusOneHalf) {
  SeedSpec s = one_end(1, 0.5);
  TriMesh m = make_seed(s);
  TopologyReport t = topology(m);
  EXPECT_EQ(t.genus, 1);
  EXPECT_EQ(t.boundary_loops, 1);
  EXPECT_EQ(t.components, 1);
  EXPECT_EQ(seed_group(s).name(), "D2");
  EXPECT_LT(equivariance_defect(m, seed_group(s)), 1e-9 * 8);
}

TEST(Seeds, GenusThreeHalfClipped) {
  TriMesh m = make_seed(one_end(3, 0.5));
  TopologyReport t = topology(m);
  EXPECT_EQ(t.genus, 3);
  EXPECT_EQ(t.boundary_loops, 1);
  EXPECT_EQ(t.components, 1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary(v)) EXPECT_NEAR(m.vertices[v].norm(), 8.0, 1e-12);
  }
}

TEST(Seeds, GenusThreeAreaBelowPlanePlusSphere) {
  const double f = discrete_gauss_area(make_seed(one_end(3, 2.0 / 3.0))).total;
  EXPECT_GT(f, 1.0);
  EXPECT_LE(f, kUpper * 1.02);
}

TEST(Seeds, SmallSphereLimit) {
  SeedSpec s = one_end(2, 0.05);
  s.fillet = 0.01;
  s.target_edge = 0.008;
  const double f = discrete_gauss_area(make_seed(s)).total;
  const double model = 1 - std::exp(-16.0) + sphere_gauss_area(s.scale());
  EXPECT_NEAR(model, 1.0028, 5e-5);
  // Necks replace a band of width ~ fillet along a circle of circumference 2 pi scale.
  EXPECT_LT(std::abs(f - model), 2 * s.fillet * 2 * 3.14159265358979 * s.scale());
}

TEST(Seeds, GenusAcrossFamily) {
  for (int g = 1; g <= 8; ++g) {
    for (double t : {0.3, 0.5, 0.7}) {
      SeedSpec s = one_end(g, t);
      TriMesh m = make_seed(s);
      TopologyReport topo = topology(m);
      EXPECT_EQ(topo.genus, g) << "g=" << g << " t=" << t;
      EXPECT_EQ(topo.boundary_loops, 1) << "g=" << g << " t=" << t;
      EXPECT_EQ(topo.components, 1) << "g=" << g << " t=" << t;
      EXPECT_TRUE(validate(m).valid()) << validate(m).summary();
      EXPECT_LT(equivariance_defect(m, seed_group(s)), 1e-9 * s.R);
    }
  }
}

TEST(Seeds, TwoEndSevenAndTwentyFour) {
  for (auto [n, genus] : {std::pair{7, 13}, std::pair{24, 47}}) {
    SeedSpec s = two_end(n);
    TriMesh m = make_seed(s);
    TopologyReport t = topology(m);
    EXPECT_EQ(t.genus, genus);
    EXPECT_EQ(t.boundary_loops, 2);
    EXPECT_EQ(t.components, 1);
    EXPECT_LT(equivariance_defect(m, seed_group(s)), 1e-9 * s.R);
  }
}

TEST(Seeds, TwoEndPolarCapsCrossVerticalAxisTwice) {
  for (int n : {3, 7}) EXPECT_EQ(axis_intersection_count(make_seed(two_end(n)), Vec3::UnitZ(), 1e-3), 2);
}

TEST(Seeds, PrismaticTwoEndUsesCyclicGroup) {
  SeedSpec s = two_end(5);
  EXPECT_EQ(seed_group(s).name(), "D5");
  s.prismatic = true;
  EXPECT_EQ(seed_group(s).name(), "C5");
  TriMesh m = make_seed(s);
  EXPECT_EQ(topology(m).genus, 9);
  EXPECT_LT(equivariance_defect(m, seed_group(s)), 1e-9 * s.R);
}

TEST(Seeds, InvalidSpecsAreRejected) {
  auto rejects = [](SeedSpec s) {
    try {
      check_seed_spec(s);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::InvalidInput;
    }
    return false;
  };
  EXPECT_TRUE(rejects(one_end(1, 0.0)));
  EXPECT_TRUE(rejects(one_end(1, 1.0)));
  EXPECT_TRUE(rejects(one_end(0, 0.5)));
  SeedSpec s = one_end(1, 0.5);
  s.fillet = 0.6;
  EXPECT_TRUE(rejects(s));
  s = one_end(1, 0.5);
  s.target_edge = s.fillet;
  EXPECT_TRUE(rejects(s));
  EXPECT_FALSE(rejects(one_end(1, 0.5)));
}

TEST(Sweepout, BoundedAboveWithInteriorMaximumNearScaleTwo) {
  std::vector<double> ts;
  for (int i = 1; i <= 9; ++i) ts.push_back(i / 10.0);
  auto samples = sweepout_family(2, ts, SeedSpec{});
  ASSERT_EQ(samples.size(), ts.size());
  for (const SweepSample& s : samples) EXPECT_LE(s.area, kUpper * 1.02) << "t=" << s.t;
  auto best = std::max_element(samples.begin(), samples.end(),
                               [](const SweepSample& a, const SweepSample& b) { return a.area < b.area; });
  EXPECT_GE(best->area, 1.05);
  EXPECT_NEAR(best->t, 2.0 / 3.0, 0.1);
  EXPECT_TRUE(samples.front().mesh.vertices.empty());
}
