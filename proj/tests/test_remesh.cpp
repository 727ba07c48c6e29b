#include "shrinker/equivariance.hpp"
#include "shrinker/primitives.hpp"
#include "shrinker/remesh.hpp"
#include "shrinker/seeds.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace shrinker;

TEST(GradedEdge, Profile) {
  EXPECT_EQ(graded_edge(1.0, 0.1, 3.0), 0.1);
  EXPECT_NEAR(graded_edge(6.0, 0.1, 3.0), 0.25, 1e-15);  // capped at 2.5 edge
  EXPECT_NEAR(graded_edge(4.0, 0.1, 3.0), 0.1 * 16.0 / 9.0, 1e-15);
  EXPECT_EQ(graded_edge(7.0, 0.1, 0.0), 0.1);
  EXPECT_LT(graded_edge(8.0, 0.1, 3.0, 8.0), graded_edge(6.0, 0.1, 3.0, 8.0));
}

TEST(Remesh, UniformGridIsFixedPoint) {
  const double h = 0.2;
  TriMesh grid = triangle_grid(20, 20, h);
  RemeshStats st;
  TriMesh out = remesh(grid, h, nullptr, {}, &st);
  EXPECT_EQ(st.splits, 0);
  EXPECT_EQ(st.collapses, 0);
  EXPECT_EQ(out.num_triangles(), grid.num_triangles());
}

TEST(Remesh, IcosphereReachesBand) {
  TriMesh s = icosphere(2.0, 3);
  RemeshStats st;
  TriMesh out = remesh(s, 0.1, nullptr, {}, &st);
  TopologyReport t = topology(out);
  EXPECT_EQ(t.genus, 0);
  EXPECT_EQ(t.boundary_loops, 0);
  EXPECT_GE(edge_band_fraction(out, 0.1, 0.0, 0.8, 4.0 / 3.0), 0.95);
  for (const Vec3& p : out.vertices) EXPECT_NEAR(p.norm(), 2.0, 0.02);
}

TEST(Remesh, EquivariantSeedStaysEquivariant) {
  SeedSpec s;
  s.g_or_n = 2;
  s.t = 0.5;
  TriMesh m = make_seed(s);
  SymmetryGroup G = seed_group(s);
  const double before = equivariance_defect(m, G);
  RemeshOptions opt;
  opt.grade_radius = s.grade_radius;
  opt.clip_radius = s.R;
  TriMesh out = remesh(m, 0.1, &G, opt);
  EXPECT_LT(std::abs(equivariance_defect(out, G) - before), 1e-9);
  EXPECT_NO_THROW(orbit_structure(out, G, default_match_tolerance(out)));
}

TEST(Remesh, SeedCorpusKeepsTopology) {
  std::vector<SeedSpec> corpus;
  for (int g : {1, 2, 3, 5}) {
    for (double t : {0.3, 0.5, 2.0 / 3.0}) {
      SeedSpec s;
      s.g_or_n = g;
      s.t = t;
      corpus.push_back(s);
    }
  }
  for (int n : {3, 7}) {
    SeedSpec s;
    s.family = SeedFamily::TwoEnd;
    s.g_or_n = n;
    corpus.push_back(s);
  }
  for (const SeedSpec& s : corpus) {
    TriMesh m = make_seed(s);
    SymmetryGroup G = seed_group(s);
    RemeshOptions opt;
    opt.grade_radius = s.grade_radius;
    opt.clip_radius = s.R;
    for (double target : {0.8 * s.target_edge, 1.5 * s.target_edge}) {
      TriMesh out = remesh(m, target, &G, opt);
      EXPECT_EQ(topology(out), topology(m)) << to_string(s.family) << " " << s.g_or_n << " t=" << s.t;
      EXPECT_TRUE(validate(out).valid()) << validate(out).summary();
      for (int v = 0; v < out.num_vertices(); ++v)
        if (out.is_boundary(v)) EXPECT_NEAR(out.vertices[v].norm(), s.R, 1e-9 * s.R);
    }
  }
}

TEST(Remesh, TangentialRelaxKeepsConnectivityAndSphere) {
  TriMesh s = icosphere(2.0, 3);
  for (size_t i = 0; i < s.vertices.size(); ++i) {
    Vec3& p = s.vertices[i];
    p = 2.0 * (p + 0.03 * Vec3(std::sin(3.0 * i), std::cos(5.0 * i), 0)).normalized();
  }
  TriMesh r = s;
  tangential_relax(r, 0.5, 0.0, nullptr, nullptr);
  EXPECT_EQ(r.triangles, s.triangles);
  for (const Vec3& p : r.vertices) EXPECT_NEAR(p.norm(), 2.0, 1e-2);
}
