#include "shrinker/evolver.hpp"
#include "shrinker/gaussmetric.hpp"
#include "shrinker/primitives.hpp"
#include "shrinker/seeds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace shrinker;

namespace {

// Triangular lattice hexagon centred on a vertex, clipped to B_8: invariant under D_6
// and hence under D_2 and D_3.
TriMesh lattice_disc(double h) {
  TriMesh m;
  const int N = static_cast<int>(std::ceil(8.0 / (h * std::sqrt(3.0) / 2))) + 1;
  std::map<std::pair<int, int>, int> id;
  const Vec3 a(h, 0, 0), b(h / 2, h * std::sqrt(3.0) / 2, 0);
  for (int i = -N; i <= N; ++i)
    for (int j = -N; j <= N; ++j)
      if (std::abs(i + j) <= N) {
        id[{i, j}] = m.num_vertices();
        m.vertices.push_back(i * a + j * b);
      }
  auto has = [&](int i, int j) { return id.count({i, j}) > 0; };
  for (int i = -N; i <= N; ++i)
    for (int j = -N; j <= N; ++j) {
      if (has(i, j) && has(i + 1, j) && has(i, j + 1)) m.triangles.push_back({id[{i, j}], id[{i + 1, j}], id[{i, j + 1}]});
      if (has(i + 1, j) && has(i + 1, j + 1) && has(i, j + 1))
        m.triangles.push_back({id[{i + 1, j}], id[{i + 1, j + 1}], id[{i, j + 1}]});
    }
  update_boundary_flags(m);
  return clip_to_ball(m, 8.0);
}

double mean_radius(const TriMesh& m) {
  double s = 0;
  for (const Vec3& p : m.vertices) s += p.norm();
  return s / m.num_vertices();
}

// Accepted phase-A steps that are not followed by a remesh, symmetrize or rescale event.
void expect_monotone(const EvolveTrace& t) {
  for (size_t k = 1; k < t.records.size(); ++k) {
    const TraceRecord& a = t.records[k - 1];
    const TraceRecord& b = t.records[k];
    EXPECT_LT(a.iteration, b.iteration);
    if (a.phase != 'A' || b.phase != 'A' || b.remeshed || b.symmetrized || b.rescaled) continue;
    EXPECT_LT(b.F, a.F) << "iteration " << b.iteration;
  }
}

} // namespace

TEST(FreeBoundary, RadialProjection) {
  TriMesh d = clipped_disc(8.0, 0.5);
  TriMesh big = scaled(d, 8.1 / 8.0);
  TriMesh p = project_free_boundary(big, 8.0);
  for (int v = 0; v < d.num_vertices(); ++v) {
    if (big.is_boundary(v))
      EXPECT_NEAR(p.vertices[v].norm(), 8.0, 1e-14);
    else
      EXPECT_EQ(p.vertices[v], big.vertices[v]);
  }
  TriMesh again = project_free_boundary(d, 8.0);
  for (int v = 0; v < d.num_vertices(); ++v) EXPECT_LT((again.vertices[v] - d.vertices[v]).norm(), 1e-15);
}

TEST(FreeBoundary, Errors) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(8, 0, 0), Vec3(0, 8, 0)};
  m.triangles = {{0, 1, 2}};
  update_boundary_flags(m);
  try {
    project_free_boundary(m, 8.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProjectionUndefined);
  }
  m.vertices[0] = Vec3(4, 4, 0);
  EXPECT_THROW(project_free_boundary(m, 8.0), Error);
}

TEST(FreeBoundary, DirectionIsTangentToSphere) {
  Vec3 x(3, 4, 0), n(0.6, 0.0, 0.8);
  Vec3 d = boundary_direction(x, n);
  EXPECT_NEAR(d.dot(x), 0.0, 1e-14);
  EXPECT_GT(d.dot(n), 0.0);
}

TEST(Config, Invariants) {
  EXPECT_NO_THROW(check_config(EvolveConfig{}));
  EvolveConfig c;
  c.refine_tol = c.descent_tol;
  EXPECT_THROW(check_config(c), Error);
  c = EvolveConfig{};
  c.armijo_c = 1.0;
  EXPECT_THROW(check_config(c), Error);
  c = EvolveConfig{};
  c.max_iters_B = 0;
  EXPECT_THROW(check_config(c), Error);
}

TEST(Descend, DiscIsImmediatelyCritical) {
  TriMesh d = lattice_disc(0.4);
  for (const SymmetryGroup& G : {trivial_group(), dihedral_group(2), dihedral_group(3), cyclic_group(6)}) {
    EvolveResult r = descend(d, G, EvolveConfig{});
    EXPECT_TRUE(r.trace.converged);
    ASSERT_EQ(r.trace.records.size(), 1u);
    EXPECT_NEAR(r.trace.records[0].F, 1 - std::exp(-16.0), 1e-4);
    EXPECT_LT(r.trace.records[0].residual_rms, 1e-6);
  }
}

TEST(Descend, LargeSphereExpandsDownhill) {
  TriMesh s = icosphere(3.0, 3);
  EvolveConfig c;
  c.max_iters_A = 40;
  c.project_dilation = false;
  EvolveResult r = descend(s, dihedral_group(5), c);
  EXPECT_EQ(r.trace.stop_reason, "max_iters_A reached");
  expect_monotone(r.trace);
  EXPECT_LT(r.trace.records.back().F, r.trace.records.front().F);
  EXPECT_GT(mean_radius(r.mesh), 3.0);
  EXPECT_EQ(topology(r.mesh), topology(s));
}

TEST(Descend, GenusOneSeedHundredIterations) {
  SeedSpec s;
  s.g_or_n = 1;
  s.target_edge = 0.12;
  TriMesh m = make_seed(s);
  const SymmetryGroup G = seed_group(s);
  const TopologyReport topo = topology(m);
  EvolveConfig c;
  c.max_iters_A = 100;
  c.project_dilation = true;
  EvolveHooks hooks;
  hooks.checkpoint_every = 1;
  int calls = 0;
  hooks.checkpoint = [&](const TriMesh& x, const EvolveTrace& t) {
    ++calls;
    const TraceRecord& rec = t.records.back();
    double worst = 0;
    for (int v = 0; v < x.num_vertices(); ++v)
      if (x.is_boundary(v)) worst = std::max(worst, std::abs(x.vertices[v].norm() - c.R));
    EXPECT_LT(worst, 1e-12 * c.R);
    if (rec.remeshed) EXPECT_EQ(topology(x), topo);
    if (rec.symmetrized) EXPECT_LT(equivariance_defect(x, G), 1e-12 * c.R);
  };
  EvolveResult r = descend(m, G, c, hooks);
  EXPECT_GT(calls, 50);
  expect_monotone(r.trace);
  EXPECT_EQ(topology(r.mesh), topo);
  EXPECT_LT(r.trace.records.back().F, r.trace.records.front().F);
}

TEST(Refine, SphereSettlesAtRadiusTwo) {
  TriMesh s = icosphere(2.2, 4);
  EvolveResult r = refine_critical(s, dihedral_group(5), EvolveConfig{});
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LT(r.trace.records.back().residual_rms, 1e-4);
  EXPECT_NEAR(mean_radius(r.mesh), 2.0, 0.02);
}

TEST(Refine, PlaneUnchanged) {
  TriMesh d = lattice_disc(0.5);
  EvolveResult r = refine_critical(d, dihedral_group(2), EvolveConfig{});
  EXPECT_TRUE(r.trace.converged);
  for (int v = 0; v < d.num_vertices(); ++v) EXPECT_LT((r.mesh.vertices[v] - d.vertices[v]).norm(), 1e-12);
}

TEST(Refine, StallCarriesTraceAndMesh) {
  SeedSpec s;
  s.g_or_n = 2;
  s.target_edge = 0.12;
  TriMesh m = make_seed(s);
  EvolveConfig c;
  c.max_iters_B = 1;
  try {
    refine_critical(m, seed_group(s), c);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RefineStall);
    EXPECT_FALSE(e.trace().records.empty());
    EXPECT_EQ(e.last_mesh().num_triangles() > 0, true);
    EXPECT_EQ(exit_code_for(e.kind()), 3);
  }
}

TEST(Evolve, RejectsAsymmetricInput) {
  TriMesh m = icosphere(2.0, 2);
  m.vertices[5] *= 1.01;
  EXPECT_THROW(descend(m, dihedral_group(5), EvolveConfig{}), Error);
}

TEST(FreeBoundaryResidual, SphereAndDisc) {
  // Interior vertices carry the variational residual.
  TriMesh s = icosphere(2.0, 4);
  auto r = free_boundary_residual(s);
  ResidualField v = variational_residual(s);
  for (int i = 0; i < s.num_vertices(); ++i) EXPECT_NEAR(r[i], v.per_vertex[i], 1e-12);
  TriMesh d = clipped_disc(8.0, 0.5);
  auto rd = free_boundary_residual(d);
  ASSERT_EQ(rd.size(), d.vertices.size());
  for (double x : rd) EXPECT_LT(std::abs(x), 1e-10);
}
