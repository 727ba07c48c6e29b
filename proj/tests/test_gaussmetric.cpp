#include "shrinker/gaussmetric.hpp"
#include "shrinker/equivariance.hpp"
#include "shrinker/primitives.hpp"
#include "shrinker/seeds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace shrinker;

namespace {

constexpr double kPi = std::numbers::pi;

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

TriMesh jittered(TriMesh m, double amp, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  for (Vec3& p : m.vertices) p += Vec3(u(rng), u(rng), u(rng));
  return m;
}

} // namespace

TEST(Weight, ClosedFormValues) {
  EXPECT_EQ(weight(Vec3::Zero()), 1.0);
  EXPECT_NEAR(weight(Vec3(2, 0, 0)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(weight(Vec3(2, 2, 2 * std::sqrt(2.0))), std::exp(-4.0), 1e-15);
}

TEST(ClosedForms, Sphere) {
  EXPECT_NEAR(sphere_gauss_area(2.0), 4 / std::exp(1.0), 1e-14);
  EXPECT_NEAR(sphere_gauss_area(1.0), std::exp(-0.25), 1e-14);
  EXPECT_LT(sphere_gauss_area(1e-8), 1e-15);
}

TEST(ClosedForms, CylinderAgainstAxialQuadrature) {
  const double r = std::sqrt(2.0);
  const double q = r / 2 * simpson([&](double z) { return std::exp(-(r * r + z * z) / 4); }, -40, 40);
  EXPECT_NEAR(cylinder_gauss_area(r), q, 1e-10);
  EXPECT_NEAR(cylinder_gauss_area(r), std::sqrt(2 * kPi / std::exp(1.0)), 1e-12);
  EXPECT_GT(cylinder_gauss_area(r), sphere_gauss_area(2.0));
  EXPECT_LT(cylinder_gauss_area(1e-9), 1e-8);
  const double h = std::sqrt(64.0 - 2.0);
  const double qc = r / 2 * simpson([&](double z) { return std::exp(-(r * r + z * z) / 4); }, -h, h);
  EXPECT_NEAR(clipped_cylinder_gauss_area(r, 8.0), qc, 1e-10);
}

TEST(ClosedForms, HalfspaceAgainstQuadrature) {
  EXPECT_NEAR(halfspace_gauss_measure(0.0), 0.5, 1e-15);
  const double q = simpson([](double x) { return std::exp(-x * x / 4) / std::sqrt(4 * kPi); }, 2.0, 40.0);
  EXPECT_NEAR(halfspace_gauss_measure(2.0), q, 1e-10);
  EXPECT_NEAR(halfspace_gauss_measure(2.0), 0.078650, 1e-6);
  EXPECT_LT(halfspace_gauss_measure(40.0), 1e-100);
}

TEST(ClosedForms, DiscAgainstRadialQuadrature) {
  const double q = 0.5 * simpson([](double r) { return std::exp(-r * r / 4) * r; }, 0, 8);
  EXPECT_NEAR(disc_gauss_area(8.0), q, 1e-12);
  EXPECT_NEAR(disc_gauss_area(8.0), 1 - std::exp(-16.0), 1e-15);
}

TEST(DiscreteArea, DiscConvergesToClosedForm) {
  double prev = 1.0;
  for (double h : {0.8, 0.4, 0.2}) {
    double err = std::abs(discrete_gauss_area(clipped_disc(8.0, h)).total - (1 - std::exp(-16.0)));
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(DiscreteArea, IcosphereWithinTwoPerMille) {
  const double f = discrete_gauss_area(icosphere(2.0, 4)).total;
  EXPECT_LT(std::abs(f - 4 / std::exp(1.0)) / (4 / std::exp(1.0)), 0.002);
}

TEST(DiscreteArea, RadiusOneIcosphere) {
  EXPECT_NEAR(discrete_gauss_area(icosphere(1.0, 5)).total, std::exp(-0.25), 2e-3);
}

TEST(DiscreteArea, FarTriangleIsNegligible) {
  TriMesh m;
  m.vertices = {Vec3(20, 0, 0), Vec3(21, 0, 0), Vec3(20, 1, 0)};
  m.triangles = {{0, 1, 2}};
  update_boundary_flags(m);
  EXPECT_LT(discrete_gauss_area(m).total, 1e-40);
}

TEST(DiscreteArea, PartsSumToTotal) {
  TriMesh m = jittered(icosphere(1.5, 3), 0.02, 3);
  WeightedAreaResult r = discrete_gauss_area(m);
  double s = 0;
  for (double a : r.per_triangle) {
    EXPECT_GE(a, 0.0);
    EXPECT_TRUE(std::isfinite(a));
    s += a;
  }
  EXPECT_NEAR(s, r.total, 1e-12 * r.total);
}

TEST(Gradient, MatchesCentralDifferencesAlongRandomDirections) {
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 4; ++trial) {
    TriMesh m = jittered(icosphere(1.0 + trial, 2), 0.05, trial);
    const auto g = gauss_area_gradient(m);
    const double h = 1e-5 * scale_of(m);
    for (int k = 0; k < 10; ++k) {
      int v = static_cast<int>(rng() % m.vertices.size());
      Vec3 u(nd(rng), nd(rng), nd(rng));
      u.normalize();
      TriMesh p = m, q = m;
      p.vertices[v] += h * u;
      q.vertices[v] -= h * u;
      double fd = (discrete_gauss_area(p).total - discrete_gauss_area(q).total) / (2 * h);
      double an = g[v].dot(u);
      EXPECT_LT(std::abs(fd - an), 1e-6 * std::max(g[v].norm(), 1e-12)) << "vertex " << v;
    }
  }
}

TEST(Gradient, DiscNormalComponentVanishes) {
  TriMesh d = clipped_disc(8.0, 0.4);
  const auto g = gauss_area_gradient(d);
  for (int v = 0; v < d.num_vertices(); ++v) EXPECT_LT(std::abs(g[v].z()), 1e-15);
}

TEST(Gradient, CovariantUnderDihedralRotations) {
  TriMesh m = jittered(icosphere(2.0, 2), 0.05, 7);
  const auto g = gauss_area_gradient(m);
  for (const Mat3& q : dihedral_group(3).elements) {
    const auto gq = gauss_area_gradient(apply_isometry(q, m));
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_LT((q.transpose() * gq[v] - g[v]).norm(), 1e-12);
  }
}

TEST(Residual, IcosphereRadiusTwoVanishesUnderRefinement) {
  double prev = 1.0;
  for (int level = 2; level <= 5; ++level) {
    double rms = shrinker_residual(icosphere(2.0, level)).rms_weighted;
    EXPECT_LT(rms, prev);
    prev = rms;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Residual, IcosphereRadiusOne) {
  ResidualField r = shrinker_residual(icosphere(1.0, 5));
  for (size_t v = 0; v < r.per_vertex.size(); ++v) EXPECT_NEAR(r.per_vertex[v], 1.5, 2e-3);
}

TEST(Residual, DiscInteriorZeroAndBoundaryAbsent) {
  TriMesh d = clipped_disc(8.0, 0.5);
  for (const ResidualField& r : {shrinker_residual(d), variational_residual(d)}) {
    for (int v = 0; v < d.num_vertices(); ++v) {
      if (d.is_boundary(v)) {
        EXPECT_EQ(r.present[v], 0);
      } else {
        ASSERT_EQ(r.present[v], 1);
        EXPECT_LT(std::abs(r.per_vertex[v]), 1e-12);
      }
    }
    EXPECT_LT(r.rms_weighted, 1e-12);
  }
}

TEST(Residual, VariationalMatchesGradient) {
  TriMesh m = jittered(icosphere(2.0, 3), 0.01, 5);
  const auto g = gauss_area_gradient(m);
  const auto mass = vertex_gauss_mass(m);
  const auto nu = vertex_normals(m);
  ResidualField r = variational_residual(m);
  for (int v = 0; v < m.num_vertices(); ++v) EXPECT_NEAR(r.per_vertex[v], g[v].dot(nu[v]) / mass[v], 1e-10);
}

TEST(Residual, SeedHasWellDefinedRms) {
  SeedSpec s;
  s.g_or_n = 2;
  ResidualField r = shrinker_residual(make_seed(s));
  EXPECT_TRUE(std::isfinite(r.rms_weighted));
  EXPECT_GT(r.rms_weighted, 0.0);
}
