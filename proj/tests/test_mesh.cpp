#include "shrinker/mesh_io.hpp"
#include "shrinker/primitives.hpp"
#include "shrinker/trimesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace shrinker;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "shrinker_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Two tori joined by a tube between two removed triangles.
TriMesh double_torus() {
  TriMesh a = torus(2.0, 0.6, 16, 8);
  TriMesh b = torus(2.0, 0.6, 16, 8);
  for (Vec3& p : b.vertices) p.x() += 10.0;
  const Tri ta = a.triangles.back();
  const Tri tb = b.triangles.back();
  a.triangles.pop_back();
  b.triangles.pop_back();
  const int off = a.num_vertices();
  TriMesh m = merge(a, b);
  for (int i = 0; i < 3; ++i) {
    int a0 = ta[i], a1 = ta[(i + 1) % 3];
    int b0 = tb[(3 - i) % 3] + off, b1 = tb[(2 - i + 3) % 3] + off;
    m.triangles.push_back({a1, a0, b0});
    m.triangles.push_back({a1, b0, b1});
  }
  EXPECT_TRUE(orient_consistently(m));
  update_boundary_flags(m);
  return m;
}

} // namespace

TEST(Validate, TetrahedronIsValid) {
  ValidationReport r = validate(tetrahedron());
  EXPECT_TRUE(r.valid()) << r.summary();
  EXPECT_EQ(r.defect_count(), 0);
}

TEST(Validate, InconsistentWindingIsReported) {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  m.triangles = {{0, 1, 2}, {1, 2, 3}};
  update_boundary_flags(m);
  EXPECT_GT(validate(m).orientation_defects, 0);
}

TEST(Validate, NonFiniteCoordinateIsReported) {
  TriMesh m = tetrahedron();
  m.vertices[2].y() = std::numeric_limits<double>::quiet_NaN();
  EXPECT_GT(validate(m).non_finite_vertices, 0);
}

TEST(Topology, Tetrahedron) {
  TopologyReport t = topology(tetrahedron());
  EXPECT_EQ(t.euler, 2);
  EXPECT_EQ(t.boundary_loops, 0);
  EXPECT_EQ(t.genus, 0);
  EXPECT_EQ(euler_characteristic(tetrahedron()), 2);
}

TEST(Topology, StructuredTorus) {
  TopologyReport t = topology(structured_torus(12, 8));
  EXPECT_EQ(t.euler, 0);
  EXPECT_EQ(t.boundary_loops, 0);
  EXPECT_EQ(t.genus, 1);
}

TEST(Topology, GenusTwoClosedMesh) {
  TriMesh m = double_torus();
  EXPECT_TRUE(validate(m).valid()) << validate(m).summary();
  EXPECT_EQ(euler_characteristic(m), -2);
  EXPECT_EQ(topology(m).genus, 2);
}

TEST(Topology, FlatDisc) {
  TriMesh d = clipped_disc(8.0, 0.5);
  EXPECT_EQ(euler_characteristic(d), 1);
  TopologyReport t = topology(d);
  EXPECT_EQ(t.boundary_loops, 1);
  EXPECT_EQ(t.genus, 0);
  EXPECT_EQ(boundary_loops(d).size(), 1u);
}

TEST(Topology, TwoComponents) {
  TriMesh m = merge(tetrahedron(), icosphere(1.0, 1));
  EXPECT_EQ(topology(m).components, 2);
}

TEST(ClipToBall, PlaneBecomesDisc) {
  TriMesh grid = triangle_grid(60, 60, 0.37);
  TriMesh d = clip_to_ball(grid, 8.0);
  EXPECT_TRUE(validate(d).valid());
  TopologyReport t = topology(d);
  EXPECT_EQ(t.boundary_loops, 1);
  EXPECT_EQ(t.genus, 0);
  for (int v = 0; v < d.num_vertices(); ++v) {
    EXPECT_LE(d.vertices[v].norm(), 8.0 * (1 + 1e-12));
    if (d.is_boundary(v)) EXPECT_NEAR(d.vertices[v].norm(), 8.0, 1e-12);
  }
}

TEST(ClipToBall, ContainedSphereUnchanged) {
  TriMesh s = icosphere(2.0, 3);
  TriMesh c = clip_to_ball(s, 8.0);
  ASSERT_EQ(c.num_vertices(), s.num_vertices());
  ASSERT_EQ(c.triangles, s.triangles);
  for (int v = 0; v < s.num_vertices(); ++v) EXPECT_EQ(c.vertices[v], s.vertices[v]);
  EXPECT_EQ(topology(c).boundary_loops, 0);
}

TEST(ClipToBall, CylinderGivesTwoLoopsAtIntersectionHeights) {
  const double r = std::sqrt(2.0);
  TriMesh tall = clipped_cylinder(r, 20.0, 48);
  TriMesh c = clip_to_ball(tall, 8.0);
  EXPECT_EQ(topology(c).boundary_loops, 2);
  // Boundary points lie on chords of the 48-gon, slightly inside the round cylinder.
  const double h = std::sqrt(64.0 - 2.0);
  const double sag = std::sqrt(2.0) * (1 - std::cos(3.14159265358979 / 48));
  for (int v = 0; v < c.num_vertices(); ++v) {
    if (!c.is_boundary(v)) continue;
    EXPECT_NEAR(c.vertices[v].norm(), 8.0, 1e-12);
    EXPECT_NEAR(std::abs(c.vertices[v].z()), h, 2 * std::sqrt(2.0) * sag / h);
  }
}

TEST(ClipToBall, EqualDiagonalsSplitSymmetrically) {
  // A square whose two corners leave the ball symmetrically: the cut quad has equal
  // diagonals and must not favour either one.
  TriMesh m;
  m.vertices = {Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(1, 1, 0), Vec3(-1, 1, 0), Vec3(0, 3, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}, {3, 2, 4}};
  update_boundary_flags(m);
  TriMesh c = clip_to_ball(m, 2.0);
  EXPECT_TRUE(validate(c).valid());
  TriMesh mirrored = c;
  for (Vec3& p : mirrored.vertices) p.x() = -p.x();
  // Vertex set is mirror symmetric.
  for (const Vec3& p : mirrored.vertices) {
    double best = 1e9;
    for (const Vec3& q : c.vertices) best = std::min(best, (p - q).norm());
    EXPECT_LT(best, 1e-12);
  }
}

TEST(MeshIo, TetrahedronObjRecords) {
  auto path = scratch("tet.obj").string();
  export_mesh(tetrahedron(), path, MeshFormat::Obj);
  std::ifstream in(path);
  std::string line;
  int v = 0, f = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
  }
  EXPECT_EQ(v, 4);
  EXPECT_EQ(f, 4);
}

TEST(MeshIo, RoundTripIsBitExact) {
  TriMesh m = icosphere(2.0, 3);
  for (size_t i = 0; i < m.vertices.size(); ++i) m.vertices[i] *= 1.0 + 1e-3 * std::sin(1.7 * i);
  for (const char* name : {"rt.obj", "rt.ply"}) {
    auto path = scratch(name).string();
    export_mesh(m, path);
    TriMesh back = import_mesh(path);
    ASSERT_EQ(back.num_vertices(), m.num_vertices()) << name;
    EXPECT_EQ(back.triangles, m.triangles) << name;
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_EQ(back.vertices[v], m.vertices[v]) << name;
    EXPECT_EQ(topology(back), topology(m));
  }
}

TEST(MeshIo, PlySizeMatchesRecordLayout) {
  TriMesh m = icosphere(1.0, 4);
  auto path = scratch("size.ply").string();
  write_ply(m, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  const size_t header = data.find("end_header\n") + 11;
  EXPECT_EQ(data.size(), header + 24 * m.vertices.size() + 13 * m.triangles.size());
}

TEST(MeshIo, UnwritablePathIsIoError) {
  try {
    export_mesh(tetrahedron(), "/nonexistent_dir/x/y.obj");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Core, ExitCodes) {
  EXPECT_EQ(exit_code_for(ErrorKind::InvalidInput), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::SolverStall), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::RefineStall), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::TopologyDrift), 4);
}
