#pragma once

#include "shrinker/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shrinker {

// Oriented triangle mesh, possibly with boundary. Triangles index into `vertices`
// and are wound counter-clockwise with respect to the chosen unit normal.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  // Per vertex: true iff the vertex lies on an edge with exactly one incident triangle.
  // Maintained by update_boundary_flags(); every operation in this library returns
  // meshes with consistent flags.
  std::vector<std::uint8_t> boundary_flags;
  // Per vertex orbit identifier, -1 when unlabelled. Empty means "no labels".
  std::vector<int> orbit_labels;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  bool is_boundary(int v) const { return !boundary_flags.empty() && boundary_flags[v] != 0; }
};

void update_boundary_flags(TriMesh& mesh);

// Undirected edge list with up to two incident triangles per edge.
struct EdgeInfo {
  int a, b;              // a < b
  int t0 = -1, t1 = -1;  // incident triangles; t1 == -1 on boundary edges
  int count = 0;         // number of incident triangles (> 2 means non-manifold)
};

std::vector<EdgeInfo> build_edges(const TriMesh& mesh);

// CSR vertex -> incident triangle adjacency.
struct VertexTriangles {
  std::vector<int> offsets;
  std::vector<int> triangles;

  int begin(int v) const { return offsets[v]; }
  int end(int v) const { return offsets[v + 1]; }
};

VertexTriangles build_vertex_triangles(const TriMesh& mesh);

// Sorted unique 1-ring neighbours for every vertex.
std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh);

struct ValidationReport {
  int non_finite_vertices = 0;
  int invalid_indices = 0;
  int nonmanifold_edges = 0;
  int nonmanifold_vertices = 0;
  int orientation_defects = 0;
  int duplicate_vertices = 0;
  int degenerate_triangles = 0;
  int unreferenced_vertices = 0;

  bool valid() const {
    return non_finite_vertices == 0 && invalid_indices == 0 && nonmanifold_edges == 0 &&
           nonmanifold_vertices == 0 && orientation_defects == 0 && duplicate_vertices == 0 &&
           degenerate_triangles == 0 && unreferenced_vertices == 0;
  }
  int defect_count() const {
    return non_finite_vertices + invalid_indices + nonmanifold_edges + nonmanifold_vertices +
           orientation_defects + duplicate_vertices + degenerate_triangles + unreferenced_vertices;
  }
  std::string summary() const;
};

ValidationReport validate(const TriMesh& mesh);

struct TopologyReport {
  int euler = 0;
  int boundary_loops = 0;
  int components = 0;
  int genus = 0;

  bool operator==(const TopologyReport&) const = default;
};

// Throws Error(TopologyUndefined) on non-manifold or non-orientable input.
TopologyReport topology(const TriMesh& mesh);
int euler_characteristic(const TriMesh& mesh);

// Closed boundary loops as ordered vertex lists following the triangle orientation.
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh);

// Flips triangles so that neighbours agree on orientation. Returns false if the mesh
// is not orientable (the mesh is left partially re-oriented in that case).
bool orient_consistently(TriMesh& mesh);

// Drops vertices that no triangle references; orbit labels follow their vertices.
void remove_unreferenced_vertices(TriMesh& mesh);

// Intersection of the mesh with the closed ball |x| <= radius. Vertices within
// 1e-9 * radius of the sphere are snapped onto it; triangles crossing the sphere are
// split so that new boundary vertices lie on |x| = radius.
TriMesh clip_to_ball(const TriMesh& mesh, double radius);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);  // unit, zero if degenerate

// Area-weighted unit vertex normals.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

double mean_edge_length(const TriMesh& mesh);
double scale_of(const TriMesh& mesh);  // bounding-box diameter

TriMesh scaled(const TriMesh& mesh, double factor);

// Disjoint union; orbit labels are dropped.
TriMesh merge(const TriMesh& a, const TriMesh& b);

} // namespace shrinker
