#pragma once

#include "shrinker/trimesh.hpp"

#include <string>
#include <vector>

namespace shrinker {

enum class GroupKind { Trivial, Cyclic, Dihedral };

// Finite rotation group about the origin. Elements of C_n and D_n are stored as
// R_z(2 pi k / n), k = 0..n-1, followed (dihedral only) by the half-turns psi_l about
// the horizontal axes (cos(l pi/n), sin(l pi/n), 0), l = 1..n.
struct SymmetryGroup {
  GroupKind kind = GroupKind::Trivial;
  int n = 1;
  std::vector<Mat3> elements;

  int order() const { return static_cast<int>(elements.size()); }
  std::string name() const;  // "C3", "D4", "trivial"
};

SymmetryGroup trivial_group();
SymmetryGroup cyclic_group(int n);
SymmetryGroup dihedral_group(int n);
// Parses "trivial", "none", "C<n>" or "D<n>".
SymmetryGroup parse_group(const std::string& name);

Vec3 horizontal_axis(int l, int n);  // xi_l
Mat3 half_turn(const Vec3& axis);

TriMesh apply_isometry(const Mat3& q, const TriMesh& mesh);

struct OrbitStructure {
  std::vector<int> orbit_of;          // per vertex
  std::vector<int> representatives;   // lowest vertex index of each orbit
  std::vector<int> stabilizer_size;   // per orbit
  std::vector<std::vector<int>> image;  // image[g][v]: vertex matched to elements[g] * x_v

  int num_orbits() const { return static_cast<int>(representatives.size()); }
};

double default_match_tolerance(const TriMesh& mesh);  // 1e-6 * bounding-box diameter

// Throws OrbitAmbiguous when two vertices match within tol, NotEquivariant when none does.
OrbitStructure orbit_structure(const TriMesh& mesh, const SymmetryGroup& group, double tol);

// Averages the pullbacks of each orbit onto its representative and re-derives every
// other member by the group action.
TriMesh symmetrize(const TriMesh& mesh, const SymmetryGroup& group, const OrbitStructure& orbits);
void symmetrize_positions(std::vector<Vec3>& x, const SymmetryGroup& group, const OrbitStructure& orbits);

// Max over elements and vertices of the distance from g x_v to the nearest vertex.
double equivariance_defect(const TriMesh& mesh, const SymmetryGroup& group);

// gamma = (g+1) gamma' + (j-1) g
int riemann_hurwitz_genus(int g, int quotient_genus, int axis_pairs);

struct AxisHit {
  double s;        // signed position along the axis direction
  Vec3 point;
  double cos_angle;  // |<triangle normal, axis>|, 1 for an orthogonal crossing
};

// Crossings of the line R*axis with the mesh. The line is shifted by 1e-7 of the
// mesh diameter in a fixed generic direction so that vertices and edges on the axis
// are counted once. Throws AxisTangent if a crossed triangle has |<n, axis>| < tol.
std::vector<AxisHit> axis_hits(const TriMesh& mesh, const Vec3& axis, double tol);
int axis_intersection_count(const TriMesh& mesh, const Vec3& axis, double tol);

// Crossings after closing every boundary loop with a disc: each loop that winds an
// odd number of times around the axis adds one crossing.
int closed_up_axis_count(const TriMesh& mesh, const Vec3& axis, double tol);

} // namespace shrinker
