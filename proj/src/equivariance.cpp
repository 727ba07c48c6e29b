#include "shrinker/equivariance.hpp"
#include "shrinker/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace shrinker {

namespace {

Mat3 rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

// Orthonormal pair spanning the plane orthogonal to d.
std::pair<Vec3, Vec3> plane_basis(const Vec3& d) {
  Vec3 u = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  u = (u - u.dot(d) * d).normalized();
  return {u, d.cross(u)};
}

} // namespace

std::string SymmetryGroup::name() const {
  switch (kind) {
  case GroupKind::Trivial: return "trivial";
  case GroupKind::Cyclic: return "C" + std::to_string(n);
  case GroupKind::Dihedral: return "D" + std::to_string(n);
  }
  return "trivial";
}

Vec3 horizontal_axis(int l, int n) {
  double a = l * std::numbers::pi / n;
  return Vec3(std::cos(a), std::sin(a), 0.0);
}

Mat3 half_turn(const Vec3& axis) {
  Vec3 a = axis.normalized();
  return 2.0 * a * a.transpose() - Mat3::Identity();
}

SymmetryGroup trivial_group() {
  SymmetryGroup g;
  g.elements = {Mat3::Identity()};
  return g;
}

SymmetryGroup cyclic_group(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "cyclic_group: n must be at least 2");
  SymmetryGroup g;
  g.kind = GroupKind::Cyclic;
  g.n = n;
  g.elements.push_back(Mat3::Identity());
  for (int k = 1; k < n; ++k) g.elements.push_back(rot_z(2.0 * std::numbers::pi * k / n));
  return g;
}

SymmetryGroup dihedral_group(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "dihedral_group: n must be at least 2");
  SymmetryGroup g = cyclic_group(n);
  g.kind = GroupKind::Dihedral;
  for (int l = 1; l <= n; ++l) g.elements.push_back(half_turn(horizontal_axis(l, n)));
  return g;
}

SymmetryGroup parse_group(const std::string& name) {
  if (name.empty() || name == "trivial" || name == "none") return trivial_group();
  if (name.size() >= 2 && (name[0] == 'C' || name[0] == 'D')) {
    int n = 0;
    try {
      size_t used = 0;
      n = std::stoi(name.substr(1), &used);
      if (used != name.size() - 1) n = 0;
    } catch (const std::exception&) {
      n = 0;
    }
    if (n >= 2) return name[0] == 'C' ? cyclic_group(n) : dihedral_group(n);
  }
  throw Error(ErrorKind::InvalidInput, "unknown symmetry group '" + name + "'");
}

TriMesh apply_isometry(const Mat3& q, const TriMesh& mesh) {
  TriMesh out = mesh;
  if (q == Mat3::Identity()) return out;
  for (Vec3& p : out.vertices) p = q * p;
  return out;
}

double default_match_tolerance(const TriMesh& mesh) { return 1e-6 * scale_of(mesh); }

OrbitStructure orbit_structure(const TriMesh& mesh, const SymmetryGroup& group, double tol) {
  const int nv = mesh.num_vertices();
  const int ng = group.order();
  KdTree tree(mesh.vertices);
  OrbitStructure o;
  o.image.assign(ng, std::vector<int>(nv, -1));
  for (int g = 0; g < ng; ++g) {
    if (g == 0) {
      std::iota(o.image[0].begin(), o.image[0].end(), 0);
      continue;
    }
    for (int v = 0; v < nv; ++v) {
      auto hits = tree.within(group.elements[g] * mesh.vertices[v], tol);
      if (hits.empty()) {
        throw Error(ErrorKind::NotEquivariant,
                    "orbit_structure: vertex " + std::to_string(v) + " has no image under " + group.name());
      }
      if (hits.size() > 1) {
        throw Error(ErrorKind::OrbitAmbiguous,
                    "orbit_structure: vertex " + std::to_string(v) + " has several images under " + group.name());
      }
      o.image[g][v] = hits.front();
    }
  }
  o.orbit_of.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (o.orbit_of[v] >= 0) continue;
    int id = o.num_orbits();
    o.representatives.push_back(v);
    int stab = 0;
    for (int g = 0; g < ng; ++g) {
      int w = o.image[g][v];
      if (w == v) ++stab;
      if (o.orbit_of[w] >= 0 && o.orbit_of[w] != id) {
        throw Error(ErrorKind::OrbitAmbiguous, "orbit_structure: inconsistent vertex matching");
      }
      o.orbit_of[w] = id;
    }
    o.stabilizer_size.push_back(stab);
  }
  return o;
}

void symmetrize_positions(std::vector<Vec3>& x, const SymmetryGroup& group, const OrbitStructure& orbits) {
  const int ng = group.order();
  if (ng == 1) return;
  for (int rep : orbits.representatives) {
    Vec3 avg = Vec3::Zero();
    for (int g = 0; g < ng; ++g) avg += group.elements[g].transpose() * x[orbits.image[g][rep]];
    avg /= ng;
    for (int g = 0; g < ng; ++g) x[orbits.image[g][rep]] = group.elements[g] * avg;
    x[rep] = avg;
  }
}

TriMesh symmetrize(const TriMesh& mesh, const SymmetryGroup& group, const OrbitStructure& orbits) {
  TriMesh out = mesh;
  symmetrize_positions(out.vertices, group, orbits);
  return out;
}

double equivariance_defect(const TriMesh& mesh, const SymmetryGroup& group) {
  if (mesh.vertices.empty()) return 0.0;
  KdTree tree(mesh.vertices);
  double worst = 0.0;
  for (int g = 1; g < group.order(); ++g) {
    for (const Vec3& p : mesh.vertices) worst = std::max(worst, tree.nearest(group.elements[g] * p).second);
  }
  return worst;
}

int riemann_hurwitz_genus(int g, int quotient_genus, int axis_pairs) {
  return (g + 1) * quotient_genus + (axis_pairs - 1) * g;
}

std::vector<AxisHit> axis_hits(const TriMesh& mesh, const Vec3& axis, double tol) {
  const Vec3 d = axis.normalized();
  auto [u, v] = plane_basis(d);
  const double shift = 1e-7 * std::max(scale_of(mesh), 1e-300);
  // an irrational mix keeps the shifted line away from mesh features aligned with u, v
  const Vec3 o = shift * (0.8191520442889918 * u + 0.5735764363510462 * v);
  std::vector<AxisHit> hits;
  for (const Tri& t : mesh.triangles) {
    // barycentric test in the plane orthogonal to d
    Eigen::Vector2d q[3];
    for (int k = 0; k < 3; ++k) {
      Vec3 p = mesh.vertices[t[k]] - o;
      q[k] = Eigen::Vector2d(p.dot(u), p.dot(v));
    }
    auto cross2 = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); };
    double w0 = cross2(q[1], q[2]);
    double w1 = cross2(q[2], q[0]);
    double w2 = cross2(q[0], q[1]);
    bool inside = (w0 > 0 && w1 > 0 && w2 > 0) || (w0 < 0 && w1 < 0 && w2 < 0);
    if (!inside) continue;
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    Vec3 n = triangle_normal(a, b, c);
    double cosang = std::abs(n.dot(d));
    if (cosang < tol) throw Error(ErrorKind::AxisTangent, "axis_hits: triangle tangent to the axis");
    double sum = w0 + w1 + w2;
    Vec3 p = (w0 * a + w1 * b + w2 * c) / sum;
    hits.push_back({p.dot(d), p, cosang});
  }
  std::sort(hits.begin(), hits.end(), [](const AxisHit& x, const AxisHit& y) { return x.s < y.s; });
  return hits;
}

int axis_intersection_count(const TriMesh& mesh, const Vec3& axis, double tol) {
  return static_cast<int>(axis_hits(mesh, axis, tol).size());
}

int closed_up_axis_count(const TriMesh& mesh, const Vec3& axis, double tol) {
  int count = axis_intersection_count(mesh, axis, tol);
  const Vec3 d = axis.normalized();
  auto [u, v] = plane_basis(d);
  for (const auto& loop : boundary_loops(mesh)) {
    double total = 0.0;
    for (size_t i = 0; i < loop.size(); ++i) {
      const Vec3& p = mesh.vertices[loop[i]];
      const Vec3& q = mesh.vertices[loop[(i + 1) % loop.size()]];
      double a0 = std::atan2(p.dot(v), p.dot(u));
      double a1 = std::atan2(q.dot(v), q.dot(u));
      double da = a1 - a0;
      while (da > std::numbers::pi) da -= 2 * std::numbers::pi;
      while (da < -std::numbers::pi) da += 2 * std::numbers::pi;
      total += da;
    }
    long winding = std::lround(total / (2 * std::numbers::pi));
    if (winding % 2 != 0) ++count;
  }
  return count;
}

} // namespace shrinker
