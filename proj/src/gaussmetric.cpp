#include "shrinker/gaussmetric.hpp"

#include <cmath>
#include <numbers>

namespace shrinker {

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

void require_positive(double r, const char* what) {
  if (!(r > 0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidInput, std::string(what) + ": radius must be positive");
}

double area_tolerance(const TriMesh& mesh) {
  double s = scale_of(mesh);
  return 1e-14 * s * s;
}

double cot(const Vec3& a, const Vec3& b) {
  // cotangent of the angle between a and b
  double s = a.cross(b).norm();
  return s > 0 ? a.dot(b) / s : 0.0;
}

} // namespace

double weight(const Vec3& x) {
  if (!x.allFinite()) throw Error(ErrorKind::InvalidInput, "weight: non-finite point");
  return std::exp(-0.25 * x.squaredNorm());
}

double sphere_gauss_area(double radius) {
  require_positive(radius, "sphere_gauss_area");
  return radius * radius * std::exp(-0.25 * radius * radius);
}

double cylinder_gauss_area(double radius) {
  require_positive(radius, "cylinder_gauss_area");
  return std::sqrt(std::numbers::pi) * radius * std::exp(-0.25 * radius * radius);
}

double clipped_cylinder_gauss_area(double radius, double clip) {
  require_positive(radius, "clipped_cylinder_gauss_area");
  if (clip <= radius) return 0.0;
  double h = std::sqrt(clip * clip - radius * radius);
  return cylinder_gauss_area(radius) * std::erf(0.5 * h);
}

double disc_gauss_area(double clip) {
  require_positive(clip, "disc_gauss_area");
  return -std::expm1(-0.25 * clip * clip);
}

double halfspace_gauss_measure(double offset) { return 0.5 * std::erfc(0.5 * offset); }

WeightedAreaResult discrete_gauss_area(const TriMesh& mesh) {
  WeightedAreaResult r;
  r.per_triangle.resize(mesh.triangles.size(), 0.0);
  const double tol = area_tolerance(mesh);
  CompensatedSum total;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Tri& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    double area = triangle_area(a, b, c);
    if (!(area > tol)) {
      ++r.degenerate_triangles;
      continue;
    }
    double w = std::exp(-0.0625 * (a + b).squaredNorm()) + std::exp(-0.0625 * (b + c).squaredNorm()) +
               std::exp(-0.0625 * (c + a).squaredNorm());
    r.per_triangle[t] = kInv4Pi * area * w / 3.0;
    total.add(r.per_triangle[t]);
  }
  r.total = total.value();
  return r;
}

std::vector<Vec3> gauss_area_gradient(const TriMesh& mesh) {
  std::vector<Vec3> grad(mesh.vertices.size(), Vec3::Zero());
  const double tol = area_tolerance(mesh);
  for (const Tri& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    Vec3 cr = (b - a).cross(c - a);
    double len = cr.norm();
    double area = 0.5 * len;
    if (!(area > tol)) continue;
    Vec3 n = cr / len;
    Vec3 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
    double wab = std::exp(-0.25 * mab.squaredNorm());
    double wbc = std::exp(-0.25 * mbc.squaredNorm());
    double wca = std::exp(-0.25 * mca.squaredNorm());
    double W = (wab + wbc + wca) / 3.0;
    // d/dx of w(m) for a midpoint m containing x with coefficient 1/2: -(m/4) w(m)
    Vec3 dwab = -0.25 * wab * mab, dwbc = -0.25 * wbc * mbc, dwca = -0.25 * wca * mca;
    Vec3 ga = 0.5 * n.cross(c - b) * W + area * (dwab + dwca) / 3.0;
    Vec3 gb = 0.5 * n.cross(a - c) * W + area * (dwab + dwbc) / 3.0;
    Vec3 gc = 0.5 * n.cross(b - a) * W + area * (dwbc + dwca) / 3.0;
    grad[tri[0]] += kInv4Pi * ga;
    grad[tri[1]] += kInv4Pi * gb;
    grad[tri[2]] += kInv4Pi * gc;
  }
  return grad;
}

std::vector<double> vertex_gauss_mass(const TriMesh& mesh) {
  std::vector<double> area(mesh.vertices.size(), 0.0);
  for (const Tri& t : mesh.triangles) {
    double a = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) / 3.0;
    for (int v : t) area[v] += a;
  }
  for (size_t v = 0; v < area.size(); ++v) area[v] *= kInv4Pi * std::exp(-0.25 * mesh.vertices[v].squaredNorm());
  return area;
}

double weighted_rms(const std::vector<double>& values, const std::vector<std::uint8_t>& present,
                    const std::vector<double>& weights) {
  CompensatedSum num, den;
  for (size_t v = 0; v < values.size(); ++v) {
    if (!present[v]) continue;
    num.add(weights[v] * values[v] * values[v]);
    den.add(weights[v]);
  }
  return den.value() > 0 ? std::sqrt(num.value() / den.value()) : 0.0;
}

ResidualField shrinker_residual(const TriMesh& mesh) {
  const int n = mesh.num_vertices();
  std::vector<Vec3> lap(n, Vec3::Zero());
  std::vector<double> mixed(n, 0.0);
  for (const Tri& t : mesh.triangles) {
    const Vec3 p[3] = {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    double area = triangle_area(p[0], p[1], p[2]);
    if (!(area > 0)) continue;
    double c[3];
    int obtuse = -1;
    for (int k = 0; k < 3; ++k) {
      const Vec3& o = p[k];
      c[k] = cot(p[(k + 1) % 3] - o, p[(k + 2) % 3] - o);  // cot of the angle at corner k
      if ((p[(k + 1) % 3] - o).dot(p[(k + 2) % 3] - o) < 0) obtuse = k;
    }
    for (int k = 0; k < 3; ++k) {
      // edge opposite corner k joins i and j
      int i = (k + 1) % 3, j = (k + 2) % 3;
      Vec3 e = p[i] - p[j];
      lap[t[i]] += 0.5 * c[k] * e;
      lap[t[j]] -= 0.5 * c[k] * e;
    }
    if (obtuse < 0) {
      for (int k = 0; k < 3; ++k) {
        int i = (k + 1) % 3, j = (k + 2) % 3;
        double l2 = (p[i] - p[j]).squaredNorm();
        mixed[t[i]] += 0.125 * c[k] * l2;
        mixed[t[j]] += 0.125 * c[k] * l2;
      }
    } else {
      for (int k = 0; k < 3; ++k) mixed[t[k]] += (k == obtuse ? 0.5 : 0.25) * area;
    }
  }
  const auto normals = vertex_normals(mesh);
  const double tol = area_tolerance(mesh);
  ResidualField r;
  r.per_vertex.assign(n, 0.0);
  r.present.assign(n, 0);
  std::vector<double> w(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if (mesh.is_boundary(v)) continue;
    if (!(mixed[v] > tol)) {
      ++r.absent_degenerate;
      continue;
    }
    Vec3 hn = lap[v] / mixed[v];  // H * nu
    double h = hn.norm();
    if (hn.dot(normals[v]) < 0) h = -h;
    r.per_vertex[v] = h - 0.5 * mesh.vertices[v].dot(normals[v]);
    r.present[v] = 1;
    w[v] = std::exp(-0.25 * mesh.vertices[v].squaredNorm()) * mixed[v];
  }
  r.rms_weighted = weighted_rms(r.per_vertex, r.present, w);
  return r;
}

ResidualField variational_residual(const TriMesh& mesh) {
  const int n = mesh.num_vertices();
  const auto grad = gauss_area_gradient(mesh);
  const auto mass = vertex_gauss_mass(mesh);
  const auto normals = vertex_normals(mesh);
  const double tol = area_tolerance(mesh) * kInv4Pi;
  ResidualField r;
  r.per_vertex.assign(n, 0.0);
  r.present.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    if (mesh.is_boundary(v)) continue;
    if (!(mass[v] > tol * std::exp(-0.25 * mesh.vertices[v].squaredNorm()))) {
      ++r.absent_degenerate;
      continue;
    }
    r.per_vertex[v] = grad[v].dot(normals[v]) / mass[v];
    r.present[v] = 1;
  }
  r.rms_weighted = weighted_rms(r.per_vertex, r.present, mass);
  return r;
}

} // namespace shrinker
