#include "shrinker/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace shrinker {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

TriMesh icosphere(double radius, int level) {
  if (!(radius > 0) || level < 0) throw Error(ErrorKind::InvalidInput, "icosphere: bad radius or level");
  TriMesh m;
  const double h = 1.0 / std::sqrt(5.0);  // height of the two pentagonal rings
  const double rr = 2.0 / std::sqrt(5.0);
  m.vertices.push_back(Vec3(0, 0, 1));
  for (int k = 0; k < 5; ++k) {
    double a = kPi / 10 + 2 * kPi * k / 5;
    m.vertices.push_back(Vec3(rr * std::cos(a), rr * std::sin(a), h));
  }
  for (int k = 0; k < 5; ++k) {
    double a = -kPi / 10 + 2 * kPi * k / 5;
    m.vertices.push_back(Vec3(rr * std::cos(a), rr * std::sin(a), -h));
  }
  m.vertices.push_back(Vec3(0, 0, -1));
  for (int k = 0; k < 5; ++k) {
    int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    int l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    m.triangles.push_back({0, u0, u1});
    // lower ring vertex l1 sits between u0 and u1
    m.triangles.push_back({u0, l1, u1});
    m.triangles.push_back({u0, l0, l1});
    m.triangles.push_back({11, l1, l0});
  }
  for (int lv = 0; lv < level; ++lv) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      Vec3 p = (m.vertices[a] + m.vertices[b]).normalized();
      int id = m.num_vertices();
      m.vertices.push_back(p);
      mid.emplace(key, id);
      return id;
    };
    std::vector<Tri> next;
    next.reserve(m.triangles.size() * 4);
    for (const Tri& t : m.triangles) {
      int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  for (Vec3& p : m.vertices) p *= radius;
  update_boundary_flags(m);
  return m;
}

TriMesh tetrahedron() {
  TriMesh m;
  m.vertices = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  m.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  update_boundary_flags(m);
  return m;
}

TriMesh triangle_grid(int nx, int ny, double h) {
  if (nx < 2 || ny < 2 || !(h > 0)) throw Error(ErrorKind::InvalidInput, "triangle_grid: bad size");
  TriMesh m;
  const double dy = h * std::sqrt(3.0) / 2;
  const Vec3 centre(0.5 * (nx - 1) * h + 0.25 * h, 0.5 * (ny - 1) * dy, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) m.vertices.push_back(Vec3((i + 0.5 * (j % 2)) * h, j * dy, 0) - centre);
  }
  auto id = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      if (j % 2 == 0) {
        m.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        m.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      }
    }
  }
  update_boundary_flags(m);
  return m;
}

TriMesh clipped_disc(double R, double edge) {
  if (!(R > 0) || !(edge > 0)) throw Error(ErrorKind::InvalidInput, "clipped_disc: bad radius or edge");
  int n = 2 * static_cast<int>(std::ceil((R + 2 * edge) / edge)) + 1;
  int ny = 2 * static_cast<int>(std::ceil((R + 2 * edge) / (edge * std::sqrt(3.0) / 2))) + 1;
  TriMesh grid = triangle_grid(n, ny, edge);
  return clip_to_ball(grid, R);
}

TriMesh clipped_cylinder(double radius, double R, int segments) {
  if (!(radius > 0) || !(R > radius) || segments < 3) {
    throw Error(ErrorKind::InvalidInput, "clipped_cylinder: bad parameters");
  }
  TriMesh m;
  const double step = 2 * kPi * radius / segments;
  const double dz = step * std::sqrt(3.0) / 2;
  const double zmax = std::sqrt(R * R - radius * radius) + 2 * dz;
  const int half = static_cast<int>(std::ceil(zmax / dz));
  const int rings = 2 * half + 1;
  for (int j = 0; j < rings; ++j) {
    double z = (j - half) * dz;
    double off = (j % 2) * 0.5;
    for (int i = 0; i < segments; ++i) {
      double a = 2 * kPi * (i + off) / segments;
      m.vertices.push_back(Vec3(radius * std::cos(a), radius * std::sin(a), z));
    }
  }
  auto id = [segments](int i, int j) { return j * segments + ((i % segments) + segments) % segments; };
  for (int j = 0; j + 1 < rings; ++j) {
    for (int i = 0; i < segments; ++i) {
      // outward normals: counter-clockwise seen from outside
      if (j % 2 == 0) {
        m.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        m.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      }
    }
  }
  update_boundary_flags(m);
  return clip_to_ball(m, R);
}

TriMesh torus(double major, double minor, int nu, int nv) {
  if (!(major > minor) || !(minor > 0) || nu < 3 || nv < 3) {
    throw Error(ErrorKind::InvalidInput, "torus: bad parameters");
  }
  TriMesh m;
  for (int i = 0; i < nu; ++i) {
    double u = 2 * kPi * i / nu;
    for (int j = 0; j < nv; ++j) {
      double v = 2 * kPi * j / nv;
      double r = major + minor * std::cos(v);
      m.vertices.push_back(Vec3(r * std::cos(u), r * std::sin(u), minor * std::sin(v)));
    }
  }
  auto id = [nu, nv](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  update_boundary_flags(m);
  return m;
}

TriMesh structured_torus(int nu, int nv) { return torus(3.0, 1.0, nu, nv); }

} // namespace shrinker
