#include "shrinker/trimesh.hpp"
#include "shrinker/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace shrinker {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

bool indices_ok(const TriMesh& mesh) {
  const int n = mesh.num_vertices();
  for (const Tri& t : mesh.triangles) {
    for (int v : t) {
      if (v < 0 || v >= n) return false;
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return false;
  }
  return true;
}

// Orientation agreement on an edge shared by two triangles: each must traverse it
// in the opposite direction.
bool traverses(const Tri& t, int a, int b) {
  for (int k = 0; k < 3; ++k) {
    if (t[k] == a && t[(k + 1) % 3] == b) return true;
  }
  return false;
}

} // namespace

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = (b - a).cross(c - a);
  double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

void update_boundary_flags(TriMesh& mesh) {
  mesh.boundary_flags.assign(mesh.vertices.size(), 0);
  for (const EdgeInfo& e : build_edges(mesh)) {
    if (e.count == 1) {
      mesh.boundary_flags[e.a] = 1;
      mesh.boundary_flags[e.b] = 1;
    }
  }
}

std::vector<EdgeInfo> build_edges(const TriMesh& mesh) {
  std::vector<std::pair<std::uint64_t, int>> half;
  half.reserve(mesh.triangles.size() * 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Tri& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) half.emplace_back(edge_key(tri[k], tri[(k + 1) % 3]), t);
  }
  std::sort(half.begin(), half.end());
  std::vector<EdgeInfo> edges;
  edges.reserve(half.size() / 2 + 1);
  for (size_t i = 0; i < half.size();) {
    size_t j = i;
    EdgeInfo e;
    e.a = static_cast<int>(half[i].first >> 32);
    e.b = static_cast<int>(half[i].first & 0xffffffffu);
    while (j < half.size() && half[j].first == half[i].first) {
      if (e.count == 0) e.t0 = half[j].second;
      else if (e.count == 1) e.t1 = half[j].second;
      ++e.count;
      ++j;
    }
    edges.push_back(e);
    i = j;
  }
  return edges;
}

VertexTriangles build_vertex_triangles(const TriMesh& mesh) {
  VertexTriangles vt;
  const int n = mesh.num_vertices();
  vt.offsets.assign(n + 1, 0);
  for (const Tri& t : mesh.triangles) {
    for (int v : t) ++vt.offsets[v + 1];
  }
  for (int v = 0; v < n; ++v) vt.offsets[v + 1] += vt.offsets[v];
  vt.triangles.resize(vt.offsets[n]);
  std::vector<int> fill(vt.offsets.begin(), vt.offsets.end() - 1);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles[t]) vt.triangles[fill[v]++] = t;
  }
  return vt;
}

std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
  std::vector<std::vector<int>> nbrs(mesh.vertices.size());
  for (const Tri& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      nbrs[t[k]].push_back(t[(k + 1) % 3]);
      nbrs[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  for (auto& n : nbrs) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return nbrs;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "non_finite=" << non_finite_vertices << " invalid_indices=" << invalid_indices
     << " nonmanifold_edges=" << nonmanifold_edges << " nonmanifold_vertices=" << nonmanifold_vertices
     << " orientation_defects=" << orientation_defects << " duplicate_vertices=" << duplicate_vertices
     << " degenerate_triangles=" << degenerate_triangles
     << " unreferenced_vertices=" << unreferenced_vertices;
  return os.str();
}

namespace {

// Manifold-vertex test: the link of every vertex must be a single path or cycle.
int count_nonmanifold_vertices(const TriMesh& mesh, const VertexTriangles& vt) {
  int bad = 0;
  std::unordered_map<int, int> local;
  std::vector<int> parent;
  std::vector<int> degree;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (vt.begin(v) == vt.end(v)) continue;
    local.clear();
    parent.clear();
    degree.clear();
    auto id = [&](int w) {
      auto [it, inserted] = local.emplace(w, static_cast<int>(parent.size()));
      if (inserted) {
        parent.push_back(it->second);
        degree.push_back(0);
      }
      return it->second;
    };
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int i = vt.begin(v); i < vt.end(v); ++i) {
      const Tri& t = mesh.triangles[vt.triangles[i]];
      int k = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
      int a = id(t[(k + 1) % 3]);
      int b = id(t[(k + 2) % 3]);
      ++degree[a];
      ++degree[b];
      int ra = find(a), rb = find(b);
      if (ra != rb) parent[ra] = rb;
    }
    bool ok = true;
    int root = find(0);
    for (size_t i = 0; i < parent.size(); ++i) {
      if (degree[i] > 2 || find(static_cast<int>(i)) != root) ok = false;
    }
    if (!ok) ++bad;
  }
  return bad;
}

} // namespace

ValidationReport validate(const TriMesh& mesh) {
  ValidationReport r;
  for (const Vec3& p : mesh.vertices) {
    if (!p.allFinite()) ++r.non_finite_vertices;
  }
  const int n = mesh.num_vertices();
  for (const Tri& t : mesh.triangles) {
    bool bad = false;
    for (int v : t) bad |= (v < 0 || v >= n);
    bad |= (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]);
    if (bad) ++r.invalid_indices;
  }
  if (r.invalid_indices > 0) return r;

  const auto edges = build_edges(mesh);
  for (const EdgeInfo& e : edges) {
    if (e.count > 2) {
      ++r.nonmanifold_edges;
    } else if (e.count == 2) {
      const Tri& t0 = mesh.triangles[e.t0];
      const Tri& t1 = mesh.triangles[e.t1];
      bool d0 = traverses(t0, e.a, e.b);
      bool d1 = traverses(t1, e.a, e.b);
      if (d0 == d1) ++r.orientation_defects;
    }
  }
  const VertexTriangles vt = build_vertex_triangles(mesh);
  r.nonmanifold_vertices = r.nonmanifold_edges > 0 ? 0 : count_nonmanifold_vertices(mesh, vt);
  for (int v = 0; v < n; ++v) {
    if (vt.begin(v) == vt.end(v)) ++r.unreferenced_vertices;
  }

  const BoundingBox box = bounding_box(mesh.vertices);
  const double diam = box.diameter();
  if (r.non_finite_vertices == 0 && n > 1) {
    KdTree tree(mesh.vertices);
    const double tol = 1e-9 * diam;
    for (int v = 0; v < n; ++v) {
      for (int w : tree.within(mesh.vertices[v], tol)) {
        if (w > v) ++r.duplicate_vertices;
      }
    }
  }
  const double area_tol = 1e-14 * diam * diam;
  for (const Tri& t : mesh.triangles) {
    double a = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (!(a > area_tol)) ++r.degenerate_triangles;
  }
  return r;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh) {
  // next[a] = b for each boundary halfedge a->b (oriented as in its triangle)
  std::unordered_map<int, int> next;
  for (const EdgeInfo& e : build_edges(mesh)) {
    if (e.count != 1) continue;
    const Tri& t = mesh.triangles[e.t0];
    if (traverses(t, e.a, e.b)) next[e.a] = e.b;
    else next[e.b] = e.a;
  }
  std::vector<int> starts;
  starts.reserve(next.size());
  for (const auto& [a, b] : next) starts.push_back(a);
  std::sort(starts.begin(), starts.end());
  std::unordered_map<int, bool> seen;
  std::vector<std::vector<int>> loops;
  for (int s : starts) {
    if (seen[s]) continue;
    std::vector<int> loop;
    int v = s;
    while (!seen[v]) {
      seen[v] = true;
      loop.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) break;
      v = it->second;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

TopologyReport topology(const TriMesh& mesh) {
  if (!indices_ok(mesh)) throw Error(ErrorKind::TopologyUndefined, "topology: invalid triangle indices");
  const auto edges = build_edges(mesh);
  for (const EdgeInfo& e : edges) {
    if (e.count > 2) throw Error(ErrorKind::TopologyUndefined, "topology: non-manifold edge");
    if (e.count == 2 &&
        traverses(mesh.triangles[e.t0], e.a, e.b) == traverses(mesh.triangles[e.t1], e.a, e.b)) {
      throw Error(ErrorKind::TopologyUndefined, "topology: mesh is not consistently oriented");
    }
  }
  const VertexTriangles vt = build_vertex_triangles(mesh);
  if (count_nonmanifold_vertices(mesh, vt) > 0) {
    throw Error(ErrorKind::TopologyUndefined, "topology: non-manifold vertex");
  }

  const int n = mesh.num_vertices();
  UnionFind uf(n);
  for (const Tri& t : mesh.triangles) {
    uf.unite(t[0], t[1]);
    uf.unite(t[1], t[2]);
  }
  std::unordered_map<int, int> comp_index;
  for (int v = 0; v < n; ++v) {
    if (vt.begin(v) == vt.end(v)) continue;
    comp_index.emplace(uf.find(v), static_cast<int>(comp_index.size()));
  }
  const int nc = static_cast<int>(comp_index.size());
  std::vector<long> chi(nc, 0), loops(nc, 0);
  for (int v = 0; v < n; ++v) {
    if (vt.begin(v) != vt.end(v)) ++chi[comp_index[uf.find(v)]];
  }
  for (const EdgeInfo& e : edges) --chi[comp_index[uf.find(e.a)]];
  for (const Tri& t : mesh.triangles) ++chi[comp_index[uf.find(t[0])]];
  for (const auto& loop : boundary_loops(mesh)) ++loops[comp_index[uf.find(loop.front())]];

  TopologyReport r;
  r.components = nc;
  for (int c = 0; c < nc; ++c) {
    long twice_genus = 2 - chi[c] - loops[c];
    if (twice_genus < 0 || twice_genus % 2 != 0) {
      throw Error(ErrorKind::TopologyUndefined, "topology: inconsistent Euler characteristic");
    }
    r.euler += static_cast<int>(chi[c]);
    r.boundary_loops += static_cast<int>(loops[c]);
    r.genus += static_cast<int>(twice_genus / 2);
  }
  return r;
}

int euler_characteristic(const TriMesh& mesh) {
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const Tri& t : mesh.triangles) {
    for (int v : t) used[v] = 1;
  }
  long v = std::count(used.begin(), used.end(), 1);
  long e = static_cast<long>(build_edges(mesh).size());
  return static_cast<int>(v - e + static_cast<long>(mesh.triangles.size()));
}

bool orient_consistently(TriMesh& mesh) {
  const auto edges = build_edges(mesh);
  std::vector<std::vector<std::pair<int, int>>> adj(mesh.triangles.size());  // (neighbour, edge)
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const EdgeInfo& e = edges[i];
    if (e.count == 2) {
      adj[e.t0].emplace_back(e.t1, i);
      adj[e.t1].emplace_back(e.t0, i);
    }
  }
  std::vector<char> seen(mesh.triangles.size(), 0);
  bool ok = true;
  for (int s = 0; s < mesh.num_triangles(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int t = q.front();
      q.pop();
      for (auto [u, ei] : adj[t]) {
        const EdgeInfo& e = edges[ei];
        bool same = traverses(mesh.triangles[t], e.a, e.b) == traverses(mesh.triangles[u], e.a, e.b);
        if (!seen[u]) {
          if (same) std::swap(mesh.triangles[u][1], mesh.triangles[u][2]);
          seen[u] = 1;
          q.push(u);
        } else if (same) {
          ok = false;
        }
      }
    }
  }
  return ok;
}

void remove_unreferenced_vertices(TriMesh& mesh) {
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const Tri& t : mesh.triangles) {
    for (int v : t) remap[v] = 0;
  }
  std::vector<Vec3> verts;
  std::vector<int> labels;
  const bool has_labels = mesh.orbit_labels.size() == mesh.vertices.size();
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (remap[v] < 0) continue;
    remap[v] = static_cast<int>(verts.size());
    verts.push_back(mesh.vertices[v]);
    if (has_labels) labels.push_back(mesh.orbit_labels[v]);
  }
  for (Tri& t : mesh.triangles) {
    for (int& v : t) v = remap[v];
  }
  mesh.vertices = std::move(verts);
  mesh.orbit_labels = has_labels ? std::move(labels) : std::vector<int>{};
  update_boundary_flags(mesh);
}

TriMesh clip_to_ball(const TriMesh& mesh, double radius) {
  if (!(radius > 0)) throw Error(ErrorKind::InvalidInput, "clip_to_ball: radius must be positive");
  const double snap = 1e-9 * radius;
  enum Side : char { Inside, On, Outside };

  TriMesh out;
  out.vertices = mesh.vertices;
  const bool has_labels = mesh.orbit_labels.size() == mesh.vertices.size();
  if (has_labels) out.orbit_labels = mesh.orbit_labels;
  std::vector<Side> side(mesh.vertices.size());
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3& p = out.vertices[v];
    double r = p.norm();
    if (std::abs(r - radius) <= snap) {
      p *= radius / r;
      side[v] = On;
    } else {
      side[v] = r < radius ? Inside : Outside;
    }
  }

  std::unordered_map<std::uint64_t, int> crossing;
  auto cross_vertex = [&](int in, int outv) {
    auto key = edge_key(in, outv);
    auto it = crossing.find(key);
    if (it != crossing.end()) return it->second;
    const Vec3& p = out.vertices[in];
    const Vec3 d = out.vertices[outv] - p;
    double a = d.squaredNorm(), b = 2 * p.dot(d), c = p.squaredNorm() - radius * radius;
    double disc = std::max(0.0, b * b - 4 * a * c);
    double s = (-b + std::sqrt(disc)) / (2 * a);
    Vec3 x = p + s * d;
    x *= radius / x.norm();
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(x);
    if (has_labels) out.orbit_labels.push_back(-1);
    crossing.emplace(key, id);
    return id;
  };

  const double area_tol = 1e-14 * radius * radius;
  for (const Tri& t : mesh.triangles) {
    if (side[t[0]] != Outside && side[t[1]] != Outside && side[t[2]] != Outside) {
      out.triangles.push_back(t);
      continue;
    }
    std::vector<int> poly;
    for (int k = 0; k < 3; ++k) {
      int p = t[k], q = t[(k + 1) % 3];
      if (side[p] != Outside) poly.push_back(p);
      if (side[p] == Inside && side[q] == Outside) poly.push_back(cross_vertex(p, q));
      if (side[p] == Outside && side[q] == Inside) poly.push_back(cross_vertex(q, p));
    }
    if (poly.size() < 3) continue;
    const size_t first = out.triangles.size();
    if (poly.size() == 3) {
      out.triangles.push_back({poly[0], poly[1], poly[2]});
    } else {
      // quad: split along the shorter diagonal; on a tie a centre vertex keeps the split
      // independent of the vertex order (and so symmetric)
      const auto& X = out.vertices;
      double d02 = (X[poly[0]] - X[poly[2]]).squaredNorm();
      double d13 = (X[poly[1]] - X[poly[3]]).squaredNorm();
      if (std::abs(d02 - d13) <= 1e-9 * std::max(d02, d13)) {
        Vec3 c = 0.25 * (X[poly[0]] + X[poly[1]] + X[poly[2]] + X[poly[3]]);
        int id = static_cast<int>(out.vertices.size());
        out.vertices.push_back(c);
        if (has_labels) out.orbit_labels.push_back(-1);
        for (int k = 0; k < 4; ++k) out.triangles.push_back({poly[k], poly[(k + 1) % 4], id});
      } else if (d02 < d13) {
        out.triangles.push_back({poly[0], poly[1], poly[2]});
        out.triangles.push_back({poly[0], poly[2], poly[3]});
      } else {
        out.triangles.push_back({poly[1], poly[2], poly[3]});
        out.triangles.push_back({poly[1], poly[3], poly[0]});
      }
    }
    for (size_t k = first; k < out.triangles.size(); ++k) {
      const Tri& nt = out.triangles[k];
      if (triangle_area(out.vertices[nt[0]], out.vertices[nt[1]], out.vertices[nt[2]]) <= area_tol) {
        throw Error(ErrorKind::ClipDegenerate, "clip_to_ball: tangential intersection with the sphere");
      }
    }
  }
  remove_unreferenced_vertices(out);
  return out;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> n(mesh.vertices.size(), Vec3::Zero());
  for (const Tri& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    Vec3 c = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    for (int v : t) n[v] += c;
  }
  for (Vec3& x : n) {
    double len = x.norm();
    if (len > 0) x /= len;
  }
  return n;
}

double mean_edge_length(const TriMesh& mesh) {
  const auto edges = build_edges(mesh);
  if (edges.empty()) return 0.0;
  double sum = 0;
  for (const EdgeInfo& e : edges) sum += (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
  return sum / static_cast<double>(edges.size());
}

double scale_of(const TriMesh& mesh) { return bounding_box(mesh.vertices).diameter(); }

TriMesh scaled(const TriMesh& mesh, double factor) {
  TriMesh out = mesh;
  for (Vec3& p : out.vertices) p *= factor;
  return out;
}

TriMesh merge(const TriMesh& a, const TriMesh& b) {
  TriMesh out;
  out.vertices = a.vertices;
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  out.triangles = a.triangles;
  const int off = a.num_vertices();
  for (Tri t : b.triangles) {
    for (int& v : t) v += off;
    out.triangles.push_back(t);
  }
  update_boundary_flags(out);
  return out;
}

} // namespace shrinker
