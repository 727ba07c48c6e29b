#include "shrinker/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace shrinker {

namespace {

using Key = std::uint64_t;

Key edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<Key>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

struct Context {
  double target = 0.0;
  const RemeshOptions* opt = nullptr;
  const SymmetryGroup* group = nullptr;
  double R = 0.0;

  double local(const Vec3& p) const { return graded_edge(p.norm(), target, opt->grade_radius, R); }
};

std::unique_ptr<OrbitStructure> orbits_of(const TriMesh& m, const SymmetryGroup* group) {
  if (!group || group->order() <= 1) return nullptr;
  return std::make_unique<OrbitStructure>(orbit_structure(m, *group, default_match_tolerance(m)));
}

// Partition of the edge list into orbits; the first entry of each orbit is its lowest index.
std::vector<std::vector<int>> edge_orbits(const std::vector<EdgeInfo>& edges, const OrbitStructure* os) {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(edges.size(), 0);
  std::unordered_map<Key, int> index;
  if (os) {
    index.reserve(edges.size() * 2);
    for (size_t e = 0; e < edges.size(); ++e) index.emplace(edge_key(edges[e].a, edges[e].b), static_cast<int>(e));
  }
  for (size_t e = 0; e < edges.size(); ++e) {
    if (seen[e]) continue;
    seen[e] = 1;
    std::vector<int> orbit{static_cast<int>(e)};
    if (os) {
      for (const auto& img : os->image) {
        auto it = index.find(edge_key(img[edges[e].a], img[edges[e].b]));
        if (it == index.end()) throw Error(ErrorKind::NotEquivariant, "edge set is not invariant under the group");
        if (!seen[it->second]) {
          seen[it->second] = 1;
          orbit.push_back(it->second);
        }
      }
    }
    out.push_back(std::move(orbit));
  }
  return out;
}

double detect_clip_radius(const TriMesh& m) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.is_boundary(v)) continue;
    double r = m.vertices[v].norm();
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (hi == 0.0 || hi - lo > 1e-6 * hi) return 0.0;
  return 0.5 * (lo + hi);
}

int split_pass(TriMesh& m, const Context& ctx) {
  auto os = orbits_of(m, ctx.group);
  auto edges = build_edges(m);
  auto orbits = edge_orbits(edges, os.get());
  std::vector<char> marked(edges.size(), 0);
  for (const auto& orbit : orbits) {
    const EdgeInfo& e = edges[orbit[0]];
    const Vec3& a = m.vertices[e.a];
    const Vec3& b = m.vertices[e.b];
    if ((a - b).norm() > ctx.opt->split_ratio * ctx.local(0.5 * (a + b))) {
      for (int i : orbit) marked[i] = 1;
    }
  }
  std::unordered_map<Key, int> index;
  index.reserve(edges.size() * 2);
  for (size_t e = 0; e < edges.size(); ++e) index.emplace(edge_key(edges[e].a, edges[e].b), static_cast<int>(e));
  auto tri_edges = [&](const Tri& t) {
    return std::array<int, 3>{index.at(edge_key(t[0], t[1])), index.at(edge_key(t[1], t[2])),
                              index.at(edge_key(t[2], t[0]))};
  };
  // Red-green closure: a triangle with two split edges gets its third split too.
  for (bool changed = true; changed;) {
    changed = false;
    for (const Tri& t : m.triangles) {
      auto te = tri_edges(t);
      int c = marked[te[0]] + marked[te[1]] + marked[te[2]];
      if (c == 2) {
        for (int i : te) marked[i] = 1;
        changed = true;
      }
    }
  }
  std::vector<int> mid(edges.size(), -1);
  int splits = 0;
  const bool labels = m.orbit_labels.size() == m.vertices.size();
  for (size_t e = 0; e < edges.size(); ++e) {
    if (!marked[e]) continue;
    Vec3 p = 0.5 * (m.vertices[edges[e].a] + m.vertices[edges[e].b]);
    if (edges[e].count == 1 && ctx.R > 0 && p.norm() > 0) p *= ctx.R / p.norm();
    mid[e] = m.num_vertices();
    m.vertices.push_back(p);
    if (labels) m.orbit_labels.push_back(-1);
    ++splits;
  }
  if (splits == 0) return 0;
  std::vector<Tri> out;
  out.reserve(m.triangles.size() * 2);
  for (const Tri& t : m.triangles) {
    auto te = tri_edges(t);
    int c = marked[te[0]] + marked[te[1]] + marked[te[2]];
    if (c == 0) {
      out.push_back(t);
    } else if (c == 3) {
      int m01 = mid[te[0]], m12 = mid[te[1]], m20 = mid[te[2]];
      out.push_back({t[0], m01, m20});
      out.push_back({m01, t[1], m12});
      out.push_back({m20, m12, t[2]});
      out.push_back({m01, m12, m20});
    } else {
      int k = marked[te[0]] ? 0 : (marked[te[1]] ? 1 : 2);
      int a = t[k], b = t[(k + 1) % 3], c3 = t[(k + 2) % 3], mm = mid[te[k]];
      out.push_back({a, mm, c3});
      out.push_back({mm, b, c3});
    }
  }
  m.triangles = std::move(out);
  update_boundary_flags(m);
  return splits;
}

// Mutable incidence used by the collapse and flip passes.
struct Dyn {
  std::vector<Vec3>& x;
  std::vector<Tri>& tris;
  std::vector<char> tri_alive;
  std::vector<std::vector<int>> vt;
  std::vector<char> bnd;

  Dyn(TriMesh& m) : x(m.vertices), tris(m.triangles), tri_alive(m.triangles.size(), 1), vt(m.vertices.size()) {
    for (size_t t = 0; t < tris.size(); ++t) {
      for (int v : tris[t]) vt[v].push_back(static_cast<int>(t));
    }
    bnd.assign(m.vertices.size(), 0);
    for (int v = 0; v < m.num_vertices(); ++v) bnd[v] = m.is_boundary(v) ? 1 : 0;
  }

  static bool has(const Tri& t, int v) { return t[0] == v || t[1] == v || t[2] == v; }

  std::vector<int> edge_tris(int a, int b) const {
    std::vector<int> r;
    for (int t : vt[a]) {
      if (tri_alive[t] && has(tris[t], b)) r.push_back(t);
    }
    return r;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> r;
    for (int t : vt[v]) {
      if (!tri_alive[t]) continue;
      for (int u : tris[t]) {
        if (u != v) r.push_back(u);
      }
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
  }

  int opposite(int t, int a, int b) const {
    for (int u : tris[t]) {
      if (u != a && u != b) return u;
    }
    return -1;
  }
};

int find(std::vector<int>& redirect, int v) {
  while (redirect[v] != v) {
    redirect[v] = redirect[redirect[v]];
    v = redirect[v];
  }
  return v;
}

struct CollapsePlan {
  int keep, drop;
  Vec3 p;
};

int collapse_pass(TriMesh& m, const Context& ctx, int& skipped) {
  auto os = orbits_of(m, ctx.group);
  auto edges = build_edges(m);
  auto orbits = edge_orbits(edges, os.get());
  const int order = os ? static_cast<int>(os->image.size()) : 0;

  std::vector<std::pair<double, int>> cand;
  for (size_t o = 0; o < orbits.size(); ++o) {
    const EdgeInfo& e = edges[orbits[o][0]];
    const Vec3& a = m.vertices[e.a];
    const Vec3& b = m.vertices[e.b];
    double len = (a - b).norm();
    double lim = ctx.opt->collapse_ratio * ctx.local(0.5 * (a + b));
    if (len < lim) cand.emplace_back(len / lim, static_cast<int>(o));
  }
  if (cand.empty()) return 0;
  std::sort(cand.begin(), cand.end());

  Dyn d(m);
  std::vector<int> redirect(m.vertices.size());
  std::iota(redirect.begin(), redirect.end(), 0);
  std::vector<char> vdead(m.vertices.size(), 0);

  auto img = [&](int g, int v) { return find(redirect, os->image[g][v]); };
  auto fixes = [&](int g, int v) { return img(g, v) == v; };

  int collapses = 0;
  for (auto [ratio, o] : cand) {
    (void)ratio;
    // Current form of the orbit's edges.
    std::vector<std::pair<int, int>> cur;
    std::unordered_set<Key> keys;
    bool ok = true;
    for (int ei : orbits[o]) {
      int a = find(redirect, edges[ei].a), b = find(redirect, edges[ei].b);
      if (a == b) {
        ok = false;
        break;
      }
      if (keys.insert(edge_key(a, b)).second) cur.emplace_back(a, b);
    }
    if (!ok) continue;

    std::vector<CollapsePlan> plan;
    std::unordered_set<int> touched;
    for (auto [a, b] : cur) {
      auto et = d.edge_tris(a, b);
      if (et.empty()) {
        ok = false;
        break;
      }
      double len = (d.x[a] - d.x[b]).norm();
      Vec3 midp = 0.5 * (d.x[a] + d.x[b]);
      double L = ctx.local(midp);
      if (len >= ctx.opt->collapse_ratio * L) {
        ok = false;
        break;
      }
      const bool eb = et.size() == 1;
      const bool ba = d.bnd[a], bb = d.bnd[b];
      if (ba && bb && !eb) {
        ok = false;
        break;
      }
      // Symmetry constraints on the surviving position.
      bool swapped = false, sub_ab = true, sub_ba = true;
      for (int g = 0; g < order; ++g) {
        if (img(g, a) == b && img(g, b) == a) swapped = true;
        bool fa = fixes(g, a), fb = fixes(g, b);
        if (fa && !fb) sub_ab = false;  // fix(a) not inside fix(b)
        if (fb && !fa) sub_ba = false;
      }
      CollapsePlan pl{a, b, midp};
      if (ba != bb) {
        // Keep the boundary vertex where it is.
        if (bb) std::swap(pl.keep, pl.drop);
        bool allowed = bb ? sub_ab : sub_ba;
        if (!allowed) {
          ok = false;
          break;
        }
        pl.p = d.x[pl.keep];
      } else if (swapped || (sub_ab && sub_ba)) {
        if (eb && ctx.R > 0 && pl.p.norm() > 0) pl.p *= ctx.R / pl.p.norm();
      } else if (sub_ab) {
        std::swap(pl.keep, pl.drop);
        pl.p = d.x[pl.keep];
      } else if (sub_ba) {
        pl.p = d.x[pl.keep];
      } else {
        ok = false;
        break;
      }

      // Link condition.
      auto na = d.neighbors(a), nb = d.neighbors(b);
      std::vector<int> common;
      std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
      std::vector<int> opp;
      for (int t : et) opp.push_back(d.opposite(t, a, b));
      std::sort(opp.begin(), opp.end());
      if (common != opp) {
        ok = false;
        break;
      }
      for (int c : opp) {
        int val = static_cast<int>(d.neighbors(c).size());
        if (val <= (d.bnd[c] ? 2 : 3)) ok = false;
      }
      // A boundary loop of three edges would vanish.
      if (eb) {
        int c = opp[0];
        if (d.bnd[c] && d.edge_tris(a, c).size() == 1 && d.edge_tris(b, c).size() == 1) ok = false;
      }
      if (static_cast<int>(na.size()) + static_cast<int>(nb.size()) - 2 - static_cast<int>(opp.size()) < 3) ok = false;
      if (!ok) break;

      // Geometry of the triangles that survive.
      for (int v : {a, b}) {
        for (int t : d.vt[v]) {
          if (!d.tri_alive[t] || (Dyn::has(d.tris[t], a) && Dyn::has(d.tris[t], b))) continue;
          std::array<Vec3, 3> q{d.x[d.tris[t][0]], d.x[d.tris[t][1]], d.x[d.tris[t][2]]};
          Vec3 n0 = triangle_normal(q[0], q[1], q[2]);
          for (int k = 0; k < 3; ++k) {
            if (d.tris[t][k] == a || d.tris[t][k] == b) q[k] = pl.p;
          }
          Vec3 n1 = triangle_normal(q[0], q[1], q[2]);
          if (n0.dot(n1) < 0.5 || triangle_area(q[0], q[1], q[2]) < 1e-10 * L * L) ok = false;
          for (int k = 0; k < 3; ++k) {
            const Vec3& p0 = q[k];
            const Vec3& p1 = q[(k + 1) % 3];
            if ((p0 - p1).norm() > ctx.opt->split_ratio * ctx.local(0.5 * (p0 + p1))) ok = false;
          }
        }
      }
      if (!ok) break;

      // Distinct edges of the orbit must have disjoint closed neighbourhoods.
      std::vector<int> hood = na;
      hood.insert(hood.end(), nb.begin(), nb.end());
      hood.push_back(a);
      hood.push_back(b);
      std::sort(hood.begin(), hood.end());
      hood.erase(std::unique(hood.begin(), hood.end()), hood.end());
      for (int v : hood) {
        if (!touched.insert(v).second) ok = false;
      }
      if (!ok) break;
      plan.push_back(pl);
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    for (const CollapsePlan& pl : plan) {
      d.x[pl.keep] = pl.p;
      for (int t : d.vt[pl.drop]) {
        if (!d.tri_alive[t]) continue;
        if (Dyn::has(d.tris[t], pl.keep)) {
          d.tri_alive[t] = 0;
          continue;
        }
        for (int& u : d.tris[t]) {
          if (u == pl.drop) u = pl.keep;
        }
        d.vt[pl.keep].push_back(t);
      }
      d.vt[pl.drop].clear();
      d.bnd[pl.keep] = d.bnd[pl.keep] || d.bnd[pl.drop];
      vdead[pl.drop] = 1;
      redirect[pl.drop] = pl.keep;
      ++collapses;
    }
  }
  if (collapses == 0) return 0;
  std::vector<Tri> alive;
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    if (d.tri_alive[t]) alive.push_back(m.triangles[t]);
  }
  m.triangles = std::move(alive);
  remove_unreferenced_vertices(m);
  update_boundary_flags(m);
  return collapses;
}

int flip_pass(TriMesh& m, const Context& ctx) {
  auto os = orbits_of(m, ctx.group);
  auto edges = build_edges(m);
  auto orbits = edge_orbits(edges, os.get());
  Dyn d(m);
  std::vector<int> valence(m.vertices.size(), 0);
  for (const EdgeInfo& e : edges) {
    ++valence[e.a];
    ++valence[e.b];
  }
  auto target = [&](int v) { return d.bnd[v] ? 4 : 6; };
  auto dev = [&](int v, int delta) {
    int x = valence[v] + delta - target(v);
    return x * x;
  };
  int flips = 0;
  for (const auto& orbit : orbits) {
    if (edges[orbit[0]].count != 2) continue;
    struct Flip {
      int t1, t2, a, b, c, dd;
    };
    std::vector<Flip> plan;
    std::unordered_set<int> used_v;
    bool ok = true;
    for (int ei : orbit) {
      int a = edges[ei].a, b = edges[ei].b;
      auto et = d.edge_tris(a, b);
      if (et.size() != 2) {
        ok = false;
        break;
      }
      int t1 = et[0], t2 = et[1];
      // t1 must traverse a -> b.
      auto forward = [&](int t) {
        for (int k = 0; k < 3; ++k) {
          if (d.tris[t][k] == a && d.tris[t][(k + 1) % 3] == b) return true;
        }
        return false;
      };
      if (!forward(t1)) std::swap(t1, t2);
      if (!forward(t1)) {
        ok = false;
        break;
      }
      int c = d.opposite(t1, a, b), dd = d.opposite(t2, a, b);
      if (c == dd || !d.edge_tris(c, dd).empty()) {
        ok = false;
        break;
      }
      if (valence[a] - 1 < (d.bnd[a] ? 2 : 3) || valence[b] - 1 < (d.bnd[b] ? 2 : 3)) {
        ok = false;
        break;
      }
      int before = dev(a, 0) + dev(b, 0) + dev(c, 0) + dev(dd, 0);
      int after = dev(a, -1) + dev(b, -1) + dev(c, 1) + dev(dd, 1);
      if (after >= before) {
        ok = false;
        break;
      }
      const Vec3 &pa = d.x[a], &pb = d.x[b], &pc = d.x[c], &pd = d.x[dd];
      Vec3 navg = triangle_normal(pa, pb, pc) + triangle_normal(pb, pa, pd);
      if (navg.norm() < 1e-12) {
        ok = false;
        break;
      }
      navg.normalize();
      Vec3 n1 = triangle_normal(pc, pa, pd), n2 = triangle_normal(pd, pb, pc);
      double L = ctx.local(0.25 * (pa + pb + pc + pd));
      // A flip whose new edge the next split would cut again only oscillates.
      if ((pc - pd).norm() > ctx.opt->split_ratio * ctx.local(0.5 * (pc + pd))) {
        ok = false;
        break;
      }
      if (n1.dot(navg) < 0.7 || n2.dot(navg) < 0.7 || n1.dot(n2) < 0.7 || triangle_area(pc, pa, pd) < 1e-10 * L * L ||
          triangle_area(pd, pb, pc) < 1e-10 * L * L) {
        ok = false;
        break;
      }
      for (int v : {a, b, c, dd}) {
        if (!used_v.insert(v).second) ok = false;
      }
      if (!ok) break;
      plan.push_back({t1, t2, a, b, c, dd});
    }
    if (!ok) continue;
    for (const Flip& f : plan) {
      d.tris[f.t1] = {f.c, f.a, f.dd};
      d.tris[f.t2] = {f.dd, f.b, f.c};
      std::erase(d.vt[f.a], f.t2);
      std::erase(d.vt[f.b], f.t1);
      d.vt[f.c].push_back(f.t2);
      d.vt[f.dd].push_back(f.t1);
      --valence[f.a];
      --valence[f.b];
      ++valence[f.c];
      ++valence[f.dd];
      ++flips;
    }
  }
  return flips;
}

} // namespace

double graded_edge(double r, double edge, double grade_radius, double clip_radius) {
  double L = edge;
  if (grade_radius > 0) {
    double q = r / grade_radius;
    L *= std::clamp(q * q, 1.0, 2.5);
  }
  // Fine last rings: the contact angle with the sphere is read off boundary triangles.
  if (clip_radius > 0) L = std::min(L, edge * (1.25 + 1.5 * std::max(0.0, clip_radius - r)));
  return L;
}

double edge_band_fraction(const TriMesh& mesh, double target_edge, double grade_radius, double lo, double hi,
                          double clip_radius) {
  auto edges = build_edges(mesh);
  if (edges.empty()) return 0.0;
  int in = 0;
  for (const EdgeInfo& e : edges) {
    const Vec3& a = mesh.vertices[e.a];
    const Vec3& b = mesh.vertices[e.b];
    double L = graded_edge((0.5 * (a + b)).norm(), target_edge, grade_radius, clip_radius);
    double len = (a - b).norm();
    if (len >= lo * L && len <= hi * L) ++in;
  }
  return static_cast<double>(in) / static_cast<double>(edges.size());
}

void tangential_relax(TriMesh& mesh, double weight, double clip_radius, const SymmetryGroup* group,
                      const OrbitStructure* orbits) {
  const int nv = mesh.num_vertices();
  if (mesh.boundary_flags.size() != mesh.vertices.size()) update_boundary_flags(mesh);
  auto normals = vertex_normals(mesh);
  auto nbrs = vertex_neighbors(mesh);
  std::vector<int> prev(nv, -1), next(nv, -1);
  for (const auto& loop : boundary_loops(mesh)) {
    const int k = static_cast<int>(loop.size());
    for (int i = 0; i < k; ++i) {
      prev[loop[i]] = loop[(i + k - 1) % k];
      next[loop[i]] = loop[(i + 1) % k];
    }
  }
  std::vector<Vec3> out = mesh.vertices;
  for (int v = 0; v < nv; ++v) {
    const Vec3& x = mesh.vertices[v];
    if (mesh.is_boundary(v)) {
      // Without a carrying sphere the boundary curve has no known continuation.
      if (clip_radius <= 0 || prev[v] < 0 || next[v] < 0) continue;
      const Vec3& p = mesh.vertices[prev[v]];
      const Vec3& q = mesh.vertices[next[v]];
      Vec3 t = q - p;
      double r = x.norm();
      if (r > 0) t -= t.dot(x / r) * (x / r);
      if (t.norm() < 1e-14) continue;
      t.normalize();
      Vec3 y = x + weight * (0.5 * (p + q) - x).dot(t) * t;
      if (y.norm() > 0) y *= clip_radius / y.norm();
      out[v] = y;
    } else {
      if (nbrs[v].empty()) continue;
      Vec3 c = Vec3::Zero();
      for (int u : nbrs[v]) c += mesh.vertices[u];
      c /= static_cast<double>(nbrs[v].size());
      Vec3 dlt = c - x;
      const Vec3& n = normals[v];
      dlt -= dlt.dot(n) * n;
      out[v] = x + weight * dlt;
    }
  }
  if (group && orbits && group->order() > 1) symmetrize_positions(out, *group, *orbits);
  mesh.vertices = std::move(out);
}

TriMesh remesh(const TriMesh& mesh, double target_edge, const SymmetryGroup* group, const RemeshOptions& options,
               RemeshStats* stats) {
  if (!(target_edge > 0)) throw Error(ErrorKind::InvalidInput, "remesh: target edge must be positive");
  TriMesh m = mesh;
  update_boundary_flags(m);
  Context ctx;
  ctx.target = target_edge;
  ctx.opt = &options;
  ctx.group = group;
  ctx.R = options.clip_radius > 0 ? options.clip_radius : detect_clip_radius(m);
  const TopologyReport topo0 = topology(m);
  RemeshStats st;
  for (int pass = 0; pass < options.passes; ++pass) {
    st.splits += split_pass(m, ctx);
    {
      TriMesh backup = m;
      int n = collapse_pass(m, ctx, st.skipped_collapses);
      if (n > 0 && !(topology(m) == topo0)) {
        m = std::move(backup);
      } else {
        st.collapses += n;
      }
    }
    st.flips += flip_pass(m, ctx);
    auto os = orbits_of(m, group);
    for (int k = 0; k < 2; ++k) tangential_relax(m, options.relax_weight, ctx.R, group, os.get());
  }
  if (!(topology(m) == topo0)) throw Error(ErrorKind::TopologyDrift, "remesh changed the topology");
  if (auto os = orbits_of(m, group)) {
    m.orbit_labels = os->orbit_of;
  } else {
    m.orbit_labels.clear();
  }
  st.in_band_fraction = edge_band_fraction(m, target_edge, options.grade_radius, options.collapse_ratio,
                                           options.split_ratio, ctx.R);
  st.band_reached = st.in_band_fraction >= 0.9;
  if (stats) *stats = st;
  return m;
}

} // namespace shrinker
