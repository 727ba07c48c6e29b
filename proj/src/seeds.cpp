#include "shrinker/seeds.hpp"
#include "shrinker/gaussmetric.hpp"
#include "shrinker/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace shrinker {

namespace {

constexpr double kPi = std::numbers::pi;
using Vec2 = Eigen::Vector2d;

double smoothstep5(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * x * (x * (6 * x - 15) + 10);
}

// Neck profile cutoff: 1 on |lambda| <= 3w, 0 beyond 6w.
double cutoff(double lambda, double w) { return 1.0 - smoothstep5((std::abs(lambda) / w - 3.0) / 3.0); }

// Smallest m = c * 2^a >= 2 (c in {1, 3}) with arcs * m >= need; m >= 2 leaves every
// arc with a node that is not a transition.
int ring_multiplier(int arcs, double need) {
  int best = 1 << 30;
  for (int c : {2, 3}) {
    int m = c;
    while (arcs * m < need) m *= 2;
    best = std::min(best, m);
  }
  return best;
}

// Target edge length at distance r from the origin; beyond 1.25 R the surface is
// discarded by clipping and only needs to exist.
double seed_sizing(double r, double edge, double grade_r, double R) {
  double L = graded_edge(r, edge, grade_r, R);
  if (r > 1.25 * R) L = std::max(L, 0.25 * r);
  return L;
}

// A circle along which four arms (meridian half-lines) meet. Arms 0 and 1 lie on one
// surface, arms 2 and 3 on the other. Pairing "type I" joins arms {0,2} and {1,3},
// "type II" joins {0,3} and {1,2}.
struct Crossing {
  Vec2 X;
  std::array<Vec2, 4> e;
  bool type_one_on_even = true;
};

struct Arm {
  std::function<Vec2(double)> mer;     // meridian point (rho, z) at parameter u
  std::function<double(double)> dist;  // distance from the crossing circle
  std::function<double(double)> factor;  // rho, circumference / 2 pi
};

class Builder {
public:
  Builder(int arcs, double w, double unit_edge, double scale, double grade_r)
      : arcs_(arcs), w_(w), unit_edge_(unit_edge), scale_(scale), grade_r_(grade_r) {}

  std::vector<Crossing> circles;
  TriMesh mesh;

  bool is_transition(int j, int M) const { return j % (M / arcs_) == 0; }
  int arc_of(int j, int M) const { return j / (M / arcs_) + 1; }
  double abs_s(int j, int M) const { return std::abs(std::sin(0.5 * arcs_ * 2 * kPi * j / M)); }

  bool type_one(int c, int j, int M) const { return (arc_of(j, M) % 2 == 0) == circles[c].type_one_on_even; }
  static int sheet_of(int arm, bool t1) {
    if (arm < 2) return arm;
    return (arm == 2) == t1 ? 0 : 1;
  }
  static int partner(int arm, bool t1) {
    static const int p1[4] = {2, 3, 0, 1};
    static const int p2[4] = {3, 2, 1, 0};
    return t1 ? p1[arm] : p2[arm];
  }

  double sizing(const Vec2& mer) const { return seed_sizing(scale_ * mer.norm(), unit_edge_ * scale_, grade_r_, clip_) / scale_; }
  void set_clip(double R) { clip_ = R; }

  int add(const Vec2& mer, int j, int M) {
    double th = 2 * kPi * j / M;
    mesh.vertices.push_back(Vec3(mer.x() * std::cos(th), mer.x() * std::sin(th), mer.y()));
    return mesh.num_vertices() - 1;
  }

  // Arm vertex displaced by the neck profile of circle c.
  int add_arm_vertex(int c, int arm, double d, const Vec2& mer, int j, int M) {
    Vec2 p = mer;
    if (c >= 0 && !is_transition(j, M) && d < 6 * w_) {
      bool t1 = type_one(c, j, M);
      int b = partner(arm, t1);
      double lam = d / w_;
      double v = 0.5 * w_ * std::acosh(std::cosh(lam) + 2 * abs_s(j, M) * cutoff(d, w_));
      p += (v - 0.5 * d) * (circles[c].e[arm] + circles[c].e[b]);
    }
    return add(p, j, M);
  }

  // Ring of M nodes on circle c, returned per arm (copies split by sheet away from transitions).
  std::array<std::vector<int>, 4> junction(int c, int M) {
    std::array<std::vector<int>, 4> view;
    for (auto& v : view) v.resize(M);
    const Crossing& cr = circles[c];
    for (int j = 0; j < M; ++j) {
      if (is_transition(j, M)) {
        int id = add(cr.X, j, M);
        for (auto& v : view) v[j] = id;
        continue;
      }
      bool t1 = type_one(c, j, M);
      double v0 = 0.5 * w_ * std::acosh(1 + 2 * abs_s(j, M));
      int copy[2];
      for (int s = 0; s < 2; ++s) {
        int a = s, b = partner(s, t1);
        copy[s] = add(cr.X + v0 * (cr.e[a] + cr.e[b]), j, M);
      }
      for (int arm = 0; arm < 4; ++arm) view[arm][j] = copy[sheet_of(arm, t1)];
    }
    return view;
  }

  // Strip between ring A (nearer the reference circle or symmetry plane) and ring B.
  // Equal counts use quads with the diagonal alternating per half arc so the pattern is
  // invariant under the dihedral group; a 2:1 ratio uses the halving pattern.
  void strip(const std::vector<int>& A, const std::vector<int>& B) {
    auto& T = mesh.triangles;
    const int na = static_cast<int>(A.size()), nb = static_cast<int>(B.size());
    if (na == nb) {
      const int m = na / arcs_;
      for (int c = 0; c < na; ++c) {
        int a0 = A[c], a1 = A[(c + 1) % na], b0 = B[c], b1 = B[(c + 1) % na];
        if (c % (2 * m) < m) {
          T.push_back({a0, a1, b1});
          T.push_back({a0, b1, b0});
        } else {
          T.push_back({a0, a1, b0});
          T.push_back({a1, b1, b0});
        }
      }
    } else if (na == 2 * nb) {
      for (int j = 0; j < nb; ++j) {
        int o0 = A[2 * j], o1 = A[2 * j + 1], o2 = A[(2 * j + 2) % na];
        int i0 = B[j], i1 = B[(j + 1) % nb];
        T.push_back({o0, o1, i0});
        T.push_back({o1, o2, i1});
        T.push_back({o1, i1, i0});
      }
    } else if (nb == 2 * na) {
      strip(B, A);
    } else {
      throw Error(ErrorKind::SeedGeometry, "seed: incompatible ring sizes");
    }
  }

  void fan(const std::vector<int>& ring, int apex) {
    const int n = static_cast<int>(ring.size());
    for (int j = 0; j < n; ++j) mesh.triangles.push_back({ring[j], ring[(j + 1) % n], apex});
  }

  std::vector<int> ring(int c, int arm, const Arm& a, double u, int M) {
    std::vector<int> ids(M);
    Vec2 mer = a.mer(u);
    double d = a.dist(u);
    for (int j = 0; j < M; ++j) ids[j] = add_arm_vertex(c, arm, d, mer, j, M);
    return ids;
  }

  // March an arm from its junction ring in direction dir of u. Ring sizes halve or
  // double to follow the sizing field. With an apex the arm closes with a fan once the
  // ring cannot be coarsened further and its radius is below the local edge length;
  // otherwise it stops after leaving B_reach.
  void march(int c, int arm, const Arm& a, std::vector<int> prev, double u, int dir, const Vec2* apex, double reach) {
    int M = static_cast<int>(prev.size());
    for (int guard = 0; guard < 100000; ++guard) {
      Vec2 here = a.mer(u);
      double edge = a.factor(u) * 2 * kPi / M;
      double target = sizing(here);
      int next_m = M;
      if (edge < 0.7 * target) {
        if ((M / 2) % arcs_ == 0) {
          next_m = M / 2;
        } else if (apex && a.factor(u) <= target) {
          fan(prev, add(*apex, 0, 1));
          return;
        }
      } else if (edge > 1.4 * target) {
        next_m = 2 * M;
      }
      u += dir * 2 * kPi / std::max(M, next_m);
      auto next = ring(c, arm, a, u, next_m);
      strip(prev, next);
      prev = std::move(next);
      M = next_m;
      if (!apex && a.mer(u).norm() > reach) return;
    }
    throw Error(ErrorKind::SeedGeometry, "seed: arm did not terminate");
  }

  // Band of K (even) intervals in u between two junction rings; rings nearer u = mid
  // play the role of A so that the band is symmetric about its middle.
  void band(int c_lo, int arm_lo, int c_hi, int arm_hi, const Arm& a, const std::vector<int>& lo,
            const std::vector<int>& hi, double u_lo, double u_hi, int K) {
    const int M = static_cast<int>(lo.size());
    std::vector<std::vector<int>> rings(K + 1);
    rings[0] = lo;
    rings[K] = hi;
    for (int i = 1; i < K; ++i) {
      double u = u_lo + (u_hi - u_lo) * i / K;
      bool low_side = 2 * i < K;
      rings[i] = ring(low_side ? c_lo : c_hi, low_side ? arm_lo : arm_hi, a, u, M);
    }
    for (int i = 0; i < K; ++i) {
      if (2 * (i + 1) <= K) strip(rings[i + 1], rings[i]);
      else strip(rings[i], rings[i + 1]);
    }
  }

private:
  int arcs_;
  double w_;
  double unit_edge_;
  double scale_;
  double grade_r_;
  double clip_ = 1e300;
};

void finish_seed(TriMesh& m, double R, const char* what) {
  update_boundary_flags(m);
  if (!orient_consistently(m)) throw Error(ErrorKind::SeedGeometry, std::string(what) + ": surface is not orientable");
  // upward normal on the outermost triangle
  int far = 0;
  double best = -1;
  for (int t = 0; t < m.num_triangles(); ++t) {
    double r = m.vertices[m.triangles[t][0]].norm();
    if (r > best) {
      best = r;
      far = t;
    }
  }
  const Tri& t = m.triangles[far];
  Vec3 n = (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]);
  Vec3 x = m.vertices[t[0]];
  // one end: outer plane, normal should point +z; two ends: cylinder, normal outward
  bool flip = std::abs(n.z()) > std::hypot(n.x(), n.y()) ? n.z() < 0 : n.dot(Vec3(x.x(), x.y(), 0)) < 0;
  if (flip) {
    for (Tri& tri : m.triangles) std::swap(tri[1], tri[2]);
  }
  m = clip_to_ball(m, R);
  auto report = validate(m);
  if (!report.valid()) throw Error(ErrorKind::SeedGeometry, std::string(what) + ": invalid mesh (" + report.summary() + ")");
}

} // namespace

const char* to_string(SeedFamily f) { return f == SeedFamily::OneEnd ? "one_end" : "two_end"; }

SeedFamily parse_family(const std::string& s) {
  if (s == "one_end") return SeedFamily::OneEnd;
  if (s == "two_end") return SeedFamily::TwoEnd;
  throw Error(ErrorKind::InvalidInput, "unknown seed family '" + s + "'");
}

void check_seed_spec(const SeedSpec& spec) {
  auto bad = [](const std::string& why) { throw Error(ErrorKind::InvalidInput, "seed spec: " + why); };
  if (!(spec.R > 0) || !std::isfinite(spec.R)) bad("clip radius must be positive");
  if (!(spec.fillet > 0) || !(spec.fillet < std::min(0.5, spec.R / 10))) bad("fillet must lie in (0, min(0.5, R/10))");
  if (!(spec.target_edge > 0) || !(spec.target_edge < spec.fillet)) bad("target_edge must lie in (0, fillet)");
  if (spec.grade_radius < 0) bad("grade_radius must be nonnegative");
  if (spec.family == SeedFamily::OneEnd) {
    if (spec.g_or_n < 1) bad("genus must be at least 1");
    if (!(spec.t > 0 && spec.t < 1)) bad("t must lie in (0, 1)");
  } else {
    if (spec.g_or_n < 3) bad("two-end seeds need n >= 3");
    if (spec.R <= 2.0) bad("two-end seeds need R > 2");
  }
}

SymmetryGroup seed_group(const SeedSpec& spec) {
  if (spec.family == SeedFamily::OneEnd) return dihedral_group(spec.g_or_n + 1);
  return spec.prismatic ? cyclic_group(spec.g_or_n) : dihedral_group(spec.g_or_n);
}

TriMesh seed_one_end(const SeedSpec& spec) {
  check_seed_spec(spec);
  if (spec.family != SeedFamily::OneEnd) throw Error(ErrorKind::InvalidInput, "seed_one_end: wrong family");
  const int N = spec.g_or_n + 1;
  const int arcs = 2 * N;
  const double s = spec.scale();
  const double h = spec.target_edge / s;
  const double w = std::min({spec.fillet / (1.25 * s), kPi / 24, 0.35 * kPi / N});
  const double h_circle = seed_sizing(s, spec.target_edge, spec.grade_radius, spec.R) / s;
  const int M0 = arcs * ring_multiplier(arcs, std::max(2 * kPi / h_circle, 48.0 / arcs));

  Builder b(arcs, w, h, s, spec.grade_radius);
  b.set_clip(spec.R);
  Crossing cr;
  cr.X = Vec2(1, 0);
  cr.e = {Vec2(-1, 0), Vec2(1, 0), Vec2(0, 1), Vec2(0, -1)};  // inner, outer, upper, lower
  cr.type_one_on_even = true;
  b.circles.push_back(cr);

  Arm plane{[](double u) { return Vec2(std::exp(u), 0); }, [](double u) { return std::abs(1 - std::exp(u)); },
            [](double u) { return std::exp(u); }};
  auto gd = [](double mu) { return std::atan(std::sinh(mu)); };
  Arm upper{[gd](double u) { return Vec2(std::cos(gd(u)), std::sin(gd(u))); }, [gd](double u) { return std::abs(gd(u)); },
            [gd](double u) { return std::cos(gd(u)); }};
  Arm lower{[gd](double u) { return Vec2(std::cos(gd(u)), -std::sin(gd(u))); }, [gd](double u) { return std::abs(gd(u)); },
            [gd](double u) { return std::cos(gd(u)); }};

  auto view = b.junction(0, M0);
  const Vec2 origin(0, 0), north(0, 1), south(0, -1);
  b.march(0, 0, plane, view[0], 0.0, -1, &origin, 0);
  const double reach = spec.R / (s * std::cos(kPi / M0)) * 1.02 + 2 * kPi / M0;
  b.march(0, 1, plane, view[1], 0.0, +1, nullptr, reach);
  b.march(0, 2, upper, view[2], 0.0, +1, &north, 0);
  b.march(0, 3, lower, view[3], 0.0, +1, &south, 0);

  TriMesh m = std::move(b.mesh);
  for (Vec3& p : m.vertices) p *= s;
  finish_seed(m, spec.R, "seed_one_end");
  return m;
}

TriMesh seed_two_end(const SeedSpec& spec) {
  check_seed_spec(spec);
  if (spec.family != SeedFamily::TwoEnd) throw Error(ErrorKind::InvalidInput, "seed_two_end: wrong family");
  const int n = spec.g_or_n;
  const int arcs = 2 * n;
  const double a = std::sqrt(2.0);  // cylinder radius, also |z| of the circles
  const double rs = 2.0;            // sphere radius
  const double h = spec.target_edge;
  const double w = std::min({spec.fillet / 1.25, 0.35 * kPi * a / n, 0.2});
  const int M0 = arcs * ring_multiplier(arcs, 2 * kPi * a / seed_sizing(2.0, h, spec.grade_radius, spec.R));

  Builder b(arcs, w, h, 1.0, spec.grade_radius);
  b.set_clip(spec.R);
  const double r2 = 1 / std::sqrt(2.0);
  Crossing up, dn;
  up.X = Vec2(a, a);
  up.e = {Vec2(0, 1), Vec2(0, -1), Vec2(-r2, r2), Vec2(r2, -r2)};  // outer cyl, mid cyl, cap, band
  up.type_one_on_even = true;
  dn.X = Vec2(a, -a);
  dn.e = {Vec2(0, -1), Vec2(0, 1), Vec2(-r2, -r2), Vec2(r2, r2)};
  dn.type_one_on_even = spec.prismatic;
  b.circles = {up, dn};

  auto gd = [](double mu) { return std::atan(std::sinh(mu)); };
  const double q0 = kPi / 4;
  const double mu0 = std::atanh(std::sin(q0));
  Arm cyl_up{[a](double u) { return Vec2(a, a * u); }, [a](double u) { return std::abs(a * u - a); },
             [a](double) { return a; }};
  Arm cyl_dn{[a](double u) { return Vec2(a, -a * u); }, [a](double u) { return std::abs(a * u - a); },
             [a](double) { return a; }};
  Arm cap_up{[=](double u) { return Vec2(rs * std::cos(gd(u)), rs * std::sin(gd(u))); },
             [=](double u) { return rs * std::abs(gd(u) - q0); }, [=](double u) { return rs * std::cos(gd(u)); }};
  Arm cap_dn{[=](double u) { return Vec2(rs * std::cos(gd(u)), -rs * std::sin(gd(u))); },
             [=](double u) { return rs * std::abs(gd(u) - q0); }, [=](double u) { return rs * std::cos(gd(u)); }};
  // bands run from the lower circle (u_lo) to the upper one (u_hi); distance to the nearer circle
  Arm cyl_mid{[a](double u) { return Vec2(a, a * u); }, [a](double u) { return a * (1 - std::abs(u)); },
              [a](double) { return a; }};
  Arm sph_band{[=](double u) { return Vec2(rs * std::cos(gd(u)), rs * std::sin(gd(u))); },
               [=](double u) { return rs * (q0 - std::abs(gd(u))); }, [=](double u) { return rs * std::cos(gd(u)); }};

  auto vu = b.junction(0, M0);
  auto vd = b.junction(1, M0);
  const double reach = spec.R * 1.02 + a * 2 * kPi / M0;
  const Vec2 north(0, rs), south(0, -rs);
  b.march(0, 0, cyl_up, vu[0], 1.0, +1, nullptr, reach);
  b.march(1, 0, cyl_dn, vd[0], 1.0, +1, nullptr, reach);
  b.march(0, 2, cap_up, vu[2], mu0, +1, &north, 0);
  b.march(1, 2, cap_dn, vd[2], mu0, +1, &south, 0);
  const double du = 2 * kPi / M0;
  int Kc = std::max(2, 2 * static_cast<int>(std::lround(1.0 / du)));
  int Ks = std::max(2, 2 * static_cast<int>(std::lround(mu0 / du)));
  b.band(1, 1, 0, 1, cyl_mid, vd[1], vu[1], -1.0, 1.0, Kc);
  b.band(1, 3, 0, 3, sph_band, vd[3], vu[3], -mu0, mu0, Ks);

  TriMesh m = std::move(b.mesh);
  finish_seed(m, spec.R, "seed_two_end");
  return m;
}

TriMesh make_seed(const SeedSpec& spec) {
  return spec.family == SeedFamily::OneEnd ? seed_one_end(spec) : seed_two_end(spec);
}

std::vector<SweepSample> sweepout_family(int g, const std::vector<double>& t_samples, const SeedSpec& defaults,
                                         bool keep_meshes) {
  std::vector<SweepSample> out;
  out.reserve(t_samples.size());
  double prev = 0.0;
  for (double t : t_samples) {
    if (!(t > prev && t < 1)) throw Error(ErrorKind::InvalidInput, "sweepout_family: samples must increase within (0, 1)");
    prev = t;
    SeedSpec spec = defaults;
    spec.family = SeedFamily::OneEnd;
    spec.g_or_n = g;
    spec.t = t;
    TriMesh m = seed_one_end(spec);
    double area = discrete_gauss_area(m).total;
    out.push_back({t, area, keep_meshes ? std::move(m) : TriMesh{}});
  }
  return out;
}

} // namespace shrinker
