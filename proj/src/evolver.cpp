#include "shrinker/evolver.hpp"
#include "shrinker/gaussmetric.hpp"
#include "shrinker/remesh.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace shrinker {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kInv4Pi = 0.25 / std::numbers::pi;

bool has_boundary(const TriMesh& m) {
  return std::any_of(m.boundary_flags.begin(), m.boundary_flags.end(), [](std::uint8_t b) { return b != 0; });
}

double median_inner_edge(const TriMesh& m, double radius) {
  std::vector<double> len;
  for (const EdgeInfo& e : build_edges(m)) {
    const Vec3& a = m.vertices[e.a];
    const Vec3& b = m.vertices[e.b];
    if (radius <= 0 || (0.5 * (a + b)).norm() <= radius) len.push_back((a - b).norm());
  }
  if (len.empty()) return mean_edge_length(m);
  std::nth_element(len.begin(), len.begin() + len.size() / 2, len.end());
  return len[len.size() / 2];
}

std::vector<Vec3> move_directions(const TriMesh& m, const std::vector<Vec3>& normals) {
  std::vector<Vec3> dir(normals);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary(v)) dir[v] = boundary_direction(m.vertices[v], normals[v]);
  }
  return dir;
}

void project_boundary_inplace(TriMesh& m, double R) {
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.is_boundary(v)) continue;
    double r = m.vertices[v].norm();
    if (r > 0) m.vertices[v] *= R / r;
  }
}

bool any_flipped(const TriMesh& before, const TriMesh& after) {
  for (const Tri& t : before.triangles) {
    Vec3 n0 = (before.vertices[t[1]] - before.vertices[t[0]]).cross(before.vertices[t[2]] - before.vertices[t[0]]);
    Vec3 n1 = (after.vertices[t[1]] - after.vertices[t[0]]).cross(after.vertices[t[2]] - after.vertices[t[0]]);
    if (!(n0.dot(n1) > 0.0)) return true;
  }
  return false;
}

// Gaussian-weighted metric for descent directions: mass scaled by (1 + |x|^2/4), which
// bounds the drift term of the linearised operator far out, plus tau times the
// cotangent stiffness (cotangents clamped below so the matrix stays positive definite).
SpMat sobolev_metric(const TriMesh& m, double tau) {
  std::vector<double> mass(m.vertices.size(), 0.0);
  for (const Tri& t : m.triangles) {
    double a = triangle_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) / 3.0;
    for (int v : t) mass[v] += a;
  }
  for (size_t v = 0; v < mass.size(); ++v) {
    double r2 = m.vertices[v].squaredNorm();
    mass[v] *= kInv4Pi * std::exp(-0.25 * r2) * (1.0 + 0.25 * r2);
  }
  std::vector<Triplet> trip;
  trip.reserve(m.triangles.size() * 12 + mass.size());
  for (const Tri& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
      const Vec3& p = m.vertices[t[k]];
      Vec3 e1 = m.vertices[i] - p, e2 = m.vertices[j] - p;
      double cr = e1.cross(e2).norm();
      double cot = cr > 0 ? e1.dot(e2) / cr : 0.0;
      Vec3 mid = 0.5 * (m.vertices[i] + m.vertices[j]);
      double c = 0.5 * std::max(cot, 0.05) * kInv4Pi * std::exp(-0.25 * mid.squaredNorm()) * tau;
      trip.emplace_back(i, i, c);
      trip.emplace_back(j, j, c);
      trip.emplace_back(i, j, -c);
      trip.emplace_back(j, i, -c);
    }
  }
  for (size_t v = 0; v < mass.size(); ++v) trip.emplace_back(static_cast<int>(v), static_cast<int>(v), mass[v]);
  SpMat P(static_cast<int>(mass.size()), static_cast<int>(mass.size()));
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

// Keeps |x| <= 0.6 R scaled by a and the boundary sphere fixed, blending in between.
// 1 inside 0.6 R, smoothly down to 0 at R. R = 0 means no cutoff.
double dilation_cutoff(double r, double R) {
  const double r0 = 0.6 * R;
  if (R <= 0 || r <= r0) return 1.0;
  double s = std::clamp((r - r0) / (R - r0), 0.0, 1.0);
  return 1.0 - s * s * (3 - 2 * s);
}

void radial_rescale(TriMesh& m, double a, double R) {
  for (Vec3& x : m.vertices) x *= 1.0 + (a - 1.0) * dilation_cutoff(x.norm(), R);
}

struct Orbits {
  OrbitStructure os;

  static Orbits of(const TriMesh& m, const SymmetryGroup& g) {
    Orbits o;
    if (g.order() > 1) {
      o.os = orbit_structure(m, g, default_match_tolerance(m));
    } else {
      const int n = m.num_vertices();
      o.os.orbit_of.resize(n);
      o.os.representatives.resize(n);
      o.os.stabilizer_size.assign(n, 1);
      o.os.image.assign(1, std::vector<int>(n));
      for (int v = 0; v < n; ++v) o.os.orbit_of[v] = o.os.representatives[v] = o.os.image[0][v] = v;
    }
    return o;
  }
};

void maybe_checkpoint(const EvolveHooks& hooks, int iteration, const TriMesh& m, const EvolveTrace& trace) {
  if (hooks.checkpoint && hooks.checkpoint_every > 0 && iteration > 0 && iteration % hooks.checkpoint_every == 0) {
    hooks.checkpoint(m, trace);
  }
}

void check_input(const TriMesh& mesh, const SymmetryGroup& group) {
  auto rep = validate(mesh);
  if (!rep.valid()) throw Error(ErrorKind::InvalidInput, "evolve: invalid mesh (" + rep.summary() + ")");
  if (group.order() > 1) {
    double defect = equivariance_defect(mesh, group);
    if (defect > default_match_tolerance(mesh)) {
      throw Error(ErrorKind::NotEquivariant, "evolve: mesh is not invariant under " + group.name());
    }
  }
}

} // namespace

void check_config(const EvolveConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidInput, "config: " + why); };
  if (!(c.R > 0)) fail("R must be positive");
  if (!(c.descent_tol > 0) || !(c.refine_tol > 0)) fail("tolerances must be positive");
  if (!(c.refine_tol < c.descent_tol)) fail("refine_tol must be smaller than descent_tol");
  if (!(c.armijo_c > 0 && c.armijo_c < 1)) fail("armijo_c must lie in (0,1)");
  if (!(c.step_init > 0)) fail("step_init must be positive");
  if (c.max_iters_A <= 0 || c.max_iters_B <= 0) fail("iteration limits must be positive");
  if (c.remesh_every <= 0 || c.symmetrize_every <= 0) fail("cadences must be positive");
  if (!(c.lm_damping_init > 0)) fail("lm_damping_init must be positive");
  if (c.target_edge < 0 || c.grade_radius < 0 || !(c.smoothing_length >= 0)) fail("sizes must be non-negative");
}

Vec3 boundary_direction(const Vec3& x, const Vec3& normal) {
  double r = x.norm();
  if (r == 0) return normal;
  Vec3 u = x / r;
  Vec3 d = normal - normal.dot(u) * u;
  double n = d.norm();
  return n > 1e-12 ? Vec3(d / n) : normal;
}

TriMesh project_free_boundary(const TriMesh& mesh, double R) {
  if (!(R > 0)) throw Error(ErrorKind::InvalidInput, "project_free_boundary: R must be positive");
  TriMesh m = mesh;
  if (m.boundary_flags.size() != m.vertices.size()) update_boundary_flags(m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.is_boundary(v)) continue;
    double r = m.vertices[v].norm();
    if (r == 0.0) throw Error(ErrorKind::ProjectionUndefined, "boundary vertex at the origin");
    if (std::abs(r - R) > 0.1 * R) {
      throw Error(ErrorKind::InvalidInput, "boundary vertex " + std::to_string(v) + " is not near the sphere |x| = R");
    }
    // Rescaling a vertex that is already on the sphere would only add rounding.
    if (std::abs(r - R) > 4 * std::numeric_limits<double>::epsilon() * R) m.vertices[v] *= R / r;
  }
  return m;
}

std::vector<double> free_boundary_residual(const TriMesh& mesh) {
  const auto grad = gauss_area_gradient(mesh);
  const auto mass = vertex_gauss_mass(mesh);
  const auto dir = move_directions(mesh, vertex_normals(mesh));
  std::vector<double> r(mesh.vertices.size(), 0.0);
  for (size_t v = 0; v < r.size(); ++v) r[v] = mass[v] > 0 ? grad[v].dot(dir[v]) / mass[v] : 0.0;
  return r;
}

EvolveResult descend(const TriMesh& mesh, const SymmetryGroup& group, const EvolveConfig& config,
                     const EvolveHooks& hooks) {
  check_config(config);
  check_input(mesh, group);
  TriMesh m = mesh;
  update_boundary_flags(m);
  const bool bnd = has_boundary(m);
  if (bnd) m = project_free_boundary(m, config.R);
  const TopologyReport topo0 = topology(m);
  const double target = config.target_edge > 0 ? config.target_edge : median_inner_edge(m, config.grade_radius);
  const double tau = config.smoothing_length * config.smoothing_length;

  RemeshOptions ropt;
  ropt.grade_radius = config.grade_radius;
  ropt.clip_radius = bnd ? config.R : 0.0;
  ropt.passes = 2;

  Orbits orb = Orbits::of(m, group);
  EvolveTrace trace;
  Eigen::SimplicialLDLT<SpMat> solver;
  int factored_at = -1000;
  double alpha_prev = 0.0;
  double last_move = 0.0;
  int last_rescale = -1000;
  TraceRecord pending;

  for (int it = 0;; ++it) {
    TraceRecord rec = pending;
    pending = TraceRecord{};
    rec.phase = 'A';
    rec.iteration = it;
    rec.max_move = last_move;
    rec.step = alpha_prev;

    const auto grad = gauss_area_gradient(m);
    const auto mass = vertex_gauss_mass(m);
    const auto normals = vertex_normals(m);
    const auto dir = move_directions(m, normals);
    const int n = m.num_vertices();
    Eigen::VectorXd g(n), c(n);
    for (int v = 0; v < n; ++v) {
      g[v] = grad[v].dot(dir[v]);
      c[v] = mass[v] * m.vertices[v].dot(dir[v]);
    }
    const double F = discrete_gauss_area(m).total;
    const ResidualField res = variational_residual(m);
    rec.F = F;
    rec.residual_rms = res.rms_weighted;
    trace.records.push_back(rec);
    maybe_checkpoint(hooks, it, m, trace);

    if (res.rms_weighted < config.descent_tol) {
      trace.converged = true;
      trace.stop_reason = "residual below descent_tol";
      break;
    }
    if (it >= config.max_iters_A) {
      trace.stop_reason = "max_iters_A reached";
      break;
    }
    // Pinching necks drive the residual up while F keeps falling.
    if (res.rms_weighted > 10 * trace.records.front().residual_rms) {
      throw SolverError(ErrorKind::SolverStall, "descent: residual diverged to ten times its initial value", trace, m);
    }

    if (config.project_dilation && it - last_rescale >= 5) {
      // Fit r = lambda <x, nu>. Scaling by sqrt(1 + 2 lambda) removes that component, so
      // the scale is tracked in small steps and lambda stays near zero.
      double num = 0, den = 0;
      for (int v = 0; v < n; ++v) {
        if (!res.present[v]) continue;
        double phi = m.vertices[v].dot(normals[v]);
        num += mass[v] * res.per_vertex[v] * phi;
        den += mass[v] * phi * phi;
      }
      double lambda = den > 0 ? num / den : 0.0;
      if (std::abs(lambda) > 1e-3 && 1 + 2 * lambda > 0) {
        double a = std::clamp(std::sqrt(1 + 2 * lambda), 0.95, 1.05);
        radial_rescale(m, a, bnd ? config.R : 0.0);
        last_rescale = it;
        pending.rescaled = true;
        factored_at = -1000;
        continue;
      }
    }

    if (it - factored_at >= 10) {
      solver.compute(sobolev_metric(m, tau));
      if (solver.info() != Eigen::Success) {
        throw SolverError(ErrorKind::SolverStall, "descent: preconditioner factorization failed", trace, m);
      }
      factored_at = it;
    }
    Eigen::VectorXd delta = -solver.solve(g);
    if (config.project_dilation) {
      Eigen::VectorXd y = solver.solve(c);
      double cy = c.dot(y);
      if (cy > 0) delta -= (c.dot(delta) / cy) * y;
    }
    const double slope = g.dot(delta);
    double dmax = delta.cwiseAbs().maxCoeff();
    if (!(slope < 0) || !(dmax > 0)) {
      trace.stop_reason = "no descent direction";
      break;
    }
    const double alpha_cap = 0.5 * target / dmax;
    double alpha = alpha_prev > 0 ? std::min(2 * alpha_prev, alpha_cap) : std::min(config.step_init / dmax, alpha_cap);
    bool accepted = false;
    TriMesh trial;
    for (int halvings = 0; halvings <= 60; ++halvings, alpha *= 0.5) {
      trial = m;
      for (int v = 0; v < n; ++v) trial.vertices[v] += alpha * delta[v] * dir[v];
      if (bnd) project_boundary_inplace(trial, config.R);
      if (any_flipped(m, trial)) continue;
      double Ft = discrete_gauss_area(trial).total;
      if (Ft < F && Ft <= F + config.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) throw SolverError(ErrorKind::SolverStall, "descent: line search failed after 60 halvings", trace, m);
    alpha_prev = alpha;
    last_move = alpha * dmax;
    m = std::move(trial);

    const int next = it + 1;
    if (next % config.remesh_every == 0) {
      TriMesh before = m;
      try {
        m = remesh(m, target, &group, ropt);
        if (bnd) project_boundary_inplace(m, config.R);
        if (!(topology(m) == topo0)) {
          throw SolverError(ErrorKind::TopologyDrift, "descent: remeshing changed the topology", trace, m);
        }
        orb = Orbits::of(m, group);
      } catch (const SolverError&) {
        throw;
      } catch (const Error& e) {
        const ErrorKind kind = e.kind() == ErrorKind::TopologyUndefined ? ErrorKind::TopologyDrift : ErrorKind::SolverStall;
        throw SolverError(kind, std::string("descent: remeshing failed: ") + e.what(), trace, std::move(before));
      }
      factored_at = -1000;
      pending.remeshed = true;
    }
    if (group.order() > 1 && next % config.symmetrize_every == 0) {
      symmetrize_positions(m.vertices, group, orb.os);
      if (bnd) project_boundary_inplace(m, config.R);
      pending.symmetrized = true;
    }
  }
  if (group.order() > 1) m.orbit_labels = Orbits::of(m, group).os.orbit_of;
  return {std::move(m), std::move(trace)};
}

EvolveResult refine_critical(const TriMesh& mesh, const SymmetryGroup& group, const EvolveConfig& config,
                             const EvolveHooks& hooks) {
  check_config(config);
  check_input(mesh, group);
  TriMesh m = mesh;
  update_boundary_flags(m);
  const bool bnd = has_boundary(m);
  if (bnd) m = project_free_boundary(m, config.R);
  const Orbits orb = Orbits::of(m, group);
  const OrbitStructure& os = orb.os;
  const int norb = os.num_orbits();
  const double h = median_inner_edge(m, config.grade_radius);
  const double eps = 1e-6 * h;

  // Orbit adjacency.
  std::vector<std::vector<int>> adj(norb);
  for (const EdgeInfo& e : build_edges(m)) {
    int a = os.orbit_of[e.a], b = os.orbit_of[e.b];
    if (a == b) continue;
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& l : adj) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }

  auto place = [&](TriMesh& x, int o, const Vec3& p) {
    int rep = os.representatives[o];
    Vec3 q = p;
    if (bnd && x.is_boundary(rep)) q *= config.R / q.norm();
    for (size_t g = 0; g < os.image.size(); ++g) x.vertices[os.image[g][rep]] = group.order() > 1 ? Vec3(group.elements[g] * q) : q;
  };

  EvolveTrace trace;
  double lambda = config.lm_damping_init;
  for (int it = 0;; ++it) {
    const auto mass = vertex_gauss_mass(m);
    const auto normals = vertex_normals(m);
    const auto dir = move_directions(m, normals);
    const ResidualField res = variational_residual(m);
    TraceRecord rec;
    rec.phase = 'B';
    rec.iteration = it;
    rec.F = discrete_gauss_area(m).total;
    rec.residual_rms = res.rms_weighted;
    rec.step = lambda;
    if (!trace.records.empty()) rec.max_move = trace.records.back().max_move;
    trace.records.push_back(rec);
    maybe_checkpoint(hooks, it, m, trace);
    if (res.rms_weighted < config.refine_tol) {
      trace.converged = true;
      trace.stop_reason = "residual below refine_tol";
      break;
    }
    if (it >= config.max_iters_B) {
      throw SolverError(ErrorKind::RefineStall, "refinement: max_iters_B reached", trace, m);
    }

    // Free orbits: those whose stabiliser keeps the move direction.
    std::vector<int> col(norb, -1), unknowns;
    for (int o = 0; o < norb; ++o) {
      int rep = os.representatives[o];
      bool free = true;
      for (size_t g = 0; g < os.image.size() && free; ++g) {
        if (os.image[g][rep] != rep || group.order() <= 1) continue;
        if ((group.elements[g] * dir[rep] - dir[rep]).norm() > 1e-6) free = false;
      }
      if (free) {
        col[o] = static_cast<int>(unknowns.size());
        unknowns.push_back(o);
      }
    }
    const int nu = static_cast<int>(unknowns.size());
    Eigen::VectorXd W(nu);
    for (int k = 0; k < nu; ++k) {
      int o = unknowns[k];
      int rep = os.representatives[o];
      W[k] = mass[rep] * static_cast<double>(os.image.size()) /
             os.stabilizer_size[o];
    }
    auto residual_vec = [&](const TriMesh& x) {
      auto r = free_boundary_residual(x);
      Eigen::VectorXd out(nu);
      for (int k = 0; k < nu; ++k) out[k] = r[os.representatives[unknowns[k]]];
      return out;
    };
    const Eigen::VectorXd r0 = residual_vec(m);
    const double cost0 = r0.dot(W.asDiagonal() * r0);

    // Distance-2 colouring of the free orbits so that perturbations in one colour do
    // not touch a common residual.
    std::vector<int> color(norb, -1);
    int ncolors = 0;
    std::vector<int> stamp;
    for (int o : unknowns) {
      stamp.assign(ncolors + 1, -1);
      auto block = [&](int p) {
        if (color[p] >= 0) stamp[color[p]] = o;
      };
      block(o);
      for (int p : adj[o]) {
        block(p);
        for (int q : adj[p]) block(q);
      }
      int cidx = 0;
      while (cidx < ncolors && stamp[cidx] == o) ++cidx;
      color[o] = cidx;
      ncolors = std::max(ncolors, cidx + 1);
    }
    std::vector<std::vector<int>> by_color(ncolors);
    for (int o : unknowns) by_color[color[o]].push_back(o);

    std::vector<Triplet> jt;
    auto full0 = free_boundary_residual(m);
    for (const auto& group_o : by_color) {
      TriMesh x = m;
      for (int o : group_o) {
        int rep = os.representatives[o];
        place(x, o, m.vertices[rep] + eps * dir[rep]);
      }
      auto rp = free_boundary_residual(x);
      for (int o : group_o) {
        auto add = [&](int p) {
          if (col[p] < 0) return;
          int rep = os.representatives[p];
          double d = (rp[rep] - full0[rep]) / eps;
          if (d != 0.0) jt.emplace_back(col[p], col[o], d);
        };
        add(o);
        for (int p : adj[o]) add(p);
      }
    }
    SpMat J(nu, nu);
    J.setFromTriplets(jt.begin(), jt.end());
    SpMat JtW = J.transpose() * W.asDiagonal();
    SpMat A = JtW * J;
    Eigen::VectorXd b = -(JtW * r0);
    // Symmetric Jacobi equilibration: the Gaussian weights span many orders of magnitude.
    Eigen::VectorXd S = A.diagonal();
    const double dfloor = 1e-300 + 1e-14 * S.maxCoeff();
    for (int k = 0; k < nu; ++k) S[k] = 1.0 / std::sqrt(std::max(S[k], dfloor));
    const SpMat As = S.asDiagonal() * A * S.asDiagonal();
    const Eigen::VectorXd bs = S.cwiseProduct(b);

    bool accepted = false;
    while (!accepted) {
      SpMat Ad = As;
      for (int k = 0; k < nu; ++k) Ad.coeffRef(k, k) += lambda;
      Eigen::SimplicialLDLT<SpMat> ldlt(Ad);
      Eigen::VectorXd delta;
      bool solved = ldlt.info() == Eigen::Success;
      if (solved) {
        delta = S.cwiseProduct(ldlt.solve(bs));
        solved = delta.allFinite();
      }
      if (solved) {
        TriMesh x = m;
        double move = 0;
        for (int k = 0; k < nu; ++k) {
          int o = unknowns[k];
          int rep = os.representatives[o];
          place(x, o, m.vertices[rep] + delta[k] * dir[rep]);
          move = std::max(move, std::abs(delta[k]));
        }
        if (!any_flipped(m, x)) {
          Eigen::VectorXd r1 = residual_vec(x);
          double cost1 = r1.dot(W.asDiagonal() * r1);
          if (std::isfinite(cost1) && cost1 < cost0) {
            m = std::move(x);
            lambda = std::max(lambda / 3.0, 1e-15);
            trace.records.back().max_move = move;
            accepted = true;
            break;
          }
        }
      }
      lambda *= 4.0;
      if (lambda > 1e6 * config.lm_damping_init) {
        throw SolverError(ErrorKind::RefineStall, "refinement: damping exceeded 1e6 * lm_damping_init", trace, m);
      }
    }
  }
  if (group.order() > 1) m.orbit_labels = os.orbit_of;
  return {std::move(m), std::move(trace)};
}

} // namespace shrinker
