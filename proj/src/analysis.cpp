#include "shrinker/analysis.hpp"

#include "shrinker/gaussmetric.hpp"
#include "shrinker/mesh_io.hpp"
#include "shrinker/primitives.hpp"
#include "shrinker/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>

namespace shrinker {

namespace {

constexpr double kDeg = 180.0 / 3.14159265358979323846;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int count_ends(const TriMesh& mesh, double R) {
  if (!(R > 0)) throw Error(ErrorKind::InvalidInput, "count_ends: radius must be positive");
  TriMesh m = mesh;
  update_boundary_flags(m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary(v) && std::abs(m.vertices[v].norm() - R) > 1e-6 * R) {
      throw Error(ErrorKind::NotClipped, "count_ends: boundary vertex " + std::to_string(v) + " is off the sphere");
    }
  }
  return topology(m).boundary_loops;
}

double distance_to_plane_sphere(const TriMesh& mesh, double tube_radius) {
  double worst = 0.0;
  for (const Vec3& x : mesh.vertices) {
    double rho = std::hypot(x.x(), x.y());
    if (std::hypot(rho - 2.0, x.z()) <= tube_radius) continue;
    worst = std::max(worst, std::min(std::abs(x.z()), std::abs(x.norm() - 2.0)));
  }
  return worst;
}

WidthScan width_scan(int g, int samples, const SeedSpec& defaults) {
  if (samples < 3) throw Error(ErrorKind::InvalidInput, "width_scan: need at least 3 samples");
  WidthScan out;
  out.g = g;
  for (int i = 1; i <= samples; ++i) out.t.push_back(static_cast<double>(i) / (samples + 1));
  for (const SweepSample& s : sweepout_family(g, out.t, defaults)) out.F.push_back(s.area);
  auto it = std::max_element(out.F.begin(), out.F.end());
  out.max_F = *it;
  out.argmax_t = out.t[it - out.F.begin()];
  out.first_area = out.F.front();
  out.last_area = out.F.back();
  return out;
}

VerifyReport verify_known_shrinkers() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyReport rep;
  auto add = [&](std::string name, const TriMesh& m, double expected, double rtol, double ftol) {
    KnownShrinkerCheck c;
    c.name = std::move(name);
    c.F = discrete_gauss_area(m).total;
    c.F_expected = expected;
    c.F_rel_error = std::abs(c.F - expected) / expected;
    c.residual_rms = shrinker_residual(m).rms_weighted;
    c.residual_tol = rtol;
    c.pass = c.residual_rms < rtol && (ftol <= 0 || c.F_rel_error < ftol);
    rep.checks.push_back(c);
  };
  const double R = 8.0;
  add("plane", clipped_disc(R, 0.1), disc_gauss_area(R), 1e-6, 0.002);
  add("sphere", icosphere(2.0, 4), sphere_gauss_area(2.0), 1e-3, 0.002);
  add("cylinder", clipped_cylinder(std::sqrt(2.0), R, 128), clipped_cylinder_gauss_area(std::sqrt(2.0), R), 1e-3, 0.0);
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const KnownShrinkerCheck& c) { return c.pass; });
  rep.seconds = seconds_since(t0);
  return rep;
}

AngleStats boundary_angle_stats(const TriMesh& mesh, double R) {
  (void)R;
  AngleStats st;
  std::map<std::pair<int, int>, int> count;
  for (const Tri& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  double sum = 0.0;
  for (const Tri& t : mesh.triangles) {
    const Vec3 n = triangle_normal(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (count[{std::min(a, b), std::max(a, b)}] != 1) continue;
      Vec3 mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
      if (mid.norm() == 0) continue;
      double d = std::asin(std::min(1.0, std::abs(n.dot(mid.normalized())))) * kDeg;
      sum += d;
      st.max_deg = std::max(st.max_deg, d);
      ++st.samples;
    }
  }
  if (st.samples > 0) st.mean_deg = sum / st.samples;
  return st;
}

VerticalAxisReport vertical_axis_report(const TriMesh& mesh, double R) {
  VerticalAxisReport rep;
  const Vec3 e3(0, 0, 1);
  const double tol = 1e-3;
  auto hits = axis_hits(mesh, e3, tol);
  rep.total = static_cast<int>(hits.size());
  for (const AxisHit& h : hits) {
    if (std::abs(h.s) > 1e-3 * R) ++rep.off_origin;
    rep.max_tilt_deg = std::max(rep.max_tilt_deg, std::acos(std::min(1.0, h.cos_angle)) * kDeg);
  }
  rep.closed_up = closed_up_axis_count(mesh, e3, tol);
  return rep;
}

bool contains_horizontal_axes(const TriMesh& mesh, int n, double R, double tol) {
  for (int l = 1; l <= n; ++l) {
    const Vec3 axis = horizontal_axis(l, n);
    bool plus = false, minus = false;
    for (const Vec3& x : mesh.vertices) {
      double s = x.dot(axis);
      if ((x - s * axis).norm() > tol) continue;
      if (s > 0.5 * R) plus = true;
      if (s < -0.5 * R) minus = true;
    }
    if (!plus || !minus) return false;
  }
  return true;
}

TraceSummary summarize(const EvolveTrace& trace) {
  TraceSummary s;
  for (const TraceRecord& r : trace.records) {
    (r.phase == 'A' ? s.iterations_A : s.iterations_B) += 1;
    s.remesh_events += r.remeshed;
    s.symmetrize_events += r.symmetrized;
    s.rescale_events += r.rescaled;
  }
  if (!trace.records.empty()) {
    s.F_initial = trace.records.front().F;
    s.F_final = trace.records.back().F;
  }
  return s;
}

RunReport analyze_mesh(const TriMesh& mesh, const SymmetryGroup& group, double R, double tube_radius) {
  RunReport rep;
  rep.status = "analyzed";
  rep.stage = "analyze";
  TriMesh m = mesh;
  update_boundary_flags(m);
  const TopologyReport topo = topology(m);
  rep.F = discrete_gauss_area(m).total;
  rep.residual_rms = variational_residual(m).rms_weighted;
  rep.shrinker_residual_rms = shrinker_residual(m).rms_weighted;
  rep.genus = topo.genus;
  rep.boundary_loops = topo.boundary_loops;
  rep.components = topo.components;
  rep.end_count = topo.boundary_loops > 0 ? count_ends(m, R) : 0;
  rep.group = group.name();
  rep.equivariance_defect = group.order() > 1 ? equivariance_defect(m, group) : 0.0;
  rep.boundary_angle = boundary_angle_stats(m, R);
  rep.tube_radius = tube_radius;
  rep.dist_to_plane_sphere = distance_to_plane_sphere(m, tube_radius);
  rep.vertical_axis = vertical_axis_report(m, R);
  rep.axis_hits = rep.vertical_axis.off_origin;
  rep.horizontal_axes_contained =
      group.kind == GroupKind::Dihedral && contains_horizontal_axes(m, group.n, R, 1e-6 * R);
  rep.vertices = m.num_vertices();
  rep.triangles = m.num_triangles();
  return rep;
}

SeedSpec pipeline_seed_defaults(SeedFamily family, int g_or_n) {
  SeedSpec s;
  s.family = family;
  s.g_or_n = g_or_n;
  s.target_edge = 0.12;
  return s;
}

EvolveConfig pipeline_config_defaults() {
  EvolveConfig c;
  c.project_dilation = true;
  return c;
}

namespace {

// Appends `part` to `all`, renumbering iterations so they keep increasing.
void append_trace(EvolveTrace& all, const EvolveTrace& part) {
  int base = all.records.empty() ? 0 : all.records.back().iteration + 1;
  for (TraceRecord r : part.records) {
    r.iteration += base;
    all.records.push_back(r);
  }
  all.stop_reason = part.stop_reason;
  all.converged = part.converged;
}

std::string stem_for(const SeedSpec& spec) {
  return std::string(to_string(spec.family)) + (spec.family == SeedFamily::OneEnd ? "_g" : "_n") +
         std::to_string(spec.g_or_n);
}

} // namespace

RunReport run_pipeline(const SeedSpec& spec, const EvolveConfig& config, const PipelineOptions& options,
                       TriMesh* final_mesh) {
  const auto t0 = std::chrono::steady_clock::now();
  check_seed_spec(spec);
  check_config(config);
  const SymmetryGroup group = seed_group(spec);
  const std::string stem = stem_for(spec);
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);

  EvolveTrace trace;
  std::string stage = "seed";
  int restarts = 0;

  EvolveHooks hooks;
  hooks.checkpoint_every = options.checkpoint_dir.empty() ? 0 : options.checkpoint_every;
  if (hooks.checkpoint_every > 0) {
    hooks.checkpoint = [&](const TriMesh& m, const EvolveTrace& tr) {
      EvolveTrace combined = trace;
      append_trace(combined, tr);
      write_checkpoint(options.checkpoint_dir, stem + "_" + stage, m, combined);
    };
  }

  auto fill = [&](RunReport& rep) {
    rep.spec = spec;
    rep.config = config;
    rep.stage = stage;
    rep.trace = trace;
    rep.stop_reason = trace.stop_reason;
    rep.trace_summary = summarize(trace);
    rep.trace_summary.restarts = restarts;
    rep.wall_time = seconds_since(t0);
  };

  auto fail = [&](const SolverError& e) -> PipelineError {
    append_trace(trace, e.trace());
    trace.stop_reason = e.what();
    trace.converged = false;
    RunReport rep;
    try {
      rep = analyze_mesh(e.last_mesh(), group, config.R);
    } catch (const Error&) {
      rep = RunReport{};
    }
    fill(rep);
    rep.status = "stalled";
    if (!options.checkpoint_dir.empty()) {
      rep.checkpoint_path = (std::filesystem::path(options.checkpoint_dir) / (stem + "_" + stage + "_last.obj")).string();
      write_obj(e.last_mesh(), rep.checkpoint_path);
    }
    return PipelineError(e.kind(), stage + ": " + e.what(), rep);
  };

  auto fail_plain = [&](const Error& e) -> PipelineError {
    RunReport rep;
    fill(rep);
    rep.status = "failed";
    return PipelineError(e.kind(), stage + ": " + e.what(), rep);
  };

  TriMesh mesh = make_seed(spec);
  EvolveConfig cfg = config;
  if (cfg.target_edge <= 0) cfg.target_edge = spec.target_edge;
  for (;;) {
    stage = "descend";
    try {
      EvolveResult a = descend(mesh, group, cfg, hooks);
      append_trace(trace, a.trace);
      mesh = std::move(a.mesh);
    } catch (const SolverError& e) {
      // A line search that runs out late in a restart still leaves a usable iterate.
      if (restarts == 0 || e.kind() != ErrorKind::SolverStall) throw fail(e);
      append_trace(trace, e.trace());
      mesh = e.last_mesh();
    } catch (const Error& e) {
      throw fail_plain(e);
    }
    stage = "refine";
    try {
      EvolveResult b = refine_critical(mesh, group, cfg, hooks);
      append_trace(trace, b.trace);
      mesh = std::move(b.mesh);
      break;
    } catch (const SolverError& e) {
      if (e.kind() != ErrorKind::RefineStall || restarts >= options.max_restarts) throw fail(e);
      append_trace(trace, e.trace());
      ++restarts;
      cfg.descent_tol = std::max(cfg.descent_tol / 10, 1.5 * cfg.refine_tol);
    } catch (const Error& e) {
      throw fail_plain(e);
    }
  }

  stage = "analyze";
  RunReport rep = analyze_mesh(mesh, group, config.R);
  fill(rep);
  rep.status = trace.converged ? "converged" : "stalled";
  if (!options.checkpoint_dir.empty()) {
    rep.checkpoint_path = (std::filesystem::path(options.checkpoint_dir) / (stem + "_final.obj")).string();
    write_obj(mesh, rep.checkpoint_path);
  }
  if (final_mesh) *final_mesh = std::move(mesh);
  return rep;
}

} // namespace shrinker
