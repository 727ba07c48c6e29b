#include "shrinker/report.hpp"

#include "shrinker/mesh_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace shrinker {

namespace {

template <class T>
void take(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const char* what) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, std::string(what) + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw Error(ErrorKind::InvalidInput, std::string(what) + ": unknown field '" + it.key() + "'");
  }
}

} // namespace

void to_json(Json& j, const SeedSpec& s) {
  j = Json{{"family", to_string(s.family)},
           {s.family == SeedFamily::OneEnd ? "g" : "n", s.g_or_n},
           {"t", s.t},
           {"fillet", s.fillet},
           {"target_edge", s.target_edge},
           {"R", s.R},
           {"grade_radius", s.grade_radius},
           {"prismatic", s.prismatic}};
}

void from_json(const Json& j, SeedSpec& s) {
  reject_unknown(j, {"family", "g", "n", "t", "fillet", "target_edge", "R", "grade_radius", "prismatic"}, "seed spec");
  if (j.contains("family")) s.family = parse_family(j.at("family").get<std::string>());
  take(j, "g", s.g_or_n);
  take(j, "n", s.g_or_n);
  take(j, "t", s.t);
  take(j, "fillet", s.fillet);
  take(j, "target_edge", s.target_edge);
  take(j, "R", s.R);
  take(j, "grade_radius", s.grade_radius);
  take(j, "prismatic", s.prismatic);
}

void to_json(Json& j, const EvolveConfig& c) {
  j = Json{{"R", c.R},
           {"descent_tol", c.descent_tol},
           {"refine_tol", c.refine_tol},
           {"armijo_c", c.armijo_c},
           {"step_init", c.step_init},
           {"max_iters_A", c.max_iters_A},
           {"max_iters_B", c.max_iters_B},
           {"remesh_every", c.remesh_every},
           {"symmetrize_every", c.symmetrize_every},
           {"lm_damping_init", c.lm_damping_init},
           {"target_edge", c.target_edge},
           {"grade_radius", c.grade_radius},
           {"smoothing_length", c.smoothing_length},
           {"project_dilation", c.project_dilation}};
}

void from_json(const Json& j, EvolveConfig& c) {
  reject_unknown(j,
                 {"R", "descent_tol", "refine_tol", "armijo_c", "step_init", "max_iters_A", "max_iters_B",
                  "remesh_every", "symmetrize_every", "lm_damping_init", "target_edge", "grade_radius",
                  "smoothing_length", "project_dilation"},
                 "config");
  try {
    take(j, "R", c.R);
    take(j, "descent_tol", c.descent_tol);
    take(j, "refine_tol", c.refine_tol);
    take(j, "armijo_c", c.armijo_c);
    take(j, "step_init", c.step_init);
    take(j, "max_iters_A", c.max_iters_A);
    take(j, "max_iters_B", c.max_iters_B);
    take(j, "remesh_every", c.remesh_every);
    take(j, "symmetrize_every", c.symmetrize_every);
    take(j, "lm_damping_init", c.lm_damping_init);
    take(j, "target_edge", c.target_edge);
    take(j, "grade_radius", c.grade_radius);
    take(j, "smoothing_length", c.smoothing_length);
    take(j, "project_dilation", c.project_dilation);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("config: ") + e.what());
  }
}

void to_json(Json& j, const TraceRecord& r) {
  j = Json{{"phase", std::string(1, r.phase)}, {"iteration", r.iteration}, {"F", r.F},
           {"residual_rms", r.residual_rms},  {"max_move", r.max_move},   {"step", r.step},
           {"remeshed", r.remeshed},          {"symmetrized", r.symmetrized}, {"rescaled", r.rescaled}};
}

void to_json(Json& j, const EvolveTrace& t) {
  j = Json{{"converged", t.converged}, {"stop_reason", t.stop_reason}, {"records", t.records}};
}

void to_json(Json& j, const TraceSummary& s) {
  j = Json{{"iterations_A", s.iterations_A},
           {"iterations_B", s.iterations_B},
           {"remesh_events", s.remesh_events},
           {"symmetrize_events", s.symmetrize_events},
           {"rescale_events", s.rescale_events},
           {"restarts", s.restarts},
           {"F_initial", s.F_initial},
           {"F_final", s.F_final}};
}

void to_json(Json& j, const AngleStats& a) {
  j = Json{{"samples", a.samples}, {"mean_deg", a.mean_deg}, {"max_deg", a.max_deg}};
}

void to_json(Json& j, const VerticalAxisReport& v) {
  j = Json{{"off_origin", v.off_origin}, {"total", v.total}, {"closed_up", v.closed_up}, {"max_tilt_deg", v.max_tilt_deg}};
}

void to_json(Json& j, const KnownShrinkerCheck& c) {
  j = Json{{"name", c.name},
           {"F", c.F},
           {"F_expected", c.F_expected},
           {"F_rel_error", c.F_rel_error},
           {"residual_rms", c.residual_rms},
           {"residual_tol", c.residual_tol},
           {"pass", c.pass}};
}

void to_json(Json& j, const VerifyReport& r) {
  j = Json{{"pass", r.pass}, {"seconds", r.seconds}, {"checks", r.checks}};
}

void to_json(Json& j, const WidthScan& w) {
  j = Json{{"g", w.g},
           {"samples", w.t.size()},
           {"max_F", w.max_F},
           {"argmax_t", w.argmax_t},
           {"first_area", w.first_area},
           {"last_area", w.last_area},
           {"t", w.t},
           {"F", w.F}};
}

Json report_json(const RunReport& r, bool include_trace) {
  Json j{{"status", r.status},
         {"stage", r.stage},
         {"stop_reason", r.stop_reason},
         {"spec", r.spec},
         {"config", r.config},
         // F of a critical point stands in for the min-max width (multiplicity one).
         {"F", r.F},
         {"residual_rms", r.residual_rms},
         {"shrinker_residual_rms", r.shrinker_residual_rms},
         {"genus", r.genus},
         {"boundary_loops", r.boundary_loops},
         {"components", r.components},
         {"end_count", r.end_count},
         {"group", r.group},
         {"equivariance_defect", r.equivariance_defect},
         {"boundary_angle_stats", r.boundary_angle},
         {"dist_to_plane_sphere", r.dist_to_plane_sphere},
         {"tube_radius", r.tube_radius},
         {"axis_hits", r.axis_hits},
         {"vertical_axis", r.vertical_axis},
         {"horizontal_axes_contained", r.horizontal_axes_contained},
         {"vertices", r.vertices},
         {"triangles", r.triangles},
         {"wall_time", r.wall_time},
         {"trace_summary", r.trace_summary},
         {"checkpoint_path", r.checkpoint_path}};
  if (include_trace) j["trace"] = r.trace;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

EvolveConfig load_config(const std::string& path, EvolveConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
  from_json(j, base);
  check_config(base);
  return base;
}

void write_json(const std::string& path, const Json& j) { write_file_atomic(path, dump(j)); }

void write_checkpoint(const std::string& dir, const std::string& stem, const TriMesh& mesh,
                      const EvolveTrace& trace) {
  const std::filesystem::path base = std::filesystem::path(dir) / stem;
  write_obj(mesh, base.string() + ".obj");
  write_json(base.string() + ".trace.json", Json(trace));
}

} // namespace shrinker
