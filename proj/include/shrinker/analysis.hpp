#pragma once

#include "shrinker/evolver.hpp"
#include "shrinker/seeds.hpp"

#include <string>
#include <vector>

namespace shrinker {

// Boundary loops on the sphere |x| = R. Throws NotClipped when a boundary vertex is
// farther than 1e-6 R from it.
int count_ends(const TriMesh& mesh, double R);

// One-sided distance from the mesh to the union of the plane x3 = 0 and the sphere of
// radius 2, ignoring vertices within tube_radius of the circle where they meet.
double distance_to_plane_sphere(const TriMesh& mesh, double tube_radius);

struct WidthScan {
  int g = 0;
  std::vector<double> t;
  std::vector<double> F;
  double max_F = 0.0;
  double argmax_t = 0.0;
  double first_area = 0.0;  // t = 1 / (samples + 1)
  double last_area = 0.0;   // t = samples / (samples + 1)
};

// Gaussian areas of the sweepout slices on t_i = i / (samples + 1), i = 1..samples.
WidthScan width_scan(int g, int samples, const SeedSpec& defaults = {});

struct KnownShrinkerCheck {
  std::string name;
  double F = 0.0;
  double F_expected = 0.0;
  double F_rel_error = 0.0;
  double residual_rms = 0.0;
  double residual_tol = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<KnownShrinkerCheck> checks;
  double seconds = 0.0;
  bool pass = false;
};

// Clipped plane, radius-2 icosphere (level 4) and clipped cylinder of radius sqrt 2
// against their closed-form Gaussian areas, with the cotangent shrinker residual.
VerifyReport verify_known_shrinkers();

struct AngleStats {
  int samples = 0;
  double mean_deg = 0.0;  // deviation from 90 degrees
  double max_deg = 0.0;
};

// Contact angle with the sphere |x| = R along every boundary edge, read off the normal of
// the triangle on that edge against the radial direction at the edge midpoint.
AngleStats boundary_angle_stats(const TriMesh& mesh, double R);

struct VerticalAxisReport {
  int off_origin = 0;  // crossings with |x| above 1e-3 R
  int total = 0;
  int closed_up = 0;   // after capping every boundary loop with a disc
  double max_tilt_deg = 0.0;  // largest deviation from an orthogonal crossing
};

VerticalAxisReport vertical_axis_report(const TriMesh& mesh, double R);

// Every horizontal axis of D_n carries mesh vertices (within tol) on both sides beyond R / 2.
bool contains_horizontal_axes(const TriMesh& mesh, int n, double R, double tol);

struct TraceSummary {
  int iterations_A = 0;
  int iterations_B = 0;
  int remesh_events = 0;
  int symmetrize_events = 0;
  int rescale_events = 0;
  int restarts = 0;
  double F_initial = 0.0;
  double F_final = 0.0;
};

TraceSummary summarize(const EvolveTrace& trace);

struct RunReport {
  SeedSpec spec;
  EvolveConfig config;
  std::string status;  // "converged", "stalled" or "analyzed"
  std::string stage;   // last stage entered
  std::string stop_reason;
  double F = 0.0;
  double residual_rms = 0.0;           // variational, Gaussian-weighted
  double shrinker_residual_rms = 0.0;  // cotangent discretization, Gaussian-weighted
  int genus = 0;
  int boundary_loops = 0;
  int components = 0;
  int end_count = 0;
  std::string group;
  double equivariance_defect = 0.0;
  AngleStats boundary_angle;
  double dist_to_plane_sphere = 0.0;
  double tube_radius = 0.5;
  VerticalAxisReport vertical_axis;
  int axis_hits = 0;  // crossings of the vertical axis away from the origin
  bool horizontal_axes_contained = false;
  int vertices = 0;
  int triangles = 0;
  double wall_time = 0.0;
  TraceSummary trace_summary;
  EvolveTrace trace;
  std::string checkpoint_path;
};

// Analysis fields of a report for a mesh, given its symmetry group and clip radius.
RunReport analyze_mesh(const TriMesh& mesh, const SymmetryGroup& group, double R, double tube_radius = 0.5);

// Desk-scale defaults: edge 0.12 near the origin and the dilation-projected descent.
SeedSpec pipeline_seed_defaults(SeedFamily family, int g_or_n);
EvolveConfig pipeline_config_defaults();

struct PipelineOptions {
  int checkpoint_every = 0;
  std::string checkpoint_dir;  // empty: no checkpoint files
  // After a refinement stall, descent resumes with descent_tol / 10 up to this many times.
  int max_restarts = 2;
};

// Error of a pipeline stage with a report of the last iterate.
class PipelineError : public Error {
 public:
  PipelineError(ErrorKind kind, const std::string& what, RunReport report)
      : Error(kind, what), report_(std::move(report)) {}
  const RunReport& report() const { return report_; }

 private:
  RunReport report_;
};

// seed -> descend -> refine_critical -> analysis. Solver failures throw PipelineError
// carrying the stage label, the partial report and the checkpoint path of the last mesh.
RunReport run_pipeline(const SeedSpec& spec, const EvolveConfig& config, const PipelineOptions& options = {},
                       TriMesh* final_mesh = nullptr);

} // namespace shrinker
