#pragma once

#include "shrinker/equivariance.hpp"
#include "shrinker/trimesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace shrinker {

struct EvolveConfig {
  double R = 8.0;
  double descent_tol = 1e-2;
  double refine_tol = 1e-4;
  double armijo_c = 1e-4;
  double step_init = 0.05;  // largest vertex move of a first trial step (length units)
  int max_iters_A = 3000;
  int max_iters_B = 60;
  int remesh_every = 25;
  int symmetrize_every = 5;
  double lm_damping_init = 1e-3;

  // Edge length near the origin used by remeshing; 0 takes the median edge inside grade_radius.
  double target_edge = 0.0;
  double grade_radius = 3.0;
  // Smoothing length of the Sobolev preconditioner of the descent direction.
  double smoothing_length = 0.3;
  // Remove the dilation mode <x, nu> from descent directions and track the scale separately:
  // every few iterations the surface is rescaled by a clamped factor fitted from the residual.
  bool project_dilation = false;
};

// Throws InvalidInput when an invariant fails (positivity, refine_tol < descent_tol, ...).
void check_config(const EvolveConfig& config);

struct TraceRecord {
  char phase = 'A';          // 'A' descent, 'B' refinement
  int iteration = 0;
  double F = 0.0;
  double residual_rms = 0.0;  // variational residual, Gaussian-weighted
  double max_move = 0.0;
  double step = 0.0;          // accepted line-search step / LM damping in phase B
  bool remeshed = false;
  bool symmetrized = false;
  bool rescaled = false;
};

struct EvolveTrace {
  std::vector<TraceRecord> records;
  std::string stop_reason;
  bool converged = false;
};

struct EvolveResult {
  TriMesh mesh;
  EvolveTrace trace;
};

// Solver failure that keeps the partial trace and the last iterate.
class SolverError : public Error {
 public:
  SolverError(ErrorKind kind, const std::string& what, EvolveTrace trace, TriMesh last)
      : Error(kind, what), trace_(std::move(trace)), last_(std::move(last)) {}
  const EvolveTrace& trace() const { return trace_; }
  const TriMesh& last_mesh() const { return last_; }

 private:
  EvolveTrace trace_;
  TriMesh last_;
};

using CheckpointFn = std::function<void(const TriMesh&, const EvolveTrace&)>;

struct EvolveHooks {
  int checkpoint_every = 0;
  CheckpointFn checkpoint;
};

// Boundary vertices are moved radially onto |x| = R. Throws InvalidInput if one lies
// farther than 0.1 R from the sphere and ProjectionUndefined if one sits at the origin.
TriMesh project_free_boundary(const TriMesh& mesh, double R);

// Direction along which a boundary vertex may move: the vertex normal projected onto
// the tangent plane of the sphere through it.
Vec3 boundary_direction(const Vec3& x, const Vec3& normal);

// Armijo descent along the preconditioned normal part of the gradient; boundary vertices
// slide on the sphere. Stops at residual RMS < descent_tol or after max_iters_A.
EvolveResult descend(const TriMesh& mesh, const SymmetryGroup& group, const EvolveConfig& config,
                     const EvolveHooks& hooks = {});

// Levenberg-Marquardt on the normal offsets of orbit representatives, driving the
// variational residual (and the free-boundary condition) to zero. Morse index agnostic.
EvolveResult refine_critical(const TriMesh& mesh, const SymmetryGroup& group, const EvolveConfig& config,
                             const EvolveHooks& hooks = {});

// Per-vertex H - <x,nu>/2 estimate from the discrete gradient, boundary vertices included
// (there it is the free-boundary defect <G, n_b> / m).
std::vector<double> free_boundary_residual(const TriMesh& mesh);

} // namespace shrinker
