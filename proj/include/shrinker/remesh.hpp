#pragma once

#include "shrinker/equivariance.hpp"
#include "shrinker/trimesh.hpp"

namespace shrinker {

// Target edge length at distance r from the origin: `edge` inside grade_radius, growing
// like (r / grade_radius)^2 outside it up to a fixed multiple of `edge`, and shrinking
// again towards the clipping sphere when clip_radius > 0. grade_radius = 0 means uniform.
double graded_edge(double r, double edge, double grade_radius, double clip_radius = 0.0);

struct RemeshOptions {
  double split_ratio = 4.0 / 3.0;
  double collapse_ratio = 4.0 / 5.0;
  double grade_radius = 0.0;
  int passes = 4;
  double relax_weight = 0.5;
  // Radius of the sphere carrying the boundary; 0 detects it from the boundary vertices.
  double clip_radius = 0.0;
};

struct RemeshStats {
  int splits = 0;
  int collapses = 0;
  int flips = 0;
  int skipped_collapses = 0;
  double in_band_fraction = 0.0;  // edges within [collapse, split] * target after the last pass
  bool band_reached = false;
};

// Split / collapse / flip / tangential relaxation cycle. Topology is preserved; with a
// group every operation is applied to whole edge orbits and the result is symmetrised.
TriMesh remesh(const TriMesh& mesh, double target_edge, const SymmetryGroup* group,
               const RemeshOptions& options = {}, RemeshStats* stats = nullptr);

// Fraction of edges whose length lies within [lo, hi] times the local target.
double edge_band_fraction(const TriMesh& mesh, double target_edge, double grade_radius, double lo, double hi,
                          double clip_radius = 0.0);

// Tangential smoothing only: interior vertices move in their tangent plane, boundary
// vertices slide along the boundary sphere (and stay fixed when clip_radius is 0). Keeps connectivity.
void tangential_relax(TriMesh& mesh, double weight, double clip_radius, const SymmetryGroup* group,
                      const OrbitStructure* orbits);

} // namespace shrinker
