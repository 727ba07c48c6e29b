#pragma once

#include "shrinker/trimesh.hpp"

#include <cstdint>
#include <vector>

namespace shrinker {

// e^{-|x|^2/4}
double weight(const Vec3& x);

// Closed-form Gaussian areas, normalized by 1/(4 pi).
double sphere_gauss_area(double radius);
double cylinder_gauss_area(double radius);                       // infinite cylinder
double clipped_cylinder_gauss_area(double radius, double clip);  // cylinder inside B_clip
double disc_gauss_area(double clip);                             // plane through 0 inside B_clip
double halfspace_gauss_measure(double offset);                   // Gamma({x3 > offset})

struct WeightedAreaResult {
  double total = 0.0;
  std::vector<double> per_triangle;
  int degenerate_triangles = 0;
};

// Three-point edge-midpoint quadrature of (1/4pi) int e^{-|x|^2/4} per triangle.
WeightedAreaResult discrete_gauss_area(const TriMesh& mesh);

// Exact derivative of discrete_gauss_area().total with respect to every vertex.
std::vector<Vec3> gauss_area_gradient(const TriMesh& mesh);

// Gaussian-weighted barycentric vertex mass w_v A_v / (4 pi), the metric that turns the
// gradient into a pointwise residual.
std::vector<double> vertex_gauss_mass(const TriMesh& mesh);

struct ResidualField {
  std::vector<double> per_vertex;     // meaningless where present[v] == 0
  std::vector<std::uint8_t> present;  // 0 for boundary and degenerate vertices
  double rms_weighted = 0.0;
  int absent_degenerate = 0;          // interior vertices dropped for a degenerate 1-ring
};

// H - <x,nu>/2 with the cotangent mean curvature (sphere of radius r: H = 2/r) and the
// area-weighted vertex normal. RMS weights are w_v times the mixed Voronoi area.
ResidualField shrinker_residual(const TriMesh& mesh);

// Residual read off the discrete gradient: <G_v, nu_v> / m_v with m_v the vertex mass.
// Converges to the same quantity as shrinker_residual under refinement and vanishes
// exactly at critical points of the discrete functional.
ResidualField variational_residual(const TriMesh& mesh);

double weighted_rms(const std::vector<double>& values, const std::vector<std::uint8_t>& present,
                    const std::vector<double>& weights);

} // namespace shrinker
