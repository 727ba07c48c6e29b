#pragma once

#include "shrinker/equivariance.hpp"
#include "shrinker/trimesh.hpp"

#include <string>
#include <vector>

namespace shrinker {

enum class SeedFamily { OneEnd, TwoEnd };

const char* to_string(SeedFamily f);
SeedFamily parse_family(const std::string& s);

struct SeedSpec {
  SeedFamily family = SeedFamily::OneEnd;
  int g_or_n = 1;             // genus g (one end) or dihedral parameter n (two ends)
  double t = 2.0 / 3.0;       // sweepout parameter, one end only: scale t/(1-t)
  double fillet = 0.15;       // neck half-width
  double target_edge = 0.08;  // edge length near the origin
  double R = 8.0;             // clip radius
  // Beyond grade_radius the edge length grows like (|x| / grade_radius)^2; 0 keeps it
  // uniform inside B_R.
  double grade_radius = 3.0;
  bool prismatic = false;     // two ends: align the neck pattern of both circles

  double scale() const { return t / (1.0 - t); }
};

// Throws InvalidInput when the spec violates its invariants.
void check_seed_spec(const SeedSpec& spec);

// The group the seed is built to be invariant under: D_{g+1}, D_n, or C_n for prismatic two-end seeds.
SymmetryGroup seed_group(const SeedSpec& spec);

// Plane and unit sphere desingularised along their intersection circle with 2(g+1)
// alternating Scherk-type necks, scaled by t/(1-t) and clipped to B_R.
TriMesh seed_one_end(const SeedSpec& spec);

// Cylinder of radius sqrt2 and sphere of radius 2 desingularised along both circles
// x3 = +-sqrt2 with 2n alternating necks per circle, clipped to B_R.
TriMesh seed_two_end(const SeedSpec& spec);

TriMesh make_seed(const SeedSpec& spec);

struct SweepSample {
  double t;
  double area;
  TriMesh mesh;  // empty unless requested
};

std::vector<SweepSample> sweepout_family(int g, const std::vector<double>& t_samples, const SeedSpec& defaults,
                                         bool keep_meshes = false);

} // namespace shrinker
