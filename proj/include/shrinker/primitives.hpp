#pragma once

#include "shrinker/trimesh.hpp"

namespace shrinker {

// Subdivided icosahedron projected to the sphere. One vertex sits on each pole and the
// mesh is invariant under D5 in the convention of dihedral_group(5). Level 0 has 12 vertices.
TriMesh icosphere(double radius, int level);

TriMesh tetrahedron();

// Equilateral triangle grid on the plane z = 0 with nx * ny vertices and spacing h,
// centred at the origin.
TriMesh triangle_grid(int nx, int ny, double h);

// Plane z = 0 clipped to B_R, sampled with an equilateral grid of spacing `edge`.
TriMesh clipped_disc(double R, double edge);

// Vertical cylinder of given radius clipped to B_R; rings of `segments` vertices with
// alternate rings staggered by half a segment.
TriMesh clipped_cylinder(double radius, double R, int segments);

// Torus of revolution about the z axis.
TriMesh torus(double major, double minor, int nu, int nv);

// Closed surface of the requested genus built from a flat-tube torus pattern, for tests.
TriMesh structured_torus(int nu, int nv);

} // namespace shrinker
