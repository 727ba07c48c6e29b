#include "shrinker/core.hpp"

namespace shrinker {

const char* to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::InvalidInput: return "invalid-input";
  case ErrorKind::TopologyUndefined: return "topology-undefined";
  case ErrorKind::ClipDegenerate: return "clip-degenerate";
  case ErrorKind::OrbitAmbiguous: return "orbit-ambiguous";
  case ErrorKind::NotEquivariant: return "not-equivariant";
  case ErrorKind::AxisTangent: return "axis-tangent";
  case ErrorKind::SeedGeometry: return "seed-geometry";
  case ErrorKind::ProjectionUndefined: return "projection-undefined";
  case ErrorKind::NotClipped: return "not-clipped";
  case ErrorKind::SolverStall: return "stalled";
  case ErrorKind::RefineStall: return "refine-stalled";
  case ErrorKind::TopologyDrift: return "topology-drift";
  case ErrorKind::Io: return "io";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::SolverStall:
  case ErrorKind::RefineStall:
    return 3;
  case ErrorKind::TopologyDrift:
    return 4;
  default:
    return 2;
  }
}

BoundingBox bounding_box(const std::vector<Vec3>& points) {
  BoundingBox box;
  for (const Vec3& p : points) {
    if (p.allFinite()) box.extend(p);
  }
  return box;
}

} // namespace shrinker
