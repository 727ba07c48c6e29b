#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace shrinker {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Tri = std::array<int, 3>;

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidInput,
  TopologyUndefined,
  ClipDegenerate,
  OrbitAmbiguous,
  NotEquivariant,
  AxisTangent,
  SeedGeometry,
  ProjectionUndefined,
  NotClipped,
  SolverStall,
  RefineStall,
  TopologyDrift,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

// Exit code contract of the command-line tool: 2 invalid input, 3 solver stall, 4 topology drift.
int exit_code_for(ErrorKind kind);

inline bool is_finite(const Vec3& p) { return p.allFinite(); }

// Kahan-compensated sum, used wherever totals must match their parts to ~1e-15 relative.
class CompensatedSum {
public:
  void add(double x) {
    double y = x - c_;
    double t = sum_ + y;
    c_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

struct BoundingBox {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double diameter() const { return lo.allFinite() && hi.allFinite() ? (hi - lo).norm() : 0.0; }
};

BoundingBox bounding_box(const std::vector<Vec3>& points);

} // namespace shrinker
