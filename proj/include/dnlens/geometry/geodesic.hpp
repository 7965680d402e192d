#pragma once

#include <optional>
#include <vector>

#include "dnlens/geometry/domain.hpp"
#include "dnlens/geometry/speed.hpp"

namespace dnlens::geometry {

// g = c^-2 g0 on the domain.
struct Metric {
  Domain domain;
  SpeedField speed;
};

struct PhaseState {
  Vec2 x;
  Vec2 xi;  // covector, Euclidean components
};

enum class Side { inward, outward };

// Point of the ball bundle. mu is the tangential part of the covector measured in
// the metric: mu = c(x(s)) * <xi, T(s)>, so |mu| is the sine of the angle with the
// normal. The tangent T runs counterclockwise.
struct BoundaryPhase {
  double s = 0.0;
  double mu = 0.0;
  Side side = Side::inward;
};

inline constexpr double kGlancingLimit = 0.995;

struct IntegratorOptions {
  double step = 1e-3;         // g-arclength
  double max_length = 50.0;   // trapping budget
  double boundary_tol = 1e-10;
  bool record_path = false;
  std::size_t path_stride = 1;
};

struct GeodesicResult {
  std::vector<PhaseState> path;
  std::optional<PhaseState> exit;
  double length = 0.0;
  bool trapped = false;
  double max_speed_defect = 0.0;  // max | |xi|_g - 1 | seen along the path
  std::size_t steps = 0;
};

double g_norm(const SpeedField& speed, const PhaseState& st);

// Hamiltonian vector field of H = c^2 |xi|^2 / 2.
PhaseState hamiltonian_rhs(const SpeedField& speed, const PhaseState& st);
PhaseState rk4_step(const SpeedField& speed, const PhaseState& st, double h);
// Fixed-step flow for a signed g-length, ignoring the boundary.
PhaseState flow(const SpeedField& speed, PhaseState st, double length, double step);

PhaseState boundary_phase_to_interior(const Metric& metric, const BoundaryPhase& bp);
BoundaryPhase phase_to_boundary(const Metric& metric, const PhaseState& st, Side side);

GeodesicResult integrate_geodesic(const Metric& metric, const PhaseState& start,
                                  const IntegratorOptions& opt = {});

}  // namespace dnlens::geometry
