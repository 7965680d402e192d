#include "dnlens/geometry/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dnlens/error.hpp"

namespace dnlens::geometry {

namespace {

PhaseState axpy(const PhaseState& a, double h, const PhaseState& k) {
  return {a.x + h * k.x, a.xi + h * k.xi};
}

bool finite(const PhaseState& st) {
  return std::isfinite(st.x.x) && std::isfinite(st.x.y) && std::isfinite(st.xi.x) &&
         std::isfinite(st.xi.y);
}

}  // namespace

double g_norm(const SpeedField& speed, const PhaseState& st) { return speed(st.x) * norm(st.xi); }

PhaseState hamiltonian_rhs(const SpeedField& speed, const PhaseState& st) {
  const Dual c = speed.eval(st.x);
  if (!std::isfinite(c.v) || !std::isfinite(c.dx) || !std::isfinite(c.dy)) {
    throw NumericalAbort("non-finite speed at (" + std::to_string(st.x.x) + ", " +
                             std::to_string(st.x.y) + ")",
                         0);
  }
  const double xi2 = norm2(st.xi);
  return {c.v * c.v * st.xi, -(c.v * xi2) * c.grad()};
}

PhaseState rk4_step(const SpeedField& speed, const PhaseState& st, double h) {
  const PhaseState k1 = hamiltonian_rhs(speed, st);
  const PhaseState k2 = hamiltonian_rhs(speed, axpy(st, 0.5 * h, k1));
  const PhaseState k3 = hamiltonian_rhs(speed, axpy(st, 0.5 * h, k2));
  const PhaseState k4 = hamiltonian_rhs(speed, axpy(st, h, k3));
  return {st.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          st.xi + (h / 6.0) * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi)};
}

PhaseState flow(const SpeedField& speed, PhaseState st, double length, double step) {
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(length) / step - 1e-12));
  if (n == 0) return st;
  const double h = length / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) st = rk4_step(speed, st, h);
  return st;
}

PhaseState boundary_phase_to_interior(const Metric& metric, const BoundaryPhase& bp) {
  if (!std::isfinite(bp.mu) || std::abs(bp.mu) > kGlancingLimit) {
    std::ostringstream msg;
    msg << "glancing boundary phase: |mu| = " << std::abs(bp.mu) << " exceeds the limit "
        << kGlancingLimit;
    throw GlancingError(msg.str());
  }
  const Vec2 x = metric.domain.boundary_point(bp.s);
  const Vec2 t = metric.domain.tangent(bp.s);
  const Vec2 nu = metric.domain.outward_normal(bp.s);
  const double c = metric.speed(x);
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("speed must be positive and finite");
  const double mn = std::sqrt(1.0 - bp.mu * bp.mu);
  const double sign = bp.side == Side::inward ? -1.0 : 1.0;
  return {x, (bp.mu * t + (sign * mn) * nu) / c};
}

BoundaryPhase phase_to_boundary(const Metric& metric, const PhaseState& st, Side side) {
  BoundaryPhase bp;
  bp.s = metric.domain.arclength_of(st.x);
  bp.mu = metric.speed(st.x) * dot(st.xi, metric.domain.tangent(bp.s));
  bp.side = side;
  return bp;
}

GeodesicResult integrate_geodesic(const Metric& metric, const PhaseState& start,
                                  const IntegratorOptions& opt) {
  if (!(opt.step > 0.0) || !(opt.max_length > 0.0)) {
    throw PreconditionError("integrator step and length budget must be positive");
  }
  const Domain& dom = metric.domain;
  const SpeedField& speed = metric.speed;
  if (dom.defining_function(start.x) > 1e-9) throw PreconditionError("geodesic start lies outside the domain");
  const double n0 = g_norm(speed, start);
  if (!std::isfinite(n0)) throw NumericalAbort("non-finite speed at geodesic start", 0);
  if (std::abs(n0 - 1.0) > 1e-6) {
    throw PreconditionError("start covector is not unit in the metric: |xi|_g = " + std::to_string(n0));
  }

  GeodesicResult res;
  const std::size_t stride = std::max<std::size_t>(1, opt.path_stride);
  if (opt.record_path) res.path.push_back(start);

  PhaseState st = start;
  double length = 0.0;
  std::size_t step_index = 0;
  while (length < opt.max_length) {
    const double h = std::min(opt.step, opt.max_length - length);
    PhaseState next = rk4_step(speed, st, h);
    ++step_index;
    if (!finite(next)) throw NumericalAbort("non-finite geodesic state", step_index);

    if (dom.defining_function(next.x) > 0.0) {
      // Bisect the sub-step on the defining function.
      double lo = 0.0, hi = h;
      PhaseState hit = next;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const PhaseState trial = rk4_step(speed, st, mid);
        const double phi = dom.defining_function(trial.x);
        if (phi > 0.0) {
          hi = mid;
          hit = trial;
        } else {
          lo = mid;
        }
        if (std::abs(phi) < opt.boundary_tol) {
          hit = trial;
          hi = mid;
          break;
        }
        if (hi - lo < 1e-16) break;
      }
      length += hi;
      res.max_speed_defect = std::max(res.max_speed_defect, std::abs(g_norm(speed, hit) - 1.0));
      if (opt.record_path) res.path.push_back(hit);
      res.exit = hit;
      res.length = length;
      res.steps = step_index;
      return res;
    }

    st = next;
    length += h;
    res.max_speed_defect = std::max(res.max_speed_defect, std::abs(g_norm(speed, st) - 1.0));
    if (opt.record_path && step_index % stride == 0) res.path.push_back(st);
  }
  res.trapped = true;
  res.length = std::numeric_limits<double>::infinity();
  res.steps = step_index;
  return res;
}

}  // namespace dnlens::geometry
