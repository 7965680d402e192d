#include "dnlens/probe/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dnlens/error.hpp"

namespace dnlens::probe {

Resolution resolution_rule(double h, double c_min, double c_max, double c_collar) {
  if (!(h > 0.0) || !(c_min > 0.0) || !(c_max >= c_min) || !(c_collar > 0.0)) {
    throw PreconditionError("resolution rule needs h > 0 and 0 < c_min <= c_max, c_collar > 0");
  }
  const double wavelength = 2.0 * std::numbers::pi * h;
  return resolution_with_step(h, wavelength * std::min(c_min / 12.0, c_collar / 20.0), c_max);
}

Resolution resolution_with_step(double h, double dx, double c_max) {
  if (!(h > 0.0) || !(dx > 0.0) || !(c_max > 0.0)) throw PreconditionError("need h, dx, c_max > 0");
  const double wavelength = 2.0 * std::numbers::pi * h;
  Resolution r;
  r.dx = dx;
  r.dt = 0.95 * 0.5 * r.dx / c_max;
  r.trace_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(wavelength / 10.0 / r.dt)));
  return r;
}

SpeedBounds speed_bounds(const geometry::SpeedField& a, const geometry::SpeedField& b,
                         const geometry::Domain& domain) {
  const auto ra = geometry::sample_range(a, domain), rb = geometry::sample_range(b, domain);
  SpeedBounds out;
  out.c_min = std::min(ra.min, rb.min);
  out.c_max = std::max(ra.max, rb.max);
  // Collar minimum from boundary samples and a few depths inside the collar.
  const double w = std::min(a.collar_width(), b.collar_width());
  double cc = std::numeric_limits<double>::infinity();
  const std::size_t nb = 256, nd = w > 0.0 ? 8 : 1;
  for (std::size_t i = 0; i < nb; ++i) {
    const double s = domain.perimeter() * static_cast<double>(i) / static_cast<double>(nb);
    const Vec2 xb = domain.boundary_point(s), nu = domain.outward_normal(s);
    for (std::size_t k = 0; k < nd; ++k) {
      const Vec2 p = xb - (w * static_cast<double>(k) / static_cast<double>(nd)) * nu;
      cc = std::min({cc, a(p), b(p)});
    }
  }
  out.c_collar = cc;
  return out;
}

TimeBracket time_bracket(double ell_ref, double eps, double h, double c_lo, double c_hi) {
  if (!(ell_ref > 0.0) || !(c_lo > 0.0) || !(c_hi >= c_lo)) {
    throw PreconditionError("time bracket needs ell_ref > 0 and 0 < c_lo <= c_hi");
  }
  TimeBracket b;
  b.lo = 0.5 * eps + ell_ref / c_lo + std::sqrt(2.0 * h);
  b.hi = 0.5 * eps + 2.0 * ell_ref / c_hi - std::sqrt(2.0 * h);
  if (!(b.lo < b.hi)) {
    throw PreconditionError("empty time bracket: first exit by " + std::to_string(b.lo) +
                            " is not before the second reflection at " + std::to_string(b.hi));
  }
  b.T = 0.5 * (b.lo + b.hi);
  return b;
}

}  // namespace dnlens::probe
