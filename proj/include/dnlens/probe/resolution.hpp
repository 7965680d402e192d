#pragma once

#include <cstddef>

#include "dnlens/geometry/domain.hpp"
#include "dnlens/geometry/speed.hpp"

namespace dnlens::probe {

// Grid step resolving the semiclassical wavelength 2 pi h:
//   dx = 2 pi h min(c_min / 12, c_collar / 20)
// (12 points per interior wavelength, 20 on the collar where the DN map is read),
// dt = 0.95 * 0.5 dx / c_max, and a trace stride keeping 10 samples per period.
struct Resolution {
  double dx = 0.0;
  double dt = 0.0;
  std::size_t trace_stride = 1;
};

Resolution resolution_rule(double h, double c_min, double c_max, double c_collar);

// Same time step and stride for a given dx.
Resolution resolution_with_step(double h, double dx, double c_max);

struct SpeedBounds {
  double c_min = 1.0;
  double c_max = 1.0;
  double c_collar = 1.0;  // minimum over the collar
};

SpeedBounds speed_bounds(const geometry::SpeedField& a, const geometry::SpeedField& b,
                         const geometry::Domain& domain);

// Window after the first exit and before the second reflection, for a reference
// length ell_ref measured with the collar speed (c = 1 extended inward) and
// user bounds c_lo <= c <= c_hi in the interior:
//   lo = eps/2 + ell_ref / c_lo + sqrt(2h),   hi = eps/2 + 2 ell_ref / c_hi - sqrt(2h).
// T is the midpoint. Throws PreconditionError when the bracket is empty.
struct TimeBracket {
  double lo = 0.0;
  double hi = 0.0;
  double T = 0.0;
};

TimeBracket time_bracket(double ell_ref, double eps, double h, double c_lo, double c_hi);

}  // namespace dnlens::probe
