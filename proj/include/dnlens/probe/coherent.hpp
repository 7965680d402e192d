#pragma once

#include <complex>
#include <vector>

#include "dnlens/geometry/domain.hpp"
#include "dnlens/geometry/geodesic.hpp"
#include "dnlens/geometry/speed.hpp"
#include "dnlens/vec2.hpp"
#include "dnlens/wave/samples.hpp"

namespace dnlens::probe {

// Gaussian packet on the boundary cylinder z = (t, s):
//   F(z) = h (pi h)^(-n/4) exp((i/h) ((z - z0).zeta - |z - z0|^2 / 2)) chi(|z - z0| / r_c)
// with n = 2 and chi a C^2 cutoff, 1 on [0, 1/2] and 0 on [1, inf).
struct CoherentParams {
  double h = 0.01;
  Vec2 z0;    // (t0, s0)
  Vec2 zeta;  // (tau0, xi0)
  double rc = 0.4;
  int n = 2;
};

// Throws PreconditionError unless h > 0, r_c >= 4 sqrt(h) and |xi0| < kGlancingLimit.
void validate(const CoherentParams& p);

double cutoff(double q);

// Value at an offset dz = z - z0 (the caller folds the periodic s difference).
std::complex<double> coherent_value(const CoherentParams& p, Vec2 dz);

// Rectangular sample grid in (t, s). A positive `period` makes s periodic.
struct ZGrid {
  double t_lo = 0.0, dt = 0.0;
  std::size_t nt = 0;
  double s_lo = 0.0, ds = 0.0;
  std::size_t ns = 0;
  double period = 0.0;
};

// Row-major (t, s) samples. Throws PreconditionError when a step exceeds 2 pi h / 10.
std::vector<std::complex<double>> coherent_state(const CoherentParams& p, const ZGrid& grid);

// Probe f_rho = Re F centered at (eps/2, s0) with frequency (-1, mu / c(x(s0))).
// Supported in |t - eps/2| < r_c, |s - s0| < r_c; requires r_c <= eps/4 so that the
// time support lies in (eps/4, 3 eps/4). r_c = 0 selects 4 sqrt(h).
struct Probe {
  geometry::BoundaryPhase rho;
  CoherentParams params;
  double eps = 0.0;
  double period = 0.0;  // boundary perimeter

  double operator()(double t, double s) const;
  double s_half_width() const { return params.rc; }
};

Probe make_probe(const geometry::Domain& domain, const geometry::SpeedField& speed,
                 const geometry::BoundaryPhase& rho, double h, double eps, double rc = 0.0);

// Samples on `layout` with the exact function attached. Throws PreconditionError
// when the layout steps do not resolve 2 pi h / 10.
wave::BoundarySignal boundary_probe(const geometry::Domain& domain, const geometry::SpeedField& speed,
                                    const geometry::BoundaryPhase& rho, double h, double eps,
                                    const wave::SpaceTimeSamples& layout, double rc = 0.0);

// Columns of `layout` inside the probe arc.
std::vector<bool> probe_arc_mask(const geometry::Domain& domain, const Probe& probe,
                                 const wave::SpaceTimeSamples& layout);

}  // namespace dnlens::probe
