#include "dnlens/probe/coherent.hpp"

#include <cmath>
#include <numbers>

#include "dnlens/error.hpp"

namespace dnlens::probe {

using geometry::BoundaryPhase;
using geometry::Domain;
using geometry::Side;
using geometry::SpeedField;

void validate(const CoherentParams& p) {
  if (!(p.h > 0.0)) throw PreconditionError("h must be positive");
  if (p.n != 2) throw PreconditionError("coherent states live on the 2-dimensional boundary cylinder");
  if (p.rc < 4.0 * std::sqrt(p.h) * (1.0 - 1e-12)) {
    throw PreconditionError("cutoff radius " + std::to_string(p.rc) + " is below 4 sqrt(h) = " +
                            std::to_string(4.0 * std::sqrt(p.h)));
  }
  if (std::abs(p.zeta.y) >= geometry::kGlancingLimit) {
    throw GlancingError("tangential frequency |xi0| must stay below " + std::to_string(geometry::kGlancingLimit));
  }
}

double cutoff(double q) {
  if (q <= 0.5) return 1.0;
  if (q >= 1.0) return 0.0;
  const double x = 2.0 * q - 1.0;
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

std::complex<double> coherent_value(const CoherentParams& p, Vec2 dz) {
  const double r2 = norm2(dz);
  const double q = std::sqrt(r2) / p.rc;
  if (q >= 1.0) return 0.0;
  const double amp = p.h * std::pow(std::numbers::pi * p.h, -0.25 * p.n) * std::exp(-0.5 * r2 / p.h) * cutoff(q);
  const double phase = dot(dz, p.zeta) / p.h;
  return {amp * std::cos(phase), amp * std::sin(phase)};
}

std::vector<std::complex<double>> coherent_state(const CoherentParams& p, const ZGrid& g) {
  validate(p);
  const double limit = 2.0 * std::numbers::pi * p.h / 10.0;
  if (g.dt > limit || g.ds > limit) {
    throw PreconditionError("grid does not resolve the wavelength: step must be at most 2 pi h / 10 = " +
                            std::to_string(limit));
  }
  std::vector<std::complex<double>> out(g.nt * g.ns);
  for (std::size_t i = 0; i < g.nt; ++i) {
    const double dt = g.t_lo + static_cast<double>(i) * g.dt - p.z0.x;
    for (std::size_t j = 0; j < g.ns; ++j) {
      double ds = g.s_lo + static_cast<double>(j) * g.ds - p.z0.y;
      if (g.period > 0.0) ds = std::remainder(ds, g.period);
      out[i * g.ns + j] = coherent_value(p, {dt, ds});
    }
  }
  return out;
}

double Probe::operator()(double t, double s) const {
  const double dt = t - params.z0.x;
  if (std::abs(dt) >= params.rc) return 0.0;
  const double ds = std::remainder(s - params.z0.y, period);
  if (std::abs(ds) >= params.rc) return 0.0;
  return coherent_value(params, {dt, ds}).real();
}

Probe make_probe(const Domain& domain, const SpeedField& speed, const BoundaryPhase& rho, double h, double eps,
                 double rc) {
  if (rho.side != Side::inward) throw PreconditionError("probe direction must point inward");
  if (std::abs(rho.mu) >= geometry::kGlancingLimit) {
    throw GlancingError("probe |mu| = " + std::to_string(std::abs(rho.mu)) + " exceeds the glancing limit " +
                        std::to_string(geometry::kGlancingLimit));
  }
  if (!(h > 0.0) || !(eps > 0.0)) throw PreconditionError("h and eps must be positive");
  Probe p;
  p.rho = rho;
  p.eps = eps;
  p.period = domain.perimeter();
  p.params.h = h;
  p.params.rc = rc > 0.0 ? rc : 4.0 * std::sqrt(h);
  p.params.z0 = {0.5 * eps, domain.wrap(rho.s)};
  p.params.zeta = {-1.0, rho.mu / speed(domain.boundary_point(rho.s))};
  validate(p.params);
  if (p.params.rc > 0.25 * eps * (1.0 + 1e-12)) {
    throw PreconditionError("probe support leaks outside (eps/4, 3eps/4): r_c = " + std::to_string(p.params.rc) +
                            " exceeds eps/4 = " + std::to_string(0.25 * eps));
  }
  if (2.0 * p.params.rc >= domain.perimeter()) throw PreconditionError("probe arc covers the whole boundary");
  return p;
}

wave::BoundarySignal boundary_probe(const Domain& domain, const SpeedField& speed, const BoundaryPhase& rho, double h,
                                    double eps, const wave::SpaceTimeSamples& layout, double rc) {
  const Probe p = make_probe(domain, speed, rho, h, eps, rc);
  const double limit = 2.0 * std::numbers::pi * h / 10.0;
  if (layout.dt() > limit || layout.ds() > limit) {
    throw PreconditionError("sample layout does not resolve 2 pi h / 10 = " + std::to_string(limit));
  }
  if (layout.t_end() < eps) throw PreconditionError("sample layout ends before eps");
  return wave::BoundarySignal::sample(layout, p);
}

std::vector<bool> probe_arc_mask(const Domain& domain, const Probe& probe, const wave::SpaceTimeSamples& layout) {
  std::vector<bool> mask(layout.ns());
  for (std::size_t j = 0; j < layout.ns(); ++j) {
    mask[j] = domain.arc_distance(layout.s()[j], probe.params.z0.y) < probe.s_half_width();
  }
  return mask;
}

}  // namespace dnlens::probe
