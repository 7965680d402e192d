#include "dnlens/probe/extract.hpp"

#include <cmath>

#include "dnlens/error.hpp"
#include "dnlens/probe/coherent.hpp"
#include "dnlens/wave/solver.hpp"

namespace dnlens::probe {

using geometry::BoundaryPhase;
using geometry::Side;

LensEstimate extract_from_trace(const wave::DNTrace& trace, const geometry::Domain& domain,
                                const geometry::SpeedField& speed, const BoundaryPhase& rho, double h, double eps,
                                double T, const DetectionOptions& opt) {
  if (!(T > eps)) throw PreconditionError("T must exceed eps");
  LensEstimate est;
  est.T = T;
  DetectionOptions o = opt;
  o.boundary_speed = speed(domain.boundary_point(rho.s));
  est.detections = locate_wavefront(trace, eps, h, T, o);
  if (est.detections.empty()) {
    throw DetectionError("no detection within (eps, T) = (" + std::to_string(eps) + ", " + std::to_string(T) +
                         "): possibly trapped or T too small");
  }
  const WavefrontDetection& d = est.detections.front();
  est.ambiguous = est.detections.size() > 1 && est.detections[1].amplitude >= kAmbiguityRatio * d.amplitude;
  est.record.entry = rho;
  est.record.length = d.t1 - 0.5 * eps;
  est.record.exit = BoundaryPhase{d.s1, speed(domain.boundary_point(d.s1)) * d.xi, Side::outward};
  return est;
}

LensEstimate extract_lens(const geometry::SpeedField& speed, const BoundaryPhase& rho, double h, double eps,
                          const wave::WaveGrid& grid, double T, const DetectionOptions& opt) {
  if (T > grid.T() + 1e-9) {
    throw PreconditionError("T = " + std::to_string(T) + " exceeds the grid horizon " + std::to_string(grid.T()));
  }
  const wave::BoundarySignal f = boundary_probe(grid.domain(), speed, rho, h, eps, grid.layout());
  const wave::DNTrace tr = wave::solve_ibvp(speed, f, grid);
  return extract_from_trace(tr, grid.domain(), speed, rho, h, eps, T, opt);
}

}  // namespace dnlens::probe
