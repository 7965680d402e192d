#include "dnlens/probe/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnlens/error.hpp"
#include "dnlens/probe/coherent.hpp"
#include "dnlens/wave/discrepancy.hpp"
#include "dnlens/wave/solver.hpp"

namespace dnlens::probe {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::lens_consistent: return "lens-consistent";
    case Verdict::lens_distinct: return "lens-distinct";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict classify(double normA2, double normB2, double diff2) {
  if (diff2 <= kConsistentFraction * std::max(normA2, normB2)) return Verdict::lens_consistent;
  if (diff2 >= kDistinctFraction * (normA2 + normB2)) return Verdict::lens_distinct;
  return Verdict::inconclusive;
}

double probe_side_window_end(double eps, double rc, double collar_width, double c_max, double dx) {
  const double start = 0.5 * eps - rc;
  const double reach = 2.0 * collar_width / c_max;
  const double t = start + reach;
  return t - 4.0 * std::cbrt(dx * dx * std::max(t, 0.0));
}

SeparationVerdict separation_from_traces(const wave::SpaceTimeSamples& a, const wave::SpaceTimeSamples& b, double eps,
                                         double T, double probe_side_end) {
  if (!a.same_layout(b)) throw PreconditionError("traces have different layouts");
  if (!(T > eps) || T > a.t_end() + 1e-9) throw PreconditionError("window (eps, T) outside the trace");
  SeparationVerdict v;
  v.normA2 = a.l2_squared(eps, T);
  v.normB2 = b.l2_squared(eps, T);
  v.diff2 = wave::difference_l2_squared(a, b, eps, T);
  v.defect = std::abs(v.diff2 - v.normA2 - v.normB2);
  v.probe_side_end = probe_side_end;
  v.probe_side_diff = probe_side_end > 0.0 ? std::sqrt(wave::difference_l2_squared(a, b, 0.0, probe_side_end))
                                           : std::numeric_limits<double>::quiet_NaN();
  v.verdict = classify(v.normA2, v.normB2, v.diff2);
  return v;
}

SeparationVerdict separation_test(const geometry::SpeedField& a, const geometry::SpeedField& b,
                                  const geometry::BoundaryPhase& rho, double h, double eps, double T,
                                  const wave::WaveGrid& grid) {
  const geometry::Domain& dom = grid.domain();
  const double w = std::min(a.collar_width(), b.collar_width());
  if (!(w > 0.0)) throw PreconditionError("probe violating collar-equality precondition: no collar width given");
  const double defect = geometry::collar_defect(a, b, dom, w);
  if (defect > 1e-12) {
    throw PreconditionError("probe violating collar-equality precondition: speeds differ by " +
                            std::to_string(defect) + " on the collar");
  }
  if (T > grid.T() + 1e-9) throw PreconditionError("T exceeds the grid horizon");
  const wave::BoundarySignal f = boundary_probe(dom, a, rho, h, eps, grid.layout());
  const wave::DNTrace ta = wave::solve_ibvp(a, f, grid);
  const wave::DNTrace tb = wave::solve_ibvp(b, f, grid);
  const double cmax = std::max(geometry::sample_range(a, dom).max, geometry::sample_range(b, dom).max);
  const Probe p = make_probe(dom, a, rho, h, eps);
  return separation_from_traces(ta, tb, eps, T, probe_side_window_end(eps, p.params.rc, w, cmax, grid.dx()));
}

}  // namespace dnlens::probe
