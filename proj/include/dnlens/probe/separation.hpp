#pragma once

#include <string>

#include "dnlens/geometry/geodesic.hpp"
#include "dnlens/geometry/speed.hpp"
#include "dnlens/wave/grid.hpp"
#include "dnlens/wave/samples.hpp"

namespace dnlens::probe {

enum class Verdict { lens_consistent, lens_distinct, inconclusive };
std::string to_string(Verdict v);

inline constexpr double kDistinctFraction = 0.9;
inline constexpr double kConsistentFraction = 0.1;

struct SeparationVerdict {
  double normA2 = 0.0;  // ||Lambda_A f||^2 on (eps, T) x dM
  double normB2 = 0.0;
  double diff2 = 0.0;   // ||(Lambda_A - Lambda_B) f||^2
  double defect = 0.0;  // |diff2 - normA2 - normB2|
  // ||(Lambda_A - Lambda_B) f|| for t < probe_side_end, before the difference
  // region can be felt at the boundary. NaN when that window is empty.
  double probe_side_diff = 0.0;
  double probe_side_end = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

Verdict classify(double normA2, double normB2, double diff2);

SeparationVerdict separation_from_traces(const wave::SpaceTimeSamples& a, const wave::SpaceTimeSamples& b,
                                         double eps, double T, double probe_side_end);

// Throws PreconditionError unless the speeds agree on a collar of positive width.
SeparationVerdict separation_test(const geometry::SpeedField& a, const geometry::SpeedField& b,
                                  const geometry::BoundaryPhase& rho, double h, double eps, double T,
                                  const wave::WaveGrid& grid);

// End of the probe-side window: the wave needs 2w / c_max to reach depth w and
// return, counted from the start of the effective support eps/2 - r_c. A
// precursor margin 4 (dx^2 t)^(1/3) is subtracted.
double probe_side_window_end(double eps, double rc, double collar_width, double c_max, double dx);

}  // namespace dnlens::probe
