#pragma once

#include <vector>

#include "dnlens/geometry/speed.hpp"
#include "dnlens/wave/grid.hpp"
#include "dnlens/wave/samples.hpp"

namespace dnlens::wave {

struct DiscrepancyStats {
  std::vector<double> ratios;      // ||(A - B) f|| / ||f||_H1 per probe
  std::vector<double> diff_norms;  // ||(A - B) f|| over the window
  std::vector<double> h1_norms;
  double max_ratio = 0.0;          // lower bound on the operator norm
};

// Columns of the window are selected by `gamma2` (all when empty); rows by [t1, t2].
DiscrepancyStats dn_discrepancy(const geometry::SpeedField& a, const geometry::SpeedField& b,
                                const std::vector<BoundarySignal>& probes, const WaveGrid& grid,
                                double t1, double t2, const std::vector<bool>& gamma2 = {},
                                unsigned jobs = 1);

// Squared L2 norm of the difference of two traces on the window.
double difference_l2_squared(const SpaceTimeSamples& a, const SpaceTimeSamples& b, double t1, double t2,
                             const std::vector<bool>& mask = {});

}  // namespace dnlens::wave
