#pragma once

#include <iosfwd>
#include <vector>

namespace dnlens::analysis {

// Norm ratios ||(U_c1 - U_c2) f|| / ||f|| for translations U_c f(x) = f(x - c)
// applied to unit-L2 Gaussian packets
//   f(x) = (2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2)) [* sqrt(2) cos(omega x)],
// with omega = pi / (c1 - c2) when modulated. Unmodulated packets with
// sigma << |c1 - c2| approach sqrt(2); modulated ones approach 2 as sigma grows.
struct ShiftRow {
  double sigma = 0.0;
  bool modulated = false;
  double ratio = 0.0;
};

struct ShiftDemoOptions {
  // Grid step; 0 picks min(sigma / 20, period / 32) per row.
  double step = 0.0;
  // Packets are sampled on |x - c| <= tail * sigma around both translates.
  double tail = 12.0;
};

// Throws PreconditionError for nonpositive widths or when `step` does not give
// 16 points per modulation period.
std::vector<ShiftRow> shift_norm_demo(double c1, double c2, const std::vector<double>& sigmas, bool modulated,
                                      const ShiftDemoOptions& opt = {});

// sigma,modulated,ratio
void write_shift_csv(std::ostream& os, const std::vector<ShiftRow>& rows);

}  // namespace dnlens::analysis
