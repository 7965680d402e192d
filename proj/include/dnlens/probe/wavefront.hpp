#pragma once

#include <limits>
#include <string>
#include <vector>

#include "dnlens/wave/samples.hpp"

namespace dnlens::probe {

struct WavefrontDetection {
  double t1 = 0.0;
  double s1 = 0.0;
  double xi = 0.0;  // tangential frequency h * k at the peak, per unit arclength
  double amplitude = 0.0;  // smoothed |Lambda f|^2 at the peak
  double window_lo = 0.0;
  double window_hi = 0.0;
};

struct DetectionOptions {
  double smoothing = 0.5;         // Gaussian width, units of sqrt(h)
  double median_factor = 5.0;     // peaks must exceed this multiple of the median
  double relative_floor = 0.01;   // and this fraction of the largest peak
  double reference_floor = 1e-4;  // and this fraction of max |Lambda f|^2 for t <= t_lo
  double merge_radius = 3.0;      // sqrt(h) units
  double gabor_half_width = 3.0;  // sqrt(h) units
  double gabor_sigma = 1.0;       // sqrt(h) units
  double xi_max = 1.2;            // scan range for the tangential frequency
  // Local refinement: divide the trace near each peak by the symbol
  // sqrt(tau^2 - c^2 xi^2) of c d_nu for outgoing waves, then take the power
  // centroid. Removes the O(h) position bias of the obliquity factor.
  bool deconvolve = true;
  double refine_half_width = 5.0;  // sqrt(h) units
  double boundary_speed = 1.0;     // c at the exit, used by the symbol
};

// Detections in the window (t_lo, t_hi], strongest first. Peaks of the smoothed
// |Lambda f|^2 above both floors are merged within merge_radius, then refined.
// The time factor of the Gabor atom is exp(i t / h); phases exp((i/h)(-t + xi s))
// give xi > 0.
std::vector<WavefrontDetection> locate_wavefront(const wave::SpaceTimeSamples& trace, double t_lo, double h,
                                                 double t_hi = std::numeric_limits<double>::infinity(),
                                                 const DetectionOptions& opt = {});

std::string detections_to_json(const std::vector<WavefrontDetection>& d);

}  // namespace dnlens::probe
