#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dnlens/geometry/lens.hpp"
#include "dnlens/probe/wavefront.hpp"
#include "dnlens/wave/grid.hpp"

namespace dnlens::probe {

struct LensEstimate {
  geometry::LensRecord record;  // length = t1 - eps/2, exit = (s1, c xi', outward)
  std::vector<WavefrontDetection> detections;
  bool ambiguous = false;  // a second detection above kAmbiguityRatio of the first
  double T = 0.0;
};

inline constexpr double kAmbiguityRatio = 0.25;

// Reads the lens record off a trace computed from boundary_probe(rho, h, eps).
// Throws DetectionError when nothing is detected in (eps, T).
LensEstimate extract_from_trace(const wave::DNTrace& trace, const geometry::Domain& domain,
                                const geometry::SpeedField& speed, const geometry::BoundaryPhase& rho,
                                double h, double eps, double T, const DetectionOptions& opt = {});

// Solves with the probe and extracts. T must not exceed the grid horizon.
LensEstimate extract_lens(const geometry::SpeedField& speed, const geometry::BoundaryPhase& rho, double h,
                          double eps, const wave::WaveGrid& grid, double T, const DetectionOptions& opt = {});

}  // namespace dnlens::probe
