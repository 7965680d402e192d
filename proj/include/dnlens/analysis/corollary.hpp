#pragma once

#include <string>
#include <vector>

#include "dnlens/analysis/experiment.hpp"
#include "dnlens/geometry/foliation.hpp"

namespace dnlens::analysis {

inline constexpr double kDirectTolerance = 1e-8;

struct CorollaryOptions {
  geometry::FoliationSampling sampling;
  std::size_t direct_lattice = 121;  // lattice for the pointwise check on M0
};

struct CorollaryReport {
  geometry::FoliationReport foliation;  // for the metric of speed_a
  SeparationReport experiment;
  double collar_defect = 0.0;

  bool hypotheses_hold = false;  // foliation passes and speeds agree on the collar
  // Every probe at the smallest h ran and none is lens-distinct or inconclusive.
  bool lens_data_equal = false;
  std::vector<std::size_t> counterexample_rows;  // rows showing a lens mismatch

  double direct_max_diff = 0.0;  // max |c - c~| over lattice points of M0
  std::size_t direct_points = 0;
  bool direct_equal = false;  // direct_max_diff <= kDirectTolerance

  // "c = c~ on M0" is asserted only when hypotheses hold, the lens data agree
  // and the direct check does not refute it.
  bool implication_asserted = false;
  // Hypotheses and lens data say equal but the direct check disagrees: the
  // probes did not resolve the difference.
  bool resolution_limited = false;
  bool dimension_gap = true;  // the corollaries need dim >= 3; this run is 2-D
  std::string conclusion;
};

// Throws PreconditionError when the speeds differ on the collar.
CorollaryReport corollary_report(const ExperimentConfig& cfg, const geometry::FoliationSpec& fol,
                                 const CorollaryOptions& opt = {});

}  // namespace dnlens::analysis
