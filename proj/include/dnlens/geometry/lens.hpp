#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnlens/geometry/geodesic.hpp"

namespace dnlens::geometry {

struct LensRecord {
  BoundaryPhase entry;
  std::optional<BoundaryPhase> exit;
  double length = 0.0;  // g-arclength, +inf when trapped
  bool trapped = false;
  std::vector<PhaseState> path;
};

// Throws GlancingError for a glancing entry; a trapped geodesic gives a trapped record.
LensRecord lens_map(const Metric& metric, const BoundaryPhase& entry,
                    const IntegratorOptions& opt = {});

struct LensSweep {
  std::vector<LensRecord> records;   // input order
  std::vector<std::string> errors;   // per row, empty when the row succeeded
  std::vector<std::size_t> trapped;  // row indices
  double T0_estimate = 0.0;          // max finite length
};

// Rows are evaluated on up to `jobs` threads; results do not depend on `jobs`.
LensSweep lens_sweep(const Metric& metric, const std::vector<BoundaryPhase>& probes,
                     const IntegratorOptions& opt = {}, unsigned jobs = 1);

// s_in,mu_in,s_out,mu_out,length,trapped
void write_lens_csv(std::ostream& os, const LensSweep& sweep);

std::vector<BoundaryPhase> even_probes(const Domain& domain, std::size_t count, double mu);

}  // namespace dnlens::geometry
