#include "dnlens/analysis/corollary.hpp"

#include <algorithm>
#include <cmath>

#include "dnlens/error.hpp"

namespace dnlens::analysis {

CorollaryReport corollary_report(const ExperimentConfig& cfg, const geometry::FoliationSpec& fol,
                                 const CorollaryOptions& opt) {
  CorollaryReport rep;
  const double w = std::min(cfg.speed_a.collar_width(), cfg.speed_b.collar_width());
  if (!(w > 0.0)) throw PreconditionError("corollary needs a positive collar width");
  rep.collar_defect = geometry::collar_defect(cfg.speed_a, cfg.speed_b, cfg.domain, w);
  if (rep.collar_defect > 1e-12) {
    throw PreconditionError("speeds differ by " + std::to_string(rep.collar_defect) +
                            " near the boundary; the corollary needs c = c~ on a collar");
  }

  rep.foliation = geometry::check_foliation(geometry::Metric{cfg.domain, cfg.speed_a}, fol, opt.sampling);
  rep.hypotheses_hold = rep.foliation.pass;

  rep.experiment = run_separation_experiment(cfg);
  const std::size_t nh = cfg.h_schedule.size();
  bool all_ran = true;
  for (std::size_t k = nh - 1; k < rep.experiment.rows.size(); k += nh) {
    const ExperimentRow& r = rep.experiment.rows[k];
    if (!r.ok() || !r.separation) {
      all_ran = false;
      continue;
    }
    if (r.separation->verdict != probe::Verdict::lens_consistent) rep.counterexample_rows.push_back(k);
  }
  rep.lens_data_equal = all_ran && rep.counterexample_rows.empty();

  const auto bb = cfg.domain.bounds();
  const std::size_t n = std::max<std::size_t>(opt.direct_lattice, 2);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p{bb.lo.x + (bb.hi.x - bb.lo.x) * static_cast<double>(i) / static_cast<double>(n - 1),
                   bb.lo.y + (bb.hi.y - bb.lo.y) * static_cast<double>(j) / static_cast<double>(n - 1)};
      if (cfg.domain.defining_function(p) >= 0.0 || fol.m0.value(p) > 0.0) continue;
      rep.direct_max_diff = std::max(rep.direct_max_diff, std::abs(cfg.speed_a(p) - cfg.speed_b(p)));
      ++rep.direct_points;
    }
  }
  rep.direct_equal = rep.direct_max_diff <= kDirectTolerance;

  const bool premises = rep.hypotheses_hold && rep.lens_data_equal;
  rep.implication_asserted = premises && rep.direct_equal;
  rep.resolution_limited = premises && !rep.direct_equal;
  if (rep.implication_asserted) {
    rep.conclusion = "c = c~ on M0 (by Corollary); extrapolated from a 2-D run, the corollaries assume dim >= 3";
  } else if (rep.resolution_limited) {
    rep.conclusion = "not asserted: lens data agree at the sampled probes and h, but the direct check finds |c - c~| = " +
                     std::to_string(rep.direct_max_diff) + " on M0";
  } else if (!rep.hypotheses_hold) {
    rep.conclusion = "not asserted: foliation condition fails";
  } else {
    rep.conclusion = "not asserted: lens data differ or could not be compared";
  }
  return rep;
}

}  // namespace dnlens::analysis
