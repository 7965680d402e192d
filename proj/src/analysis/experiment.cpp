#include "dnlens/analysis/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "dnlens/error.hpp"
#include "dnlens/probe/coherent.hpp"
#include "dnlens/probe/resolution.hpp"
#include "dnlens/wave/discrepancy.hpp"
#include "dnlens/wave/solver.hpp"

namespace dnlens::analysis {

using geometry::BoundaryPhase;
using geometry::LensRecord;
using geometry::Metric;

std::string to_string(OracleClass c) {
  switch (c) {
    case OracleClass::agree: return "agree";
    case OracleClass::disagree: return "disagree";
    case OracleClass::gray: return "gray";
    case OracleClass::unknown: return "unknown";
  }
  return "unknown";
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double collar_of(const ExperimentConfig& cfg) {
  return std::min(cfg.speed_a.collar_width(), cfg.speed_b.collar_width());
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> v;
  if (cfg.probes.empty()) v.push_back("probes: at least one probe is required");
  for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
    const BoundaryPhase& p = cfg.probes[i];
    if (!std::isfinite(p.s) || !std::isfinite(p.mu)) {
      v.push_back("probes[" + std::to_string(i) + "]: s and mu must be finite");
    } else if (std::abs(p.mu) > geometry::kGlancingLimit) {
      v.push_back("probes[" + std::to_string(i) + "]: glancing, |mu| = " + num(std::abs(p.mu)) +
                  " exceeds the glancing margin " + num(geometry::kGlancingLimit));
    }
    if (p.side != geometry::Side::inward) v.push_back("probes[" + std::to_string(i) + "]: must be inward");
  }
  if (cfg.h_schedule.empty()) v.push_back("h: schedule is empty");
  for (std::size_t j = 0; j < cfg.h_schedule.size(); ++j) {
    const double h = cfg.h_schedule[j];
    if (!(h > 0.0) || !std::isfinite(h)) v.push_back("h[" + std::to_string(j) + "]: must be positive");
    if (j > 0 && !(h < cfg.h_schedule[j - 1])) {
      v.push_back("h: schedule not strictly decreasing at index " + std::to_string(j));
    }
  }
  if (!(cfg.eps > 0.0)) v.push_back("eps: must be positive");
  if (!cfg.h_schedule.empty() && cfg.h_schedule.front() > 0.0 && cfg.eps > 0.0) {
    const double need = 16.0 * std::sqrt(cfg.h_schedule.front());
    if (cfg.eps < need) {
      v.push_back("eps: probe support leaks outside (eps/4, 3eps/4): eps = " + num(cfg.eps) +
                  " < 16 sqrt(h_max) = " + num(need));
    }
  }
  if (cfg.T && !(*cfg.T > cfg.eps)) v.push_back("T: must exceed eps");
  if (cfg.c_lo && !(*cfg.c_lo > 0.0)) v.push_back("c_lo: must be positive");
  if (cfg.c_hi && cfg.c_lo && !(*cfg.c_hi >= *cfg.c_lo)) v.push_back("c_hi: must be >= c_lo");
  if (cfg.c_hi && !(*cfg.c_hi > 0.0)) v.push_back("c_hi: must be positive");
  if (!(collar_of(cfg) > 0.0)) v.push_back("collar: both speeds need a positive collar width");
  if (cfg.jobs == 0) v.push_back("jobs: must be at least 1");
  if (!(cfg.max_length > 0.0)) v.push_back("max_length: must be positive");

  const auto ra = geometry::sample_range(cfg.speed_a, cfg.domain), rb = geometry::sample_range(cfg.speed_b, cfg.domain);
  if (!(ra.min > 0.0) || !(rb.min > 0.0) || !std::isfinite(ra.max) || !std::isfinite(rb.max)) {
    v.push_back("speed: must be positive and finite on the domain");
  } else if (!cfg.dx.empty()) {
    if (cfg.dx.size() != cfg.h_schedule.size()) {
      v.push_back("dx: needs one entry per h");
    } else {
      const probe::SpeedBounds b = probe::speed_bounds(cfg.speed_a, cfg.speed_b, cfg.domain);
      for (std::size_t j = 0; j < cfg.dx.size(); ++j) {
        if (!(cfg.h_schedule[j] > 0.0)) continue;
        const double rule = probe::resolution_rule(cfg.h_schedule[j], b.c_min, b.c_max, b.c_collar).dx;
        if (!(cfg.dx[j] > 0.0) || cfg.dx[j] > rule * (1.0 + 1e-12)) {
          v.push_back("dx[" + std::to_string(j) + "]: " + num(cfg.dx[j]) + " violates the resolution rule dx <= " +
                      num(rule) + " for h = " + num(cfg.h_schedule[j]));
        }
      }
    }
  }
  return v;
}

namespace {

struct Shared {
  const ExperimentConfig* cfg = nullptr;
  probe::SpeedBounds bounds;
  double c_lo = 0.0, c_hi = 0.0;
  double collar_width = 0.0;
  double collar_defect = 0.0;
  bool same_speed = false;
};

void run_row(const Shared& sh, std::size_t probe_index, std::size_t h_index, ExperimentRow& row) {
  const ExperimentConfig& cfg = *sh.cfg;
  const geometry::Domain& dom = cfg.domain;
  const BoundaryPhase rho = cfg.probes[probe_index];
  const double h = cfg.h_schedule[h_index];
  const double eps = cfg.eps;
  row.probe = rho;
  row.h = h;

  geometry::IntegratorOptions io;
  io.max_length = cfg.max_length;
  row.oracle_a = geometry::lens_map(Metric{dom, cfg.speed_a}, rho, io);
  row.oracle_b = geometry::lens_map(Metric{dom, cfg.speed_b}, rho, io);
  const LensRecord& la = *row.oracle_a;
  const LensRecord& lb = *row.oracle_b;
  if (la.trapped || lb.trapped) {
    row.oracle_class = OracleClass::unknown;
    row.oracle_delta = la.trapped && lb.trapped ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    row.oracle_delta = std::max({std::abs(la.length - lb.length), dom.arc_distance(la.exit->s, lb.exit->s),
                                 std::abs(la.exit->mu - lb.exit->mu)});
    const double r = std::sqrt(h);
    row.oracle_class = row.oracle_delta <= r         ? OracleClass::agree
                       : row.oracle_delta > 3.0 * r ? OracleClass::disagree
                                                    : OracleClass::gray;
  }

  if (sh.collar_defect > 1e-12) {
    throw PreconditionError("probe violating collar-equality precondition: speeds differ by " +
                            num(sh.collar_defect) + " on the collar of width " + num(sh.collar_width));
  }

  probe::Resolution res = cfg.dx.empty()
                              ? probe::resolution_rule(h, sh.bounds.c_min, sh.bounds.c_max, sh.bounds.c_collar)
                              : probe::resolution_with_step(h, cfg.dx[h_index], sh.bounds.c_max);
  row.dx = res.dx;

  if (cfg.T) {
    row.T = *cfg.T;
  } else {
    const LensRecord ref = geometry::lens_map(
        Metric{dom, geometry::SpeedField::constant(sh.bounds.c_collar)}, rho, io);
    row.T = probe::time_bracket(ref.length, eps, h, sh.c_lo, sh.c_hi).T;
  }
  if (!la.trapped && !lb.trapped) {
    const double earliest = 0.5 * eps + std::min(la.length, lb.length);
    if (earliest <= eps) {
      row.status = "arrival before eps";
      row.message = "expected arrival at " + num(earliest) + " falls in the excluded window (0, eps)";
      return;
    }
    const double arrival = 0.5 * eps + std::max(la.length, lb.length) + 3.0 * std::sqrt(h);
    if (row.T < arrival) {
      row.status = "T too small";
      row.message = "T = " + num(row.T) + " is before the expected arrival eps/2 + max l + 3 sqrt(h) = " + num(arrival);
      return;
    }
  }

  const wave::WaveGrid grid = wave::WaveGrid::build(dom, res.dx, res.dt, row.T, res.trace_stride);
  const wave::BoundarySignal f = probe::boundary_probe(dom, cfg.speed_a, rho, h, eps, grid.layout());
  row.f_h1 = f.h1_norm();
  const wave::DNTrace ta = wave::solve_ibvp(cfg.speed_a, f, grid);
  const wave::DNTrace tb = sh.same_speed ? ta : wave::solve_ibvp(cfg.speed_b, f, grid);

  try {
    row.estimate_a = probe::extract_from_trace(ta, dom, cfg.speed_a, rho, h, eps, row.T);
  } catch (const Error& e) {
    row.extract_error_a = e.what();
  }
  try {
    row.estimate_b = probe::extract_from_trace(tb, dom, cfg.speed_b, rho, h, eps, row.T);
  } catch (const Error& e) {
    row.extract_error_b = e.what();
  }

  const probe::Probe p = probe::make_probe(dom, cfg.speed_a, rho, h, eps);
  const double side_end = probe::probe_side_window_end(eps, p.params.rc, sh.collar_width, sh.bounds.c_max, grid.dx());
  row.separation = probe::separation_from_traces(ta, tb, eps, row.T, side_end);
  row.discrepancy = std::sqrt(row.separation->diff2) / row.f_h1;
}

}  // namespace

SeparationReport run_separation_experiment(const ExperimentConfig& cfg) {
  const std::vector<std::string> violations = validate(cfg);
  if (!violations.empty()) {
    std::string msg = "invalid experiment config:";
    for (const std::string& s : violations) msg += "\n  " + s;
    throw PreconditionError(msg);
  }
  Shared sh;
  sh.cfg = &cfg;
  sh.bounds = probe::speed_bounds(cfg.speed_a, cfg.speed_b, cfg.domain);
  sh.c_lo = cfg.c_lo.value_or(sh.bounds.c_min);
  sh.c_hi = cfg.c_hi.value_or(sh.bounds.c_max);
  sh.collar_width = collar_of(cfg);
  sh.collar_defect = geometry::collar_defect(cfg.speed_a, cfg.speed_b, cfg.domain, sh.collar_width);
  sh.same_speed = cfg.speed_a.hash() == cfg.speed_b.hash();

  SeparationReport report;
  report.eps = cfg.eps;
  report.collar_width = sh.collar_width;
  report.collar_defect = sh.collar_defect;
  const std::size_t nh = cfg.h_schedule.size();
  const std::size_t n = cfg.probes.size() * nh;
  report.rows.resize(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      ExperimentRow& row = report.rows[k];
      row.probe = cfg.probes[k / nh];
      row.h = cfg.h_schedule[k % nh];
      try {
        run_row(sh, k / nh, k % nh, row);
      } catch (const Error& e) {
        row.status = "error";
        row.message = e.what();
      } catch (const std::exception& e) {
        row.status = "error";
        row.message = e.what();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(n)));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  summarize(report, cfg.h_schedule);
  return report;
}

void summarize(SeparationReport& report, const std::vector<double>& h_schedule) {
  report.lower_bound.clear();
  report.discrepancy.clear();
  report.lower_bound_change.reset();
  report.claim = {};
  const std::size_t nh = h_schedule.size();
  for (std::size_t j = 0; j < nh; ++j) {
    LowerBoundRow lb;
    lb.h = h_schedule[j];
    lb.min_norm = std::numeric_limits<double>::infinity();
    DiscrepancyRow dr;
    dr.h = h_schedule[j];
    for (std::size_t k = j; k < report.rows.size(); k += nh) {
      const ExperimentRow& r = report.rows[k];
      if (!r.ok() || !r.separation) continue;
      const double a = std::sqrt(r.separation->normA2);
      if (a < lb.min_norm) {
        lb.min_norm = a;
        lb.argmin = k / nh;
      }
      ++lb.probes;
      dr.max_ratio = std::max(dr.max_ratio, r.discrepancy);
    }
    if (lb.probes == 0) lb.min_norm = std::numeric_limits<double>::quiet_NaN();
    report.lower_bound.push_back(lb);
    report.discrepancy.push_back(dr);
  }
  if (nh >= 2) {
    const LowerBoundRow& p = report.lower_bound[nh - 2];
    const LowerBoundRow& q = report.lower_bound[nh - 1];
    if (p.probes > 0 && q.probes > 0) report.lower_bound_change = std::abs(q.min_norm - p.min_norm) / p.min_norm;
  }
  if (nh == 0) return;
  for (std::size_t k = nh - 1; k < report.rows.size(); k += nh) {
    const ExperimentRow& r = report.rows[k];
    if (!r.ok() || !r.separation) continue;
    if (r.oracle_class != OracleClass::agree && r.oracle_class != OracleClass::disagree) continue;
    ++report.claim.rows_checked;
    const bool distinct = r.separation->verdict == probe::Verdict::lens_distinct;
    const bool expected = r.oracle_class == OracleClass::disagree;
    if (distinct != expected) {
      report.claim.holds = false;
      report.claim.counterexamples.push_back(k);
    }
  }
}

}  // namespace dnlens::analysis
