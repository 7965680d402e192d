#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dnlens/geometry/domain.hpp"
#include "dnlens/geometry/lens.hpp"
#include "dnlens/geometry/speed.hpp"
#include "dnlens/probe/extract.hpp"
#include "dnlens/probe/separation.hpp"

namespace dnlens::analysis {

struct ExperimentConfig {
  geometry::Domain domain = geometry::Domain::disk(1.0);
  geometry::SpeedField speed_a;  // collar widths are carried by the fields
  geometry::SpeedField speed_b;
  std::vector<geometry::BoundaryPhase> probes;
  std::vector<double> h_schedule;  // strictly decreasing
  double eps = 0.0;
  std::optional<double> T;  // fixed window end; otherwise bracketed per probe
  // Interior speed bounds for the T bracket; unset values are sampled.
  std::optional<double> c_lo, c_hi;
  // Grid step per h; empty selects the resolution rule. Entries may only refine it.
  std::vector<double> dx;
  std::string output_dir;
  unsigned jobs = 1;
  double max_length = 50.0;  // trapping budget of the geodesic oracle
};

// All violated invariants, empty when the config is runnable. Row-level
// conditions (T too small for one probe) are not violations; they are flagged
// in the report.
std::vector<std::string> validate(const ExperimentConfig& cfg);

// Oracle separation of the two lens records, max(|dl|, arc distance of exits, |dmu'|).
// Rows with Delta <= sqrt(h) must not be lens-distinct; rows with Delta > 3 sqrt(h)
// must be. Rows in between carry no claim.
enum class OracleClass { agree, disagree, gray, unknown };
std::string to_string(OracleClass c);

struct ExperimentRow {
  geometry::BoundaryPhase probe;
  double h = 0.0;
  double T = 0.0;
  std::string status = "ok";  // "ok", "T too small", "arrival before eps", or "error"
  std::string message;        // diagnostic for non-ok rows and extraction failures

  std::optional<geometry::LensRecord> oracle_a, oracle_b;
  double oracle_delta = 0.0;
  OracleClass oracle_class = OracleClass::unknown;

  std::optional<probe::LensEstimate> estimate_a, estimate_b;
  std::string extract_error_a, extract_error_b;

  std::optional<probe::SeparationVerdict> separation;
  double f_h1 = 0.0;          // ||f_rho||_H1
  double discrepancy = 0.0;   // ||(Lambda_A - Lambda_B) f|| / ||f||_H1 on (eps, T) x dM
  double dx = 0.0;

  bool ok() const { return status == "ok"; }
};

struct LowerBoundRow {
  double h = 0.0;
  double min_norm = 0.0;  // min over probes of ||Lambda_A f_rho||, the 2 delta_0 estimate
  std::size_t argmin = 0;  // probe index
  std::size_t probes = 0;  // rows that contributed
};

struct DiscrepancyRow {
  double h = 0.0;
  double max_ratio = 0.0;  // lower bound on ||Lambda_A - Lambda_B|| from the sampled probes
};

struct ClaimCheck {
  bool holds = true;
  std::size_t rows_checked = 0;
  std::vector<std::size_t> counterexamples;  // row indices
};

struct SeparationReport {
  std::vector<ExperimentRow> rows;  // probe-major, then h in schedule order
  std::vector<LowerBoundRow> lower_bound;
  std::optional<double> lower_bound_change;  // relative change across the two smallest h
  std::vector<DiscrepancyRow> discrepancy;
  ClaimCheck claim;
  double collar_defect = 0.0;
  double collar_width = 0.0;
  double eps = 0.0;
};

// Runs every (probe, h) pair. Failures are recorded per row; the report is always produced.
// Throws PreconditionError only when validate() reports violations.
SeparationReport run_separation_experiment(const ExperimentConfig& cfg);

// Builds the lower-bound, discrepancy and claim tables from the rows.
void summarize(SeparationReport& report, const std::vector<double>& h_schedule);

}  // namespace dnlens::analysis
