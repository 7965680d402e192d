#include "dnlens/analysis/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dnlens/error.hpp"

namespace dnlens::analysis {

using nlohmann::json;

namespace {

json lens_json(const std::optional<geometry::LensRecord>& r) {
  if (!r) return nullptr;
  json j;
  j["trapped"] = r->trapped;
  j["length"] = r->trapped ? json(nullptr) : json(r->length);
  if (r->exit) {
    j["s_out"] = r->exit->s;
    j["mu_out"] = r->exit->mu;
  }
  return j;
}

json estimate_json(const std::optional<probe::LensEstimate>& e, const std::string& error) {
  if (!e) return json{{"error", error}};
  json j = lens_json(e->record);
  j["ambiguous"] = e->ambiguous;
  j["detections"] = e->detections.size();
  if (!e->detections.empty()) j["amplitude"] = e->detections.front().amplitude;
  return j;
}

json row_json(const ExperimentRow& r) {
  json j;
  j["s_in"] = r.probe.s;
  j["mu_in"] = r.probe.mu;
  j["h"] = r.h;
  j["T"] = r.T;
  j["dx"] = r.dx;
  j["status"] = r.status;
  if (!r.message.empty()) j["message"] = r.message;
  j["oracle_a"] = lens_json(r.oracle_a);
  j["oracle_b"] = lens_json(r.oracle_b);
  j["oracle_delta"] = std::isfinite(r.oracle_delta) ? json(r.oracle_delta) : json(nullptr);
  j["oracle_class"] = to_string(r.oracle_class);
  if (r.ok()) {
    j["estimate_a"] = estimate_json(r.estimate_a, r.extract_error_a);
    j["estimate_b"] = estimate_json(r.estimate_b, r.extract_error_b);
  }
  if (r.separation) {
    const probe::SeparationVerdict& v = *r.separation;
    j["normA2"] = v.normA2;
    j["normB2"] = v.normB2;
    j["diff2"] = v.diff2;
    j["defect"] = v.defect;
    j["probe_side_diff"] = std::isfinite(v.probe_side_diff) ? json(v.probe_side_diff) : json(nullptr);
    j["probe_side_end"] = v.probe_side_end;
    j["verdict"] = probe::to_string(v.verdict);
    j["f_h1"] = r.f_h1;
    j["discrepancy"] = r.discrepancy;
  }
  return j;
}

json separation_object(const SeparationReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["eps"] = r.eps;
  j["collar_width"] = r.collar_width;
  j["collar_defect"] = r.collar_defect;
  j["rows"] = json::array();
  for (const ExperimentRow& row : r.rows) j["rows"].push_back(row_json(row));
  j["lower_bound"] = json::array();
  for (const LowerBoundRow& lb : r.lower_bound) {
    j["lower_bound"].push_back({{"h", lb.h},
                                {"min_norm", std::isfinite(lb.min_norm) ? json(lb.min_norm) : json(nullptr)},
                                {"argmin_probe", lb.argmin},
                                {"probes", lb.probes}});
  }
  j["lower_bound_change"] = r.lower_bound_change ? json(*r.lower_bound_change) : json(nullptr);
  j["discrepancy_lower_bound"] = json::array();
  for (const DiscrepancyRow& d : r.discrepancy) {
    j["discrepancy_lower_bound"].push_back({{"h", d.h}, {"max_ratio", d.max_ratio}});
  }
  j["claim"] = {{"holds", r.claim.holds},
                {"rows_checked", r.claim.rows_checked},
                {"counterexamples", r.claim.counterexamples}};
  return j;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::filesystem::path write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
  if (!os) throw Error("write failed for " + p.string());
  return p;
}

}  // namespace

void write_verdict_csv(std::ostream& os, const SeparationReport& r) {
  const auto old = os.precision(17);
  os << "s_in,mu_in,h,normA2,normB2,diff2,defect,verdict\n";
  for (const ExperimentRow& row : r.rows) {
    os << row.probe.s << ',' << row.probe.mu << ',' << row.h << ',';
    if (row.separation) {
      const probe::SeparationVerdict& v = *row.separation;
      os << v.normA2 << ',' << v.normB2 << ',' << v.diff2 << ',' << v.defect << ',' << probe::to_string(v.verdict);
    } else {
      os << "nan,nan,nan,nan," << row.status;
    }
    os << '\n';
  }
  os.precision(old);
}

void write_separation_markdown(std::ostream& os, const SeparationReport& r) {
  os << "# Separation experiment\n\n";
  os << "eps = " << fmt(r.eps) << ", collar width " << fmt(r.collar_width) << ", collar defect "
     << fmt(r.collar_defect) << ".\n\n";
  os << "| s_in | mu_in | h | T | l_A | l_B | oracle | normA2 | normB2 | diff2 | defect | verdict |\n";
  os << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const ExperimentRow& row : r.rows) {
    auto len = [](const std::optional<geometry::LensRecord>& l) {
      return !l ? std::string("-") : l->trapped ? std::string("trapped") : fmt(l->length);
    };
    os << "| " << fmt(row.probe.s) << " | " << fmt(row.probe.mu) << " | " << fmt(row.h) << " | " << fmt(row.T)
       << " | " << len(row.oracle_a) << " | " << len(row.oracle_b) << " | " << to_string(row.oracle_class) << " | ";
    if (row.separation) {
      const probe::SeparationVerdict& v = *row.separation;
      os << fmt(v.normA2) << " | " << fmt(v.normB2) << " | " << fmt(v.diff2) << " | " << fmt(v.defect) << " | "
         << probe::to_string(v.verdict) << " |\n";
    } else {
      os << "- | - | - | - | " << row.status << " |\n";
    }
  }
  bool notes = false;
  for (const ExperimentRow& row : r.rows) {
    std::string msg = row.message;
    if (msg.empty() && row.ok() && !row.extract_error_a.empty()) msg = "extraction A: " + row.extract_error_a;
    if (msg.empty() && row.ok() && !row.extract_error_b.empty()) msg = "extraction B: " + row.extract_error_b;
    if (msg.empty()) continue;
    if (!notes) os << "\nRow notes:\n\n";
    notes = true;
    os << "- s_in " << fmt(row.probe.s) << ", mu_in " << fmt(row.probe.mu) << ", h " << fmt(row.h) << ": " << msg
       << "\n";
  }
  os << "\n## Lower bound min ||L_A f_rho|| over the probe set\n\n| h | min norm | probe | rows |\n|---|---|---|---|\n";
  for (const LowerBoundRow& lb : r.lower_bound) {
    os << "| " << fmt(lb.h) << " | " << fmt(lb.min_norm) << " | " << lb.argmin << " | " << lb.probes << " |\n";
  }
  if (r.lower_bound_change) os << "\nRelative change across the two smallest h: " << fmt(*r.lower_bound_change) << "\n";
  os << "\n## Discrepancy lower bound ||(L_A - L_B) f|| / ||f||_H1\n\n| h | max ratio |\n|---|---|\n";
  for (const DiscrepancyRow& d : r.discrepancy) os << "| " << fmt(d.h) << " | " << fmt(d.max_ratio) << " |\n";
  os << "\nThis is a lower bound on the operator norm from finitely many probes.\n";
  os << "\n## Claim check at the smallest h\n\n";
  os << (r.claim.holds ? "Holds" : "Fails") << ": lens-distinct exactly where the oracles disagree by more than "
     << "3 sqrt(h), never where they agree within sqrt(h); " << r.claim.rows_checked << " rows checked";
  if (!r.claim.counterexamples.empty()) {
    os << ", counterexample rows:";
    for (std::size_t k : r.claim.counterexamples) os << ' ' << k;
  }
  os << ".\n";
}

std::string separation_json(const SeparationReport& r) { return separation_object(r).dump(2) + "\n"; }

void write_corollary_markdown(std::ostream& os, const CorollaryReport& r) {
  os << "# Corollary report\n\n";
  os << "Conclusion: " << r.conclusion << "\n\n";
  os << "- foliation: " << (r.foliation.pass ? "pass" : "fail") << " (" << r.foliation.violations.size()
     << " violations, " << r.foliation.points_sampled << " points)\n";
  os << "- collar defect: " << fmt(r.collar_defect) << "\n";
  os << "- lens data equal at the smallest h: " << (r.lens_data_equal ? "yes" : "no") << "\n";
  os << "- direct check: max |c - c~| on M0 = " << fmt(r.direct_max_diff) << " over " << r.direct_points
     << " points\n";
  os << "- implication asserted: " << (r.implication_asserted ? "yes" : "no") << "\n";
  if (r.resolution_limited) os << "- resolution limited: the probes did not separate speeds that differ on M0\n";
  if (r.dimension_gap) {
    os << "- dimension gap: the corollaries are stated for dim >= 3; this 2-D run only illustrates the mechanism\n";
  }
  if (!r.counterexample_rows.empty()) {
    os << "\nCounterexample rows (lens mismatch):";
    for (std::size_t k : r.counterexample_rows) os << ' ' << k;
    os << "\n";
  }
  for (const geometry::Violation& v : r.foliation.violations) {
    os << (&v == &r.foliation.violations.front() ? "\nFoliation violations:\n\n" : "") << "- " << to_string(v.kind)
       << " at (" << fmt(v.location.x) << ", " << fmt(v.location.y) << "), level " << fmt(v.level) << ", value "
       << fmt(v.value) << "\n";
  }
  os << "\n";
  write_separation_markdown(os, r.experiment);
}

std::string corollary_json(const CorollaryReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["conclusion"] = r.conclusion;
  j["hypotheses_hold"] = r.hypotheses_hold;
  j["lens_data_equal"] = r.lens_data_equal;
  j["implication_asserted"] = r.implication_asserted;
  j["resolution_limited"] = r.resolution_limited;
  j["dimension_gap"] = r.dimension_gap;
  j["collar_defect"] = r.collar_defect;
  j["direct_max_diff"] = r.direct_max_diff;
  j["direct_points"] = r.direct_points;
  j["direct_equal"] = r.direct_equal;
  j["counterexample_rows"] = r.counterexample_rows;
  j["foliation"] = json::parse(r.foliation.to_json());
  j["experiment"] = separation_object(r.experiment);
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_separation_bundle(const SeparationReport& r, const std::filesystem::path& dir,
                                                          const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ostringstream md, csv;
  write_separation_markdown(md, r);
  write_verdict_csv(csv, r);
  return {write_file(dir / (stem + ".md"), md.str()), write_file(dir / (stem + ".csv"), csv.str()),
          write_file(dir / (stem + ".json"), separation_json(r))};
}

std::vector<std::filesystem::path> write_corollary_bundle(const CorollaryReport& r, const std::filesystem::path& dir,
                                                          const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ostringstream md, csv;
  write_corollary_markdown(md, r);
  write_verdict_csv(csv, r.experiment);
  return {write_file(dir / (stem + ".md"), md.str()), write_file(dir / (stem + ".csv"), csv.str()),
          write_file(dir / (stem + ".json"), corollary_json(r))};
}

}  // namespace dnlens::analysis
