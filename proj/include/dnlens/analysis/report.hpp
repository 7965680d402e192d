#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnlens/analysis/corollary.hpp"
#include "dnlens/analysis/experiment.hpp"

namespace dnlens::analysis {

inline constexpr int kReportSchemaVersion = 1;

// s_in,mu_in,h,normA2,normB2,diff2,defect,verdict
// Rows that did not run carry nan norms and their status as the verdict.
void write_verdict_csv(std::ostream& os, const SeparationReport& r);
void write_separation_markdown(std::ostream& os, const SeparationReport& r);
std::string separation_json(const SeparationReport& r);

void write_corollary_markdown(std::ostream& os, const CorollaryReport& r);
std::string corollary_json(const CorollaryReport& r);

// Writes <stem>.md, <stem>.csv and <stem>.json under dir; returns the paths written.
std::vector<std::filesystem::path> write_separation_bundle(const SeparationReport& r, const std::filesystem::path& dir,
                                                          const std::string& stem = "separation");
std::vector<std::filesystem::path> write_corollary_bundle(const CorollaryReport& r, const std::filesystem::path& dir,
                                                          const std::string& stem = "corollary");

}  // namespace dnlens::analysis
