#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnlens/analysis/experiment.hpp"
#include "dnlens/geometry/domain.hpp"
#include "dnlens/geometry/foliation.hpp"
#include "dnlens/geometry/geodesic.hpp"
#include "dnlens/geometry/speed.hpp"

namespace dnlens::cli {

// JSON config schema. Every object rejects keys it does not list.
//
//   command    "lens" | "wave" | "probe" | "theorem31" | "corollary" | "shiftdemo"   (required)
//   domain     {"kind": "disk", "radius": R}
//              {"kind": "rectangle", "width": a, "height": b}
//              {"kind": "level_set", "phi": expr, "interior": [x, y]}            default unit disk
//   speed      expr string or {"rule": expr, "collar": w}                         default "1"
//   speed_b    as speed                                        theorem31, corollary
//   probes     [{"s": s, "mu": mu}, ...]
//              {"count": n, "mu": mu}                          n entries evenly spaced in s
//              {"count": n, "s": s, "mu_min": a, "mu_max": b}  a fan of n momenta at one point
//   lens       {"step": 1e-3, "max_length": 50}                                   lens
//   wave       {"dx", "dt" (optional), "T", "trace_stride" (1),
//               "signal": {"s", "mu", "h", "eps"}}                                wave
//   probe      {"h", "eps", "T" (optional), "c_lo", "c_hi" (optional)}            probe
//   experiment {"h": [..], "eps", "T", "c_lo", "c_hi", "dx": [..], "max_length"}  theorem31, corollary
//   foliation  {"rho": expr, "S": S, "m0": expr,
//               "levels", "lines", "lattice" (optional sampling)}                  corollary
//   shift      {"c1", "c2", "widths": [..], "modulated": true | false | "both"}    shiftdemo
//   output     output directory (relative paths resolve under DNLENS_OUTPUT_ROOT when set)
//   jobs       worker threads, >= 1
enum class Command { lens, wave, probe, theorem31, corollary, shiftdemo };

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& name);

struct LensSection {
  double step = 1e-3;
  double max_length = 50.0;
};

struct WaveSection {
  double dx = 0.0;
  std::optional<double> dt;
  double T = 0.0;
  std::size_t trace_stride = 1;
  geometry::BoundaryPhase rho;
  double h = 0.0;
  double eps = 0.0;
};

struct ProbeSection {
  double h = 0.0;
  double eps = 0.0;
  std::optional<double> T, c_lo, c_hi;
};

struct ShiftSection {
  double c1 = 0.0, c2 = 0.0;
  std::vector<double> widths;
  std::vector<bool> modes;  // modulation off and/or on
};

struct Config {
  Command command = Command::lens;
  geometry::Domain domain = geometry::Domain::disk(1.0);
  geometry::SpeedField speed;
  geometry::SpeedField speed_b;
  std::vector<geometry::BoundaryPhase> probes;
  LensSection lens;
  WaveSection wave;
  ProbeSection probe;
  analysis::ExperimentConfig experiment;  // theorem31 and corollary
  geometry::FoliationSpec foliation;
  geometry::FoliationSampling sampling;
  ShiftSection shift;
  std::string output;
  unsigned jobs = 0;  // 0: one per hardware thread
  std::uint64_t hash = 0;  // FNV-1a of the canonical JSON dump
};

struct Parsed {
  std::optional<Config> config;      // set iff violations is empty
  std::vector<std::string> violations;
};

// Full validation: schema, value ranges and the preconditions the runner would
// otherwise hit first (glancing probes, h ordering, CFL). run() accepts exactly
// the configs for which this returns no violations.
Parsed parse_config(const nlohmann::json& j);

// Throws Error naming the path when the file cannot be read. Malformed JSON is a violation.
Parsed load_config(const std::filesystem::path& path);

}  // namespace dnlens::cli
