#include "dnlens/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "dnlens/analysis/corollary.hpp"
#include "dnlens/analysis/report.hpp"
#include "dnlens/analysis/shift_demo.hpp"
#include "dnlens/error.hpp"
#include "dnlens/hash.hpp"
#include "dnlens/probe/coherent.hpp"
#include "dnlens/probe/extract.hpp"
#include "dnlens/probe/resolution.hpp"
#include "dnlens/wave/io.hpp"
#include "dnlens/wave/solver.hpp"

#ifndef DNLENS_VERSION
#define DNLENS_VERSION "0.0.0"
#endif

namespace dnlens::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tool_version() { return DNLENS_VERSION; }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalAbort*>(&e)) return kExitNumerical;
  if (dynamic_cast<const PreconditionError*>(&e)) return kExitPrecondition;
  return kExitFailure;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
  if (!os) throw Error("write failed for " + p.string());
  return p;
}

unsigned effective_jobs(const Config& cfg, const RunOptions& opt) {
  unsigned j = cfg.jobs > 0 ? cfg.jobs : std::max(1u, std::thread::hardware_concurrency());
  if (opt.jobs > 0) j = std::min(j, opt.jobs);
  return std::max(1u, j);
}

using Outputs = std::vector<fs::path>;

Outputs run_lens(const Config& cfg, const fs::path& dir, unsigned jobs, std::ostream& out) {
  geometry::IntegratorOptions io;
  io.step = cfg.lens.step;
  io.max_length = cfg.lens.max_length;
  const geometry::LensSweep sweep = geometry::lens_sweep({cfg.domain, cfg.speed}, cfg.probes, io, jobs);
  std::ostringstream csv;
  geometry::write_lens_csv(csv, sweep);
  json s;
  s["schema_version"] = analysis::kReportSchemaVersion;
  s["rows"] = sweep.records.size();
  s["T0_estimate"] = sweep.T0_estimate;
  s["trapped"] = sweep.trapped;
  json errors = json::array();
  for (std::size_t i = 0; i < sweep.errors.size(); ++i) {
    if (!sweep.errors[i].empty()) errors.push_back({{"row", i}, {"error", sweep.errors[i]}});
  }
  s["errors"] = errors;
  out << "lens: " << sweep.records.size() << " rows, T0 estimate " << sweep.T0_estimate << ", "
      << sweep.trapped.size() << " trapped\n";
  return {write_text(dir / "lens.csv", csv.str()), write_text(dir / "lens_summary.json", s.dump(2) + "\n")};
}

Outputs run_wave(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const WaveSection& w = cfg.wave;
  const double cmax = geometry::sample_range(cfg.speed, cfg.domain, 101).max;
  const double dt = w.dt.value_or(0.95 * 0.5 * w.dx / cmax);
  const wave::WaveGrid grid = wave::WaveGrid::build(cfg.domain, w.dx, dt, w.T, w.trace_stride);
  const wave::BoundarySignal f = probe::boundary_probe(cfg.domain, cfg.speed, w.rho, w.h, w.eps, grid.layout());
  const wave::DNTrace trace = wave::solve_ibvp(cfg.speed, f, grid);
  const auto dets = probe::locate_wavefront(trace, w.eps, w.h);

  Outputs files;
  wave::write_signal((dir / "signal").string(), f, grid.dx());
  wave::write_trace((dir / "trace").string(), trace);
  for (const char* base : {"signal", "trace"}) {
    files.push_back(dir / (std::string(base) + ".bin"));
    files.push_back(dir / (std::string(base) + ".json"));
  }
  files.push_back(write_text(dir / "detections.json", probe::detections_to_json(dets)));
  json s;
  s["schema_version"] = analysis::kReportSchemaVersion;
  s["dx"] = grid.dx();
  s["dt"] = grid.dt();
  s["steps"] = grid.nsteps();
  s["T"] = grid.T();
  s["trace_rows"] = trace.nt();
  s["trace_columns"] = trace.ns();
  s["signal_h1"] = f.h1_norm();
  s["trace_l2_after_eps"] = std::sqrt(trace.l2_squared(w.eps, trace.t_end()));
  s["detections"] = dets.size();
  files.push_back(write_text(dir / "wave_summary.json", s.dump(2) + "\n"));
  out << "wave: " << grid.nsteps() << " steps, " << dets.size() << " detections\n";
  return files;
}

Outputs run_probe(const Config& cfg, const fs::path& dir, std::ostream& out) {
  const ProbeSection& p = cfg.probe;
  const probe::SpeedBounds b = probe::speed_bounds(cfg.speed, cfg.speed, cfg.domain);
  const probe::Resolution res = probe::resolution_rule(p.h, b.c_min, b.c_max, b.c_collar);
  std::ostringstream csv;
  csv.precision(17);
  csv << "s_in,mu_in,s_out,mu_out,length,ambiguous,oracle_s_out,oracle_mu_out,oracle_length,status\n";
  json dets = json::array();
  std::size_t ok = 0;
  for (const geometry::BoundaryPhase& rho : cfg.probes) {
    csv << rho.s << ',' << rho.mu << ',';
    json entry{{"s_in", rho.s}, {"mu_in", rho.mu}};
    std::string status = "ok";
    std::optional<geometry::LensRecord> oracle;
    try {
      oracle = geometry::lens_map({cfg.domain, cfg.speed}, rho);
      double T = 0.0;
      if (p.T) {
        T = *p.T;
      } else {
        const geometry::LensRecord ref =
            geometry::lens_map({cfg.domain, geometry::SpeedField::constant(b.c_collar)}, rho);
        T = probe::time_bracket(ref.length, p.eps, p.h, p.c_lo.value_or(b.c_min), p.c_hi.value_or(b.c_max)).T;
      }
      const wave::WaveGrid grid = wave::WaveGrid::build(cfg.domain, res.dx, res.dt, T, res.trace_stride);
      const probe::LensEstimate est = probe::extract_lens(cfg.speed, rho, p.h, p.eps, grid, T);
      csv << est.record.exit->s << ',' << est.record.exit->mu << ',' << est.record.length << ','
          << (est.ambiguous ? 1 : 0) << ',';
      entry["T"] = T;
      entry["detections"] = json::parse(probe::detections_to_json(est.detections));
      ++ok;
    } catch (const NumericalAbort&) {
      throw;
    } catch (const Error& e) {
      status = std::string("error: ") + e.what();
      csv << "nan,nan,nan,0,";
      entry["error"] = e.what();
    }
    if (oracle && !oracle->trapped) {
      csv << oracle->exit->s << ',' << oracle->exit->mu << ',' << oracle->length;
    } else {
      csv << "nan,nan," << (oracle ? "inf" : "nan");
    }
    std::string quoted = status;
    if (quoted.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : quoted) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      quoted = q + "\"";
    }
    csv << ',' << quoted << '\n';
    dets.push_back(entry);
  }
  json s{{"schema_version", analysis::kReportSchemaVersion}, {"probes", dets}};
  out << "probe: " << ok << " of " << cfg.probes.size() << " probes extracted\n";
  return {write_text(dir / "extract.csv", csv.str()), write_text(dir / "detections.json", s.dump(2) + "\n")};
}

Outputs run_shift(const Config& cfg, const fs::path& dir, std::ostream& out) {
  std::vector<analysis::ShiftRow> rows;
  for (bool m : cfg.shift.modes) {
    const auto r = analysis::shift_norm_demo(cfg.shift.c1, cfg.shift.c2, cfg.shift.widths, m);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::ostringstream csv;
  analysis::write_shift_csv(csv, rows);
  out << "shiftdemo: " << rows.size() << " rows\n";
  return {write_text(dir / "shift.csv", csv.str())};
}

}  // namespace

std::string RunManifest::to_json() const {
  json j;
  j["schema_version"] = analysis::kReportSchemaVersion;
  j["command"] = command;
  j["config_path"] = config_path;
  j["config_hash"] = config_hash;
  j["tool_version"] = tool_version;
  j["started"] = started;
  j["finished"] = finished;
  j["exit_status"] = exit_status;
  j["outputs"] = json::array();
  for (const fs::path& p : outputs) j["outputs"].push_back(p.string());
  return j.dump(2) + "\n";
}

fs::path output_directory(const Config& cfg, const RunOptions& opt) {
  fs::path p = !opt.out.empty() ? fs::path(opt.out) : !cfg.output.empty() ? fs::path(cfg.output)
                                                                            : fs::path(to_string(cfg.command));
  if (p.is_relative()) {
    if (const char* root = std::getenv("DNLENS_OUTPUT_ROOT"); root && *root) p = fs::path(root) / p;
  }
  return p;
}

int validate(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  Parsed parsed;
  try {
    parsed = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  if (parsed.violations.empty()) {
    out << config_path.string() << ": valid\n";
    return kExitOk;
  }
  out << config_path.string() << ": " << parsed.violations.size() << " violation(s)\n";
  for (const std::string& v : parsed.violations) out << "  " << v << "\n";
  return kExitPrecondition;
}

int run(const std::string& subcommand, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = subcommand;
  manifest.config_path = opt.config_path.string();
  manifest.tool_version = tool_version();
  manifest.started = utc_now();

  Parsed parsed;
  try {
    parsed = load_config(opt.config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  if (!parsed.violations.empty()) {
    err << "error: invalid config " << opt.config_path.string() << "\n";
    for (const std::string& v : parsed.violations) err << "  " << v << "\n";
    return kExitPrecondition;
  }
  Config cfg = std::move(*parsed.config);
  if (to_string(cfg.command) != subcommand) {
    err << "error: config is for '" << to_string(cfg.command) << "', not '" << subcommand << "'\n";
    return kExitPrecondition;
  }
  manifest.config_hash = hex64(cfg.hash);
  const unsigned jobs = effective_jobs(cfg, opt);
  cfg.experiment.jobs = jobs;

  int status = kExitOk;
  fs::path dir;
  try {
    dir = output_directory(cfg, opt);
    fs::create_directories(dir);
    switch (cfg.command) {
      case Command::lens: manifest.outputs = run_lens(cfg, dir, jobs, out); break;
      case Command::wave: manifest.outputs = run_wave(cfg, dir, out); break;
      case Command::probe: manifest.outputs = run_probe(cfg, dir, out); break;
      case Command::theorem31: {
        const analysis::SeparationReport rep = analysis::run_separation_experiment(cfg.experiment);
        manifest.outputs = analysis::write_separation_bundle(rep, dir);
        out << "theorem31: " << rep.rows.size() << " rows, claim " << (rep.claim.holds ? "holds" : "fails") << "\n";
        break;
      }
      case Command::corollary: {
        analysis::CorollaryOptions co;
        co.sampling = cfg.sampling;
        const analysis::CorollaryReport rep = analysis::corollary_report(cfg.experiment, cfg.foliation, co);
        manifest.outputs = analysis::write_corollary_bundle(rep, dir);
        out << "corollary: " << rep.conclusion << "\n";
        break;
      }
      case Command::shiftdemo: manifest.outputs = run_shift(cfg, dir, out); break;
    }
  } catch (const std::exception& e) {
    status = exit_code_for(e);
    err << (status == kExitNumerical ? "numerical abort: " : status == kExitPrecondition ? "precondition failure: " : "error: ")
        << e.what() << "\n";
  }

  manifest.exit_status = status;
  manifest.finished = utc_now();
  if (!dir.empty() && fs::is_directory(dir)) {
    try {
      write_text(dir / "manifest.json", manifest.to_json());
      if (status == kExitOk) out << "manifest: " << (dir / "manifest.json").string() << "\n";
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      if (status == kExitOk) status = kExitFailure;
    }
  }
  return status;
}

}  // namespace dnlens::cli
