#include "dnlens/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dnlens/error.hpp"
#include "dnlens/hash.hpp"
#include "dnlens/probe/resolution.hpp"
#include "dnlens/wave/grid.hpp"

namespace dnlens::cli {

using nlohmann::json;

std::string to_string(Command c) {
  switch (c) {
    case Command::lens: return "lens";
    case Command::wave: return "wave";
    case Command::probe: return "probe";
    case Command::theorem31: return "theorem31";
    case Command::corollary: return "corollary";
    case Command::shiftdemo: return "shiftdemo";
  }
  return "lens";
}

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::lens, Command::wave, Command::probe, Command::theorem31, Command::corollary,
                    Command::shiftdemo}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Collects violations while reading; every accessor tolerates missing or mistyped values.
class Reader {
 public:
  std::vector<std::string> v;

  void fail(const std::string& path, const std::string& msg) { v.push_back(path + ": " + msg); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "must be an object");
    return false;
  }

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
        fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
      }
    }
  }

  std::optional<double> number(const json& obj, const char* key, const std::string& path, bool required) {
    const std::string p = path.empty() ? std::string(key) : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    const json& x = obj.at(key);
    if (!x.is_number()) {
      fail(p, "must be a number");
      return std::nullopt;
    }
    const double d = x.get<double>();
    if (!std::isfinite(d)) {
      fail(p, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<double> positive(const json& obj, const char* key, const std::string& path, bool required) {
    auto d = number(obj, key, path, required);
    if (d && !(*d > 0.0)) {
      fail((path.empty() ? std::string(key) : path + "." + key), "must be positive, got " + num(*d));
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::size_t> count(const json& obj, const char* key, const std::string& path, bool required) {
    const std::string p = path.empty() ? std::string(key) : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    const json& x = obj.at(key);
    if (!x.is_number_integer() || x.get<long long>() < 1) {
      fail(p, "must be a positive integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(x.get<long long>());
  }

  std::optional<std::string> string(const json& obj, const char* key, const std::string& path, bool required) {
    const std::string p = path.empty() ? std::string(key) : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    if (!obj.at(key).is_string()) {
      fail(p, "must be a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const char* key, const std::string& path,
                                             bool required) {
    const std::string p = path.empty() ? std::string(key) : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "required");
      return std::nullopt;
    }
    const json& x = obj.at(key);
    if (!x.is_array() || x.empty()) {
      fail(p, "must be a non-empty array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const json& e : x) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        fail(p, "must be a non-empty array of numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<Expr> expr(const json& obj, const char* key, const std::string& path, bool required) {
    auto s = string(obj, key, path, required);
    if (!s) return std::nullopt;
    try {
      return Expr::parse(*s);
    } catch (const Error& e) {
      fail(path.empty() ? std::string(key) : path + "." + key, e.what());
      return std::nullopt;
    }
  }
};

std::optional<geometry::Domain> read_domain(Reader& r, const json& j) {
  if (!j.contains("domain")) return geometry::Domain::disk(1.0);
  const json& d = j.at("domain");
  if (!r.object(d, "domain")) return std::nullopt;
  const auto kind = r.string(d, "kind", "domain", true);
  if (!kind) return std::nullopt;
  try {
    if (*kind == "disk") {
      r.keys(d, "domain", {"kind", "radius"});
      const auto R = r.positive(d, "radius", "domain", false);
      return geometry::Domain::disk(R.value_or(1.0));
    }
    if (*kind == "rectangle") {
      r.keys(d, "domain", {"kind", "width", "height"});
      const auto a = r.positive(d, "width", "domain", true), b = r.positive(d, "height", "domain", true);
      if (!a || !b) return std::nullopt;
      return geometry::Domain::rectangle(*a, *b);
    }
    if (*kind == "level_set") {
      r.keys(d, "domain", {"kind", "phi", "interior"});
      const auto phi = r.expr(d, "phi", "domain", true);
      const auto p = r.numbers(d, "interior", "domain", true);
      if (p && p->size() != 2) r.fail("domain.interior", "must have two coordinates");
      if (!phi || !p || p->size() != 2) return std::nullopt;
      return geometry::Domain::level_set(*phi, Vec2{(*p)[0], (*p)[1]});
    }
    r.fail("domain.kind", "must be disk, rectangle or level_set, got '" + *kind + "'");
  } catch (const Error& e) {
    r.fail("domain", e.what());
  }
  return std::nullopt;
}

std::optional<geometry::SpeedField> read_speed(Reader& r, const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) r.fail(key, "required");
    return required ? std::nullopt : std::optional<geometry::SpeedField>(geometry::SpeedField());
  }
  const json& s = j.at(key);
  if (s.is_string()) {
    auto e = r.expr(j, key, "", true);
    if (!e) return std::nullopt;
    return geometry::SpeedField(*e);
  }
  if (!r.object(s, key)) return std::nullopt;
  r.keys(s, key, {"rule", "collar"});
  auto e = r.expr(s, "rule", key, true);
  auto w = r.number(s, "collar", key, false);
  if (w && *w < 0.0) {
    r.fail(std::string(key) + ".collar", "must be nonnegative");
    return std::nullopt;
  }
  if (!e) return std::nullopt;
  return geometry::SpeedField(*e, w.value_or(0.0));
}

void check_speed(Reader& r, const geometry::SpeedField& c, const geometry::Domain& d, const char* key) {
  const auto range = geometry::sample_range(c, d, 101);
  if (!(range.min > 0.0) || !std::isfinite(range.max)) {
    r.fail(key, "speed must be positive and finite on the domain (min " + num(range.min) + ")");
  }
}

void check_phase(Reader& r, const geometry::BoundaryPhase& p, const std::string& path) {
  if (std::abs(p.mu) > geometry::kGlancingLimit) {
    r.fail(path, "glancing, |mu| = " + num(std::abs(p.mu)) + " exceeds the glancing margin " +
                     num(geometry::kGlancingLimit));
  }
}

std::vector<geometry::BoundaryPhase> read_probes(Reader& r, const json& j, const geometry::Domain& d) {
  std::vector<geometry::BoundaryPhase> out;
  if (!j.contains("probes")) {
    r.fail("probes", "required");
    return out;
  }
  const json& p = j.at("probes");
  if (p.is_array()) {
    if (p.empty()) r.fail("probes", "must not be empty");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string path = "probes[" + std::to_string(i) + "]";
      if (!r.object(p[i], path)) continue;
      r.keys(p[i], path, {"s", "mu"});
      const auto s = r.number(p[i], "s", path, true), mu = r.number(p[i], "mu", path, true);
      if (!s || !mu) continue;
      out.push_back({*s, *mu, geometry::Side::inward});
      check_phase(r, out.back(), path);
    }
    return out;
  }
  if (!r.object(p, "probes")) return out;
  const auto n = r.count(p, "count", "probes", true);
  if (p.contains("mu_min") || p.contains("mu_max")) {
    r.keys(p, "probes", {"count", "s", "mu_min", "mu_max"});
    const auto s = r.number(p, "s", "probes", false);
    const auto a = r.number(p, "mu_min", "probes", true), b = r.number(p, "mu_max", "probes", true);
    if (!n || !a || !b) return out;
    if (*a > *b) r.fail("probes", "mu_min must not exceed mu_max");
    for (std::size_t i = 0; i < *n; ++i) {
      const double t = *n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(*n - 1);
      out.push_back({s.value_or(0.0), *a + t * (*b - *a), geometry::Side::inward});
    }
    check_phase(r, {0.0, std::max(std::abs(*a), std::abs(*b)), geometry::Side::inward}, "probes");
    return out;
  }
  r.keys(p, "probes", {"count", "mu"});
  const auto mu = r.number(p, "mu", "probes", false);
  if (!n) return out;
  out = geometry::even_probes(d, *n, mu.value_or(0.0));
  check_phase(r, out.front(), "probes");
  return out;
}

}  // namespace

Parsed parse_config(const json& j) {
  Reader r;
  Parsed out;
  if (!j.is_object()) {
    out.violations.push_back("config must be a JSON object");
    return out;
  }
  Config cfg;
  cfg.hash = fnv1a(j.dump());
  const auto name = r.string(j, "command", "", true);
  std::optional<Command> cmd;
  if (name) {
    cmd = parse_command(*name);
    if (!cmd) r.fail("command", "unknown command '" + *name + "'");
  }
  if (!cmd) {
    out.violations = std::move(r.v);
    return out;
  }
  cfg.command = *cmd;

  switch (*cmd) {
    case Command::lens: r.keys(j, "", {"command", "domain", "speed", "probes", "lens", "output", "jobs"}); break;
    case Command::wave: r.keys(j, "", {"command", "domain", "speed", "wave", "output", "jobs"}); break;
    case Command::probe: r.keys(j, "", {"command", "domain", "speed", "probes", "probe", "output", "jobs"}); break;
    case Command::theorem31:
      r.keys(j, "", {"command", "domain", "speed", "speed_b", "probes", "experiment", "output", "jobs"});
      break;
    case Command::corollary:
      r.keys(j, "", {"command", "domain", "speed", "speed_b", "probes", "experiment", "foliation", "output", "jobs"});
      break;
    case Command::shiftdemo: r.keys(j, "", {"command", "shift", "output", "jobs"}); break;
  }
  if (auto o = r.string(j, "output", "", false)) cfg.output = *o;
  if (auto n = r.count(j, "jobs", "", false)) cfg.jobs = static_cast<unsigned>(*n);

  auto section = [&](const char* key) -> const json* {
    if (!j.contains(key)) {
      r.fail(key, "required");
      return nullptr;
    }
    return r.object(j.at(key), key) ? &j.at(key) : nullptr;
  };

  if (*cmd == Command::shiftdemo) {
    if (const json* s = section("shift")) {
      r.keys(*s, "shift", {"c1", "c2", "widths", "modulated"});
      const auto c1 = r.number(*s, "c1", "shift", true), c2 = r.number(*s, "c2", "shift", true);
      const auto w = r.numbers(*s, "widths", "shift", true);
      if (c1) cfg.shift.c1 = *c1;
      if (c2) cfg.shift.c2 = *c2;
      if (w) {
        cfg.shift.widths = *w;
        if (std::any_of(w->begin(), w->end(), [](double x) { return !(x > 0.0); })) {
          r.fail("shift.widths", "widths must be positive");
        }
      }
      cfg.shift.modes = {false, true};
      if (s->contains("modulated")) {
        const json& m = s->at("modulated");
        if (m.is_boolean()) {
          cfg.shift.modes = {m.get<bool>()};
        } else if (!(m.is_string() && m.get<std::string>() == "both")) {
          r.fail("shift.modulated", "must be true, false or \"both\"");
        }
      }
      const bool mod = std::find(cfg.shift.modes.begin(), cfg.shift.modes.end(), true) != cfg.shift.modes.end();
      if (c1 && c2 && *c1 == *c2 && mod) r.fail("shift", "modulation frequency pi/(c1 - c2) needs c1 != c2");
    }
    out.violations = std::move(r.v);
    if (out.violations.empty()) out.config = std::move(cfg);
    return out;
  }

  const auto domain = read_domain(r, j);
  if (domain) cfg.domain = *domain;
  const auto speed = read_speed(r, j, "speed", false);
  if (speed) cfg.speed = *speed;
  if (domain && speed) check_speed(r, cfg.speed, cfg.domain, "speed");
  const bool pair = *cmd == Command::theorem31 || *cmd == Command::corollary;
  bool speed_b_ok = false;
  if (pair) {
    const auto b = read_speed(r, j, "speed_b", true);
    speed_b_ok = b.has_value();
    if (b) cfg.speed_b = *b;
    if (domain && b) check_speed(r, cfg.speed_b, cfg.domain, "speed_b");
  }
  if (*cmd != Command::wave && domain) cfg.probes = read_probes(r, j, cfg.domain);

  switch (*cmd) {
    case Command::lens: {
      if (j.contains("lens") && r.object(j.at("lens"), "lens")) {
        const json& l = j.at("lens");
        r.keys(l, "lens", {"step", "max_length"});
        if (auto s = r.positive(l, "step", "lens", false)) cfg.lens.step = *s;
        if (auto m = r.positive(l, "max_length", "lens", false)) cfg.lens.max_length = *m;
      }
      break;
    }
    case Command::wave: {
      const json* w = section("wave");
      if (!w) break;
      r.keys(*w, "wave", {"dx", "dt", "T", "trace_stride", "signal"});
      const auto dx = r.positive(*w, "dx", "wave", true);
      const auto dt = r.positive(*w, "dt", "wave", false);
      const auto T = r.positive(*w, "T", "wave", true);
      const auto stride = r.count(*w, "trace_stride", "wave", false);
      if (dx) cfg.wave.dx = *dx;
      cfg.wave.dt = dt;
      if (T) cfg.wave.T = *T;
      cfg.wave.trace_stride = stride.value_or(1);
      bool signal_ok = false;
      if (!w->contains("signal")) {
        r.fail("wave.signal", "required");
      } else if (r.object(w->at("signal"), "wave.signal")) {
        const json& s = w->at("signal");
        r.keys(s, "wave.signal", {"s", "mu", "h", "eps"});
        const auto s0 = r.number(s, "s", "wave.signal", true), mu = r.number(s, "mu", "wave.signal", true);
        const auto h = r.positive(s, "h", "wave.signal", true), eps = r.positive(s, "eps", "wave.signal", true);
        if (s0 && mu && h && eps) {
          cfg.wave.rho = {*s0, *mu, geometry::Side::inward};
          cfg.wave.h = *h;
          cfg.wave.eps = *eps;
          check_phase(r, cfg.wave.rho, "wave.signal");
          signal_ok = true;
          if (*eps < 16.0 * std::sqrt(*h)) {
            r.fail("wave.signal", "probe support leaks outside (eps/4, 3eps/4): eps < 16 sqrt(h) = " +
                                      num(16.0 * std::sqrt(*h)));
          }
          if (T && *T < *eps) r.fail("wave.T", "must be at least eps");
        }
      }
      if (domain && speed && dx && T && signal_ok) {
        try {
          const double cmax = geometry::sample_range(cfg.speed, cfg.domain, 101).max;
          const double step = dt.value_or(0.95 * 0.5 * *dx / cmax);
          const wave::WaveGrid grid = wave::WaveGrid::build(cfg.domain, *dx, step, *T, cfg.wave.trace_stride);
          const double bound = grid.cfl_bound(cfg.speed);
          if (step > bound * (1.0 + 1e-12)) {
            r.fail("wave.dt", "CFL violation: dt = " + num(step) + " exceeds bound 0.5*dx/max(c) = " + num(bound));
          }
          const double res = 2.0 * std::numbers::pi * cfg.wave.h / 10.0;
          if (step * static_cast<double>(cfg.wave.trace_stride) > res || grid.max_boundary_spacing() > res) {
            r.fail("wave", "trace sampling does not resolve 2 pi h / 10 = " + num(res));
          }
        } catch (const Error& e) {
          r.fail("wave", e.what());
        }
      }
      break;
    }
    case Command::probe: {
      const json* p = section("probe");
      if (!p) break;
      r.keys(*p, "probe", {"h", "eps", "T", "c_lo", "c_hi"});
      const auto h = r.positive(*p, "h", "probe", true), eps = r.positive(*p, "eps", "probe", true);
      if (h) cfg.probe.h = *h;
      if (eps) cfg.probe.eps = *eps;
      cfg.probe.T = r.positive(*p, "T", "probe", false);
      cfg.probe.c_lo = r.positive(*p, "c_lo", "probe", false);
      cfg.probe.c_hi = r.positive(*p, "c_hi", "probe", false);
      if (h && eps && *eps < 16.0 * std::sqrt(*h)) {
        r.fail("probe.eps", "probe support leaks outside (eps/4, 3eps/4): eps < 16 sqrt(h) = " +
                                num(16.0 * std::sqrt(*h)));
      }
      if (eps && cfg.probe.T && !(*cfg.probe.T > *eps)) r.fail("probe.T", "must exceed eps");
      if (cfg.probe.c_lo && cfg.probe.c_hi && *cfg.probe.c_hi < *cfg.probe.c_lo) r.fail("probe.c_hi", "must be >= c_lo");
      break;
    }
    case Command::theorem31:
    case Command::corollary: {
      const json* e = section("experiment");
      if (e) {
        r.keys(*e, "experiment", {"h", "eps", "T", "c_lo", "c_hi", "dx", "max_length"});
        analysis::ExperimentConfig& x = cfg.experiment;
        if (auto h = r.numbers(*e, "h", "experiment", true)) x.h_schedule = *h;
        if (auto eps = r.positive(*e, "eps", "experiment", true)) x.eps = *eps;
        x.T = r.positive(*e, "T", "experiment", false);
        x.c_lo = r.positive(*e, "c_lo", "experiment", false);
        x.c_hi = r.positive(*e, "c_hi", "experiment", false);
        if (auto dx = r.numbers(*e, "dx", "experiment", false)) x.dx = *dx;
        if (auto m = r.positive(*e, "max_length", "experiment", false)) x.max_length = *m;
        x.domain = cfg.domain;
        x.speed_a = cfg.speed;
        x.speed_b = cfg.speed_b;
        x.probes = cfg.probes;
        x.jobs = std::max(1u, cfg.jobs);
        x.output_dir = cfg.output;
        if (domain && speed && speed_b_ok) {
          for (const std::string& s : analysis::validate(x)) {
            // Probe-level problems are already reported against "probes".
            if (s.rfind("probes", 0) == 0) continue;
            r.fail("experiment", s);
          }
        }
      }
      if (*cmd == Command::corollary && domain && speed && speed_b_ok) {
        const double w = std::min(cfg.speed.collar_width(), cfg.speed_b.collar_width());
        if (w > 0.0) {
          const double d = geometry::collar_defect(cfg.speed, cfg.speed_b, cfg.domain, w);
          if (d > 1e-12) r.fail("speed_b", "differs from speed by " + num(d) + " on the collar of width " + num(w));
        }
      }
      if (*cmd == Command::corollary) {
        const json* f = section("foliation");
        if (f) {
          r.keys(*f, "foliation", {"rho", "S", "m0", "levels", "lines", "lattice"});
          auto rho = r.expr(*f, "rho", "foliation", true);
          auto S = r.positive(*f, "S", "foliation", true);
          auto m0 = r.expr(*f, "m0", "foliation", true);
          if (rho && S && m0) cfg.foliation = {*rho, *S, *m0};
          if (auto n = r.count(*f, "levels", "foliation", false)) cfg.sampling.levels = *n;
          if (auto n = r.count(*f, "lines", "foliation", false)) cfg.sampling.lines = *n;
          if (auto n = r.count(*f, "lattice", "foliation", false)) cfg.sampling.lattice = *n;
        }
      }
      break;
    }
    case Command::shiftdemo: break;
  }

  out.violations = std::move(r.v);
  if (out.violations.empty()) out.config = std::move(cfg);
  return out;
}

Parsed load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    Parsed p;
    p.violations.push_back(path.string() + ": malformed JSON: " + e.what());
    return p;
  }
  return parse_config(j);
}

}  // namespace dnlens::cli
