// Acceptance run: one PASS/FAIL line per criterion A1..A8. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dnlens/analysis/corollary.hpp"
#include "dnlens/analysis/experiment.hpp"
#include "dnlens/analysis/shift_demo.hpp"
#include "dnlens/error.hpp"
#include "dnlens/geometry/foliation.hpp"
#include "dnlens/geometry/lens.hpp"
#include "dnlens/probe/coherent.hpp"
#include "dnlens/probe/extract.hpp"
#include "dnlens/probe/resolution.hpp"
#include "dnlens/wave/solver.hpp"
#include "geodesic_oracle.hpp"

using namespace dnlens;
using geometry::BoundaryPhase;
using geometry::Domain;
using geometry::Side;
using geometry::SpeedField;

namespace {

constexpr double kPi = std::numbers::pi;

// A1
constexpr double kA1Tol = 1e-6;
constexpr double kA1Seconds = 1.0;
// A2
constexpr double kA2Drift = 1e-8;
// A3
constexpr double kA3OrderLo = 1.7, kA3OrderHi = 2.3;
constexpr double kA3Energy = 1e-3;
// A4
constexpr double kA4Tol = 0.05;
constexpr double kA4Relative = 0.05;
constexpr double kA4Seconds = 120.0;
// A5
constexpr double kA5Shift = 0.2;
constexpr double kA5Distinct = 0.9;
constexpr double kA5Consistent = 0.1;
constexpr double kA5Stable = 0.2;
// A6
constexpr double kA6Sqrt2Tol = 0.01;
constexpr double kA6Reach = 1.9;
// A8
constexpr int kA8Pairs = 20;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

geometry::FoliationSpec disk_foliation(double S) { return {Expr::parse("1 - r"), S, Expr::parse("0.1 - r")}; }

oracle::Speed oracle_speed(const SpeedField& c) {
  return {[c](double x, double y, double& v, double& vx, double& vy) {
    const Dual d = c.eval({x, y});
    v = d.v;
    vx = d.dx;
    vy = d.dy;
  }};
}

// ---------------------------------------------------------------- A1
void a1(Outcome& o) {
  const geometry::Metric m{Domain::disk(1.0), SpeedField{}};
  double worst = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 64; ++i) {
    const double mu = -0.9 + 1.8 * i / 63.0;
    const double s = 2.0 * kPi * i / 64.0 + 0.1;
    const geometry::LensRecord rec = geometry::lens_map(m, {s, mu, Side::inward});
    if (!rec.exit) {
      o.require(false, "probe " + std::to_string(i) + " did not exit");
      continue;
    }
    worst = std::max(worst, std::abs(rec.length - 2.0 * std::sqrt(1.0 - mu * mu)));
    worst = std::max(worst, m.domain.arc_distance(rec.exit->s, s + kPi - 2.0 * std::asin(mu)));
  }
  const double secs = seconds_since(t0);
  o.detail << "64 probes, max error " << worst << ", " << secs << " s";
  o.require(worst < kA1Tol, "error < 1e-6");
  o.require(secs < kA1Seconds, "runtime < 1 s");
}

// ---------------------------------------------------------------- A2
void a2(Outcome& o) {
  const geometry::Metric m{Domain::disk(1.0), SpeedField(Expr::parse("1 + 0.5*exp(-r2/0.1)"))};
  geometry::IntegratorOptions opt;
  opt.record_path = true;
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double mu = -0.85 + 1.7 * i / 15.0;
    const geometry::PhaseState st = geometry::boundary_phase_to_interior(m, {0.3 * i, mu, Side::inward});
    const geometry::GeodesicResult g = geometry::integrate_geodesic(m, st, opt);
    const double J0 = cross(st.x, st.xi);
    double drift = 0.0;
    for (const auto& p : g.path) drift = std::max(drift, std::abs(cross(p.x, p.xi) - J0));
    worst = std::max(worst, std::abs(J0) > 1e-3 ? drift / std::abs(J0) : drift);
  }
  o.detail << "16 geodesics, max relative drift " << worst;
  o.require(worst < kA2Drift, "drift < 1e-8");
}

// ---------------------------------------------------------------- A3
double interior_l2_error(const wave::WaveGrid& g, const wave::WaveSolver& sol,
                         const std::function<double(Vec2)>& exact) {
  double e = 0.0;
  for (const wave::RowRun& run : g.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      const double d = sol.current()[k] - exact(g.node(k));
      e += d * d;
    }
  }
  return std::sqrt(e) * g.dx();
}

double pulse(double tau, double w) {
  const double q = tau / w;
  if (std::abs(q) >= 1.0) return 0.0;
  const double a = 1.0 - q * q;
  return a * a * a * a;
}

void a3(Outcome& o) {
  const double w = std::sqrt(2.0) * kPi;
  auto exact = [w](Vec2 p, double t) { return std::sin(kPi * p.x) * std::sin(kPi * p.y) * std::cos(w * t); };
  std::vector<double> errs;
  for (int n : {16, 32, 64, 128}) {
    const double dx = 1.0 / n;
    const wave::WaveGrid g = wave::WaveGrid::build(Domain::rectangle(1.0, 1.0), dx, 0.5 * dx, 1.0);
    wave::WaveSolver sol(g, SpeedField{});
    sol.set_initial([&](Vec2 p) { return exact(p, 0.0); }, [](Vec2) { return 0.0; });
    while (sol.step() < g.nsteps()) sol.advance();
    errs.push_back(interior_l2_error(g, sol, [&](Vec2 p) { return exact(p, sol.time()); }));
  }
  o.detail << "orders";
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    o.detail << ' ' << order;
    o.require(order >= kA3OrderLo && order <= kA3OrderHi, "order in [1.7, 2.3]");
  }

  // Boundary packet on the disk, then 1000 source-free steps with dt = dx / 4.
  const Domain d = Domain::disk(1.0);
  const SpeedField c(Expr::parse("1 + 0.3*bump(0,0,0.6)"));
  const double dx = 0.02, dt = dx / 4.0;
  const wave::WaveGrid g = wave::WaveGrid::build(d, dx, dt, 0.8 + 1100 * dt);
  wave::WaveSolver sol(g, c);
  sol.set_boundary([&](double t, double s) {
    return pulse(t - 0.4, 0.3) * pulse(d.arc_difference(s, 1.0), 0.5) * std::cos(6.0 * (t - 0.4));
  });
  while (sol.time() < 0.75 + 2 * dt) sol.advance();
  const double e0 = sol.energy();
  double emax = e0, emin = e0;
  for (int i = 0; i < 1000; ++i) {
    sol.advance();
    emax = std::max(emax, sol.energy());
    emin = std::min(emin, sol.energy());
  }
  const double drift = e0 > 0.0 ? (emax - emin) / e0 : std::numeric_limits<double>::infinity();
  o.detail << "; energy drift " << drift << " over 1000 steps";
  o.require(drift < kA3Energy, "energy drift < 1e-3");
}

// ---------------------------------------------------------------- A4
struct Extracted {
  probe::LensEstimate est;
  double seconds = 0.0;
};

Extracted extract(const SpeedField& c, const BoundaryPhase& rho, double h, double eps) {
  const auto t0 = std::chrono::steady_clock::now();
  const Domain d = Domain::disk(1.0);
  const probe::SpeedBounds b = probe::speed_bounds(c, c, d);
  const probe::Resolution res = probe::resolution_rule(h, b.c_min, b.c_max, b.c_collar);
  const geometry::LensRecord ref = geometry::lens_map({d, SpeedField::constant(b.c_collar)}, rho);
  const double T = probe::time_bracket(ref.length, eps, h, b.c_min, b.c_max).T;
  const wave::WaveGrid grid = wave::WaveGrid::build(d, res.dx, res.dt, T, res.trace_stride);
  Extracted out{probe::extract_lens(c, rho, h, eps, grid, T), 0.0};
  out.seconds = seconds_since(t0);
  return out;
}

void a4(Outcome& o) {
  const double h = 0.01, eps = 16.0 * std::sqrt(h) + 0.01;
  const Domain d = Domain::disk(1.0);
  const SpeedField one(Expr::constant(1.0), 0.4);
  double slowest = 0.0;
  o.detail << "disk:";
  for (double mu : {0.0, 0.5, -0.5}) {
    const BoundaryPhase rho{0.5, mu, Side::inward};
    try {
      const Extracted e = extract(one, rho, h, eps);
      const double len_err = std::abs(e.est.record.length - 2.0 * std::sqrt(1.0 - mu * mu));
      const double exit_err = d.arc_distance(e.est.record.exit->s, 0.5 + kPi - 2.0 * std::asin(mu));
      o.detail << " mu " << mu << " (dl " << len_err << ", ds " << exit_err << ")";
      o.require(len_err < kA4Tol && exit_err < kA4Tol, "disk probe within 0.05");
      slowest = std::max(slowest, e.seconds);
    } catch (const std::exception& ex) {
      o.require(false, std::string("disk extraction: ") + ex.what());
    }
  }
  const SpeedField bump(Expr::parse("1 + 0.3*bump(0,0,0.6)"), 0.4);
  const oracle::Speed sp = oracle_speed(bump);
  o.detail << "; bump:";
  for (const BoundaryPhase& rho : {BoundaryPhase{0.5, 0.0, Side::inward}, BoundaryPhase{2.0, 0.4, Side::inward}}) {
    try {
      const geometry::PhaseState st = geometry::boundary_phase_to_interior({d, bump}, rho);
      const oracle::Exit ref = oracle::adaptive_disk(sp, {st.x.x, st.x.y, st.xi.x, st.xi.y}, 1.0, 1e-10);
      o.require(ref.exited, "oracle exit");
      const double s_ref = std::atan2(ref.state[1], ref.state[0]);
      const Extracted e = extract(bump, rho, h, eps);
      const double rel = std::abs(e.est.record.length - ref.length) / ref.length;
      const double exit_err = d.arc_distance(e.est.record.exit->s, s_ref);
      o.detail << " mu " << rho.mu << " (rel dl " << rel << ", ds " << exit_err << ")";
      o.require(rel < kA4Relative && exit_err < kA4Tol, "bump probe within 5% of the geodesic oracle");
      slowest = std::max(slowest, e.seconds);
    } catch (const std::exception& ex) {
      o.require(false, std::string("bump extraction: ") + ex.what());
    }
  }
  o.detail << "; slowest probe " << slowest << " s";
  o.require(slowest < kA4Seconds, "runtime per probe < 2 min");
}

// ---------------------------------------------------------------- A5
void a5(Outcome& o) {
  analysis::ExperimentConfig cfg;
  cfg.speed_a = SpeedField(Expr::parse("1"), 0.4);
  cfg.speed_b = SpeedField(Expr::parse("1 - 0.4*bump(0,0,0.55)"), 0.4);
  const std::vector<double> mus{0.0, 0.3, -0.3, 0.75};
  for (double mu : mus) cfg.probes.push_back({1.0, mu, Side::inward});
  cfg.h_schedule = {0.02, 0.01, 0.005};
  cfg.eps = 2.3;
  cfg.jobs = workers();
  const auto t0 = std::chrono::steady_clock::now();
  const analysis::SeparationReport rep = analysis::run_separation_experiment(cfg);
  const std::size_t nh = cfg.h_schedule.size();
  o.detail << seconds_since(t0) << " s;";

  for (std::size_t p = 0; p < mus.size(); ++p) {
    const bool crossing = std::abs(mus[p]) < 0.55;
    std::vector<double> defects;
    for (std::size_t k = 0; k < nh; ++k) {
      const analysis::ExperimentRow& r = rep.rows[p * nh + k];
      if (!r.separation) {
        o.require(false, "row mu " + std::to_string(mus[p]) + " h " + std::to_string(r.h) + ": " + r.status +
                             " " + r.message);
        continue;
      }
      defects.push_back(r.separation->defect);
    }
    const analysis::ExperimentRow& last = rep.rows[p * nh + nh - 1];
    if (!last.separation) continue;
    const probe::SeparationVerdict& v = *last.separation;
    o.detail << " mu " << mus[p] << ":";
    if (crossing) {
      const double shift = last.oracle_b->length - last.oracle_a->length;
      o.detail << " shift " << shift << " D2/(A+B) " << v.diff2 / (v.normA2 + v.normB2) << " defects";
      for (double x : defects) o.detail << ' ' << x;
      o.require(shift > kA5Shift, "arrival-time shift > 0.2 on crossing probes");
      o.require(v.diff2 >= kA5Distinct * (v.normA2 + v.normB2), "D2 >= 0.9 (A2 + B2) at the smallest h");
      bool shrinking = defects.size() == nh;
      for (std::size_t k = 1; k < defects.size(); ++k) shrinking = shrinking && defects[k] < defects[k - 1];
      o.require(shrinking, "defect shrinking across h");
    } else {
      const double ratio = std::sqrt(v.diff2 / v.normA2);
      o.detail << " |D|/|A| " << ratio;
      o.require(ratio <= kA5Consistent, "non-crossing |D| <= 0.1 |A|");
    }
  }
  const std::size_t nb = rep.lower_bound.size();
  if (nb >= 2) {
    const double a = rep.lower_bound[nb - 2].min_norm, b = rep.lower_bound[nb - 1].min_norm;
    const double change = std::abs(b - a) / a;
    o.detail << " lower bound " << a << " -> " << b << " (change " << change << ")";
    o.require(b > 0.0 && a > 0.0, "lower bound positive");
    o.require(change <= kA5Stable, "lower bound stable within 20%");
  } else {
    o.require(false, "lower bound table");
  }
}

// ---------------------------------------------------------------- A6
void a6(Outcome& o) {
  const std::vector<double> shrinking{0.1, 0.05, 0.025, 0.01};
  const auto un = analysis::shift_norm_demo(0.0, 0.5, shrinking, false);
  o.detail << "unmodulated";
  for (const auto& r : un) o.detail << ' ' << r.ratio;
  o.require(std::abs(un.back().ratio - std::sqrt(2.0)) <= kA6Sqrt2Tol, "sqrt(2) +- 0.01");

  const std::vector<double> widening{0.05, 0.125, 0.25, 0.5, 1.0, 2.0};
  const auto mod = analysis::shift_norm_demo(0.0, 0.5, widening, true);
  o.detail << "; modulated";
  bool monotone = true;
  for (std::size_t i = 0; i < mod.size(); ++i) {
    o.detail << ' ' << mod[i].ratio;
    if (i > 0 && mod[i].ratio < mod[i - 1].ratio) monotone = false;
  }
  o.require(monotone, "modulated sequence non-decreasing");
  o.require(mod.back().ratio >= kA6Reach, "modulated sequence reaches 1.9");
}

// ---------------------------------------------------------------- A7
void a7(Outcome& o) {
  const geometry::FoliationSpec fol = disk_foliation(0.9);
  const geometry::Metric disk{Domain::disk(1.0), SpeedField{}};
  const geometry::FoliationReport ok = geometry::check_foliation(disk, fol);
  o.detail << "disk " << (ok.pass ? "pass" : "fail");
  o.require(ok.pass, "disk radial foliation passes");

  const geometry::Metric guide{Domain::disk(1.0), SpeedField(Expr::parse("1 - 0.6*ring(0.5, 0.01)"))};
  const geometry::FoliationReport bad = geometry::check_foliation(guide, fol);
  const std::size_t nc = bad.count(geometry::ViolationKind::not_strictly_convex);
  double rmin = 1e9, rmax = 0.0;
  for (const auto& v : bad.violations) {
    if (v.kind != geometry::ViolationKind::not_strictly_convex) continue;
    rmin = std::min(rmin, norm(v.location));
    rmax = std::max(rmax, norm(v.location));
  }
  o.detail << "; wave guide " << (bad.pass ? "pass" : "fail") << " with " << nc << " convexity violations at r in ["
           << rmin << ", " << rmax << "]";
  o.require(!bad.pass && nc > 0, "wave guide fails");
  o.require(nc == 0 || (rmin > 0.45 && rmax < 0.65), "violations localized near the ring r = 0.5");

  const geometry::FoliationReport cov = geometry::check_foliation(disk, disk_foliation(0.5));
  const std::size_t ncov = cov.count(geometry::ViolationKind::coverage);
  o.detail << "; S = 0.5 gives " << ncov << " coverage violations";
  o.require(!cov.pass && ncov > 0, "coverage failure detected");
}

// ---------------------------------------------------------------- A8
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void a8(Outcome& o) {
  std::mt19937 rng(314159);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  int refuted = 0, refuted_asserted = 0, identical = 0, identical_withheld = 0, separated = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < kA8Pairs; ++i) {
    const std::string a = "1 + " + fmt(uni(0.05, 0.3)) + "*bump(0,0," + fmt(uni(0.3, 0.55)) + ")";
    std::string b = a;
    const bool same = i % 2 == 0;
    if (!same) {
      const double dist = uni(0.1, 0.3), ang = uni(0.0, 2.0 * kPi);
      const double radius = uni(0.15, 0.58 - dist);
      const double amp = (rng() % 2 ? 1.0 : -1.0) * uni(0.1, 0.3);
      b += " + " + fmt(amp) + "*bump(" + fmt(dist * std::cos(ang)) + "," + fmt(dist * std::sin(ang)) + "," +
           fmt(radius) + ")";
    }
    analysis::ExperimentConfig cfg;
    cfg.speed_a = SpeedField(Expr::parse(a), 0.4);
    cfg.speed_b = SpeedField(Expr::parse(b), 0.4);
    for (double s : {0.0, 2.1, 4.2}) cfg.probes.push_back({s, 0.0, Side::inward});
    cfg.h_schedule = {0.02};
    cfg.eps = 2.3;
    cfg.jobs = workers();
    try {
      const analysis::CorollaryReport rep = analysis::corollary_report(cfg, disk_foliation(0.9));
      if (!rep.direct_equal) {
        ++refuted;
        if (rep.implication_asserted) ++refuted_asserted;
        if (!rep.lens_data_equal) ++separated;
      }
      if (same) {
        ++identical;
        if (!rep.foliation.pass || !rep.implication_asserted) ++identical_withheld;
      }
    } catch (const std::exception& ex) {
      o.require(false, "pair " + std::to_string(i) + ": " + ex.what());
    }
  }
  o.detail << kA8Pairs << " pairs in " << seconds_since(t0) << " s; refuted " << refuted << " (asserted "
           << refuted_asserted << ", lens-separated " << separated << "); identical " << identical << " (withheld "
           << identical_withheld << ")";
  o.require(refuted_asserted == 0, "never asserted when the direct check refutes");
  o.require(identical_withheld == 0, "always asserted for identical speeds with a passing foliation");
  o.require(refuted == kA8Pairs / 2 && identical == kA8Pairs / 2, "both kinds of pair exercised");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
      {"A1 geometry closed form", a1}, {"A2 Clairaut drift", a2},     {"A3 solver convergence", a3},
      {"A4 lens extraction", a4},      {"A5 separation mechanism", a5}, {"A6 shift demo", a6},
      {"A7 foliation checker", a7},    {"A8 report soundness", a8}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed;
}
