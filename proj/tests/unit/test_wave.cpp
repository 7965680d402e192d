#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dnlens/error.hpp"
#include "dnlens/geometry/lens.hpp"
#include "dnlens/wave/discrepancy.hpp"
#include "dnlens/wave/io.hpp"
#include "dnlens/wave/solver.hpp"

using namespace dnlens;
using namespace dnlens::wave;
using geometry::Domain;
using geometry::SpeedField;

namespace {

constexpr double kPi = std::numbers::pi;

// Smooth compact pulse in time, C^2.
double pulse(double tau, double w) {
  const double q = tau / w;
  if (std::abs(q) >= 1.0) return 0.0;
  const double a = 1.0 - q * q;
  return a * a * a * a;
}

double dpulse(double tau, double w) {
  const double q = tau / w;
  if (std::abs(q) >= 1.0) return 0.0;
  const double a = 1.0 - q * q;
  return -8.0 * q * a * a * a / w;
}

// Packet on the disk boundary centered at (t0, s0), support |t - t0| < wt, |s - s0| < ws.
BoundaryFunction packet(const Domain& d, double t0, double s0, double wt, double ws, double k) {
  return [=](double t, double s) {
    const double ds = d.arc_difference(s, s0);
    return pulse(t - t0, wt) * pulse(ds, ws) * std::cos(k * (t - t0));
  };
}

double interior_l2_error(const WaveGrid& g, const WaveSolver& sol, const std::function<double(Vec2)>& exact) {
  double e = 0.0;
  for (const RowRun& run : g.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      const double d = sol.current()[k] - exact(g.node(k));
      e += d * d;
    }
  }
  return std::sqrt(e) * g.dx();
}

}  // namespace

TEST_CASE("grid structure") {
  const WaveGrid disk = WaveGrid::build(Domain::disk(1.0), 0.02, 0.01, 1.0, 4);
  CHECK(disk.max_boundary_spacing() <= 1.5 * disk.dx());
  CHECK(disk.nsteps() % 4 == 0);
  CHECK(disk.trace_rows() == disk.nsteps() / 4 + 1);
  for (const CutLink& c : disk.cuts()) {
    CHECK(c.theta > 0.0);
    CHECK(c.theta <= 1.0);
    CHECK(c.theta_used >= kThetaMin);
  }
  const WaveGrid rect = WaveGrid::build(Domain::rectangle(1.0, 0.5), 0.05, 0.02, 0.2);
  CHECK(rect.dx() == doctest::Approx(0.05));
  CHECK(rect.interior_count() == 19 * 9);
  for (const CutLink& c : rect.cuts()) CHECK(c.theta == 1.0);
  CHECK(rect.max_boundary_spacing() == doctest::Approx(0.05));
  CHECK_THROWS_AS(WaveGrid::build(Domain::rectangle(1.0, 0.33), 0.05, 0.02, 0.2), PreconditionError);
}

TEST_CASE("CFL precondition") {
  const WaveGrid g = WaveGrid::build(Domain::disk(1.0), 0.02, 0.011, 0.1);
  const BoundarySignal f = BoundarySignal::sample(g.layout(), [](double, double) { return 0.0; });
  CHECK_THROWS_AS(solve_ibvp(SpeedField::constant(1.0), f, g), CflViolation);
  try {
    solve_ibvp(SpeedField::constant(1.0), f, g);
  } catch (const CflViolation& e) {
    CHECK(std::string(e.what()).find("0.5*dx/max(c)") != std::string::npos);
  }
  const WaveGrid ok = WaveGrid::build(Domain::disk(1.0), 0.02, 0.01, 0.1);
  CHECK_NOTHROW(ok.check_cfl(SpeedField::constant(1.0)));
  CHECK_THROWS_AS(ok.check_cfl(SpeedField::constant(1.1)), CflViolation);
}

TEST_CASE("zero data gives zero trace") {
  const WaveGrid g = WaveGrid::build(Domain::disk(1.0), 0.04, 0.015, 1.0);
  const BoundarySignal f = BoundarySignal::sample(g.layout(), [](double, double) { return 0.0; });
  const DNTrace tr = solve_ibvp(SpeedField(Expr::parse("1 + 0.3*bump(0,0,0.5)")), f, g);
  CHECK(tr.max_abs() == 0.0);
}

TEST_CASE("NaN in the data aborts with the step index") {
  const WaveGrid g = WaveGrid::build(Domain::disk(1.0), 0.04, 0.02, 1.0);
  const BoundarySignal f = BoundarySignal::sample(
      g.layout(), [](double t, double) { return t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; });
  try {
    solve_ibvp(SpeedField{}, f, g);
    FAIL("expected abort");
  } catch (const NumericalAbort& e) {
    CHECK(e.step() >= 25);
    CHECK(e.step() <= 25 + 32);
  }
}

TEST_CASE("manufactured standing mode converges at second order") {
  const double w = std::sqrt(2.0) * kPi;
  auto exact = [w](Vec2 p, double t) { return std::sin(kPi * p.x) * std::sin(kPi * p.y) * std::cos(w * t); };
  std::vector<double> errs;
  for (int n : {16, 32, 64, 128}) {
    const double dx = 1.0 / n;
    const WaveGrid g = WaveGrid::build(Domain::rectangle(1.0, 1.0), dx, 0.5 * dx, 1.0);
    WaveSolver sol(g, SpeedField{});
    sol.set_initial([&](Vec2 p) { return exact(p, 0.0); }, [](Vec2) { return 0.0; });
    while (sol.step() < g.nsteps()) sol.advance();
    errs.push_back(interior_l2_error(g, sol, [&](Vec2 p) { return exact(p, sol.time()); }));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    MESSAGE("standing mode order " << order);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
  }
}

TEST_CASE("embedded boundary: plane pulse through the disk") {
  const Vec2 dir{std::cos(0.3), std::sin(0.3)};
  const double t0 = 1.4, width = 0.35;
  auto exact = [&](Vec2 p, double t) { return pulse(t - dot(p, dir) - t0, width); };
  const Domain d = Domain::disk(1.0);
  std::vector<double> errs, dn_errs;
  for (double dx : {0.04, 0.02, 0.01}) {
    const WaveGrid g = WaveGrid::build(d, dx, 0.5 * dx, 2.4);
    const BoundarySignal f = BoundarySignal::sample(
        g.layout(), [&](double t, double s) { return exact(d.boundary_point(s), t); });
    WaveSolver sol(g, SpeedField{});
    sol.set_boundary(f.exact());
    std::vector<double> dn;
    double dn_err = 0.0;
    while (sol.step() < g.nsteps()) {
      sol.advance();
      sol.normal_derivative(dn);
      for (std::size_t j = 0; j < dn.size(); ++j) {
        const double s = g.boundary_s()[j];
        const double ref = -dpulse(sol.time() - dot(d.boundary_point(s), dir) - t0, width) *
                           dot(dir, d.outward_normal(s));
        dn_err = std::max(dn_err, std::abs(dn[j] - ref));
      }
    }
    errs.push_back(interior_l2_error(g, sol, [&](Vec2 p) { return exact(p, sol.time()); }));
    dn_errs.push_back(dn_err);
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    const double dn_order = std::log2(dn_errs[i] / dn_errs[i + 1]);
    MESSAGE("disk pulse order " << order << ", normal derivative order " << dn_order);
    CHECK(order >= 1.7);
    CHECK(dn_order >= 1.0);
  }
}

TEST_CASE("normal derivative on the rectangle converges") {
  const Vec2 dir{std::cos(0.7), std::sin(0.7)};
  const double t0 = 1.3, width = 0.4;
  auto exact = [&](Vec2 p, double t) { return pulse(t - dot(p, dir) - t0, width); };
  const Domain d = Domain::rectangle(1.0, 1.0);
  std::vector<double> errs;
  for (double dx : {1.0 / 25, 1.0 / 50, 1.0 / 100}) {
    const WaveGrid g = WaveGrid::build(d, dx, 0.5 * dx, 2.6);
    WaveSolver sol(g, SpeedField{});
    sol.set_boundary([&](double t, double s) { return exact(d.boundary_point(s), t); });
    std::vector<double> dn;
    double err = 0.0;
    while (sol.step() < g.nsteps()) {
      sol.advance();
      sol.normal_derivative(dn);
      for (std::size_t j = 0; j < dn.size(); ++j) {
        const double s = g.boundary_s()[j];
        if (std::abs(std::remainder(s, 1.0)) < 1e-9) continue;  // corners have no normal
        const double ref = -dpulse(sol.time() - dot(d.boundary_point(s), dir) - t0, width) *
                           dot(dir, d.outward_normal(s));
        err = std::max(err, std::abs(dn[j] - ref));
      }
    }
    errs.push_back(err);
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    MESSAGE("rectangle normal derivative order " << order);
    CHECK(order >= 1.0);
  }
}

TEST_CASE("solution operator is linear") {
  const Domain d = Domain::disk(1.0);
  const WaveGrid g = WaveGrid::build(d, 0.03, 0.01, 1.5, 2);
  const SpeedField c(Expr::parse("1 + 0.3*bump(0.1,0,0.6)"));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const BoundarySignal f = BoundarySignal::sample(g.layout(), packet(d, 0.5, 6.0 * (U(rng) + 1.0) / 2.0, 0.3, 0.5, 12.0));
    const BoundarySignal h = BoundarySignal::sample(g.layout(), packet(d, 0.6, 6.0 * (U(rng) + 1.0) / 2.0, 0.35, 0.6, 9.0));
    const double a = U(rng), b = U(rng);
    const DNTrace tf = solve_ibvp(c, f, g), th = solve_ibvp(c, h, g);
    const DNTrace tc = solve_ibvp(c, f.scaled_sum(a, h, b), g);
    double diff = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < tc.data().size(); ++k) {
      const double lin = a * tf.data()[k] + b * th.data()[k];
      diff = std::max(diff, std::abs(tc.data()[k] - lin));
      ref = std::max(ref, std::abs(lin));
    }
    CHECK(diff < 1e-10 * ref);
  }
}

TEST_CASE("energy is conserved after the source turns off") {
  const Domain d = Domain::disk(1.0);
  const SpeedField c(Expr::parse("1 + 0.3*bump(0,0,0.6)"));
  auto drift_for = [&](double dt) {
    const double dx = 0.02;
    const WaveGrid g = WaveGrid::build(d, dx, dt, 0.8 + 1100 * dt);
    WaveSolver sol(g, c);
    sol.set_boundary(packet(d, 0.4, 1.0, 0.3, 0.5, 6.0));
    while (sol.time() < 0.75 + 2 * dt) sol.advance();
    const double e0 = sol.energy();
    double emax = e0, emin = e0;
    for (int i = 0; i < 1000; ++i) {
      sol.advance();
      emax = std::max(emax, sol.energy());
      emin = std::min(emin, sol.energy());
    }
    CHECK(e0 > 0.0);
    return (emax - emin) / e0;
  };
  const double d1 = drift_for(0.005), d2 = drift_for(0.0025);
  MESSAGE("energy drift " << d1 << " " << d2 << " ratio " << d1 / d2);
  CHECK(d1 < 1e-3);
  CHECK(d1 / d2 > 3.0);
  CHECK(d1 / d2 < 5.5);
}

TEST_CASE("finite propagation speed and pre-arrival silence") {
  const Domain d = Domain::disk(1.0);
  const double eps = 0.8, t_on = 0.05;
  const WaveGrid g = WaveGrid::build(d, 0.02, 0.01, 2.6, 2);
  const BoundarySignal f = BoundarySignal::sample(g.layout(), packet(d, eps / 2, 0.0, eps / 2 - t_on, 0.3, 14.0));
  CHECK(f.vanishes_near_zero(2));
  const DNTrace tr = solve_ibvp(SpeedField{}, f, g);
  const double fn = std::sqrt(f.l2_squared());
  // With c = 1 on the disk the distance from the support is the chord to its nearest end.
  // Second-order dispersion smears the front over a width of order (dx^2 t)^(1/3),
  // with an exponentially small precursor ahead of it.
  const double margin = 4.0 * std::cbrt(g.dx() * g.dx() * g.T());
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t j = 0; j < tr.ns(); ++j) {
    const double gap = d.arc_distance(tr.s()[j], 0.0) - 0.3;
    if (gap <= 0.0) continue;
    const double dist = 2.0 * std::sin(0.5 * gap);
    for (std::size_t i = 0; i < tr.nt(); ++i) {
      if (tr.t(i) < t_on + dist - margin) {
        worst = std::max(worst, std::abs(tr.at(i, j)));
        ++checked;
      }
    }
  }
  MESSAGE("pre-arrival max " << worst / fn << " relative, " << checked << " samples");
  CHECK(checked > 1000);
  CHECK(worst < 1e-8 * fn);
}

TEST_CASE("discrepancy statistics") {
  const Domain d = Domain::disk(1.0);
  const WaveGrid g = WaveGrid::build(d, 0.03, 0.015, 2.0, 2);
  const SpeedField one{};
  std::vector<BoundarySignal> probes{BoundarySignal::sample(g.layout(), packet(d, 0.3, 0.0, 0.25, 0.4, 12.0))};
  const DiscrepancyStats same = dn_discrepancy(one, one, probes, g, 0.6, 2.0);
  CHECK(same.max_ratio < 1e-10);
  const DiscrepancyStats diff =
      dn_discrepancy(one, SpeedField(Expr::parse("1 - 0.4*bump(0,0,0.55)")), probes, g, 0.6, 2.0);
  CHECK(diff.max_ratio > 1e-2);
  CHECK_THROWS_AS(dn_discrepancy(one, one, probes, g, 0.5, 9.0), PreconditionError);
}

TEST_CASE("signal bookkeeping and serialization") {
  const Domain d = Domain::disk(1.0);
  const WaveGrid g = WaveGrid::build(d, 0.05, 0.025, 1.0);
  const BoundarySignal f = BoundarySignal::sample(g.layout(), packet(d, 0.5, 1.0, 0.3, 0.5, 10.0));
  CHECK(f.leading_zero_rows() >= 8);
  // h1 norm of a slowly varying product matches the continuum integral.
  const BoundarySignal smooth = BoundarySignal::sample(
      g.layout(), [](double t, double s) { return std::sin(kPi * t) * std::cos(s); });
  const double exact = std::sqrt(kPi * (0.5 + 0.5 * kPi * kPi + 0.5) );
  CHECK(smooth.h1_norm() == doctest::Approx(exact).epsilon(0.03));
  CHECK(f.interpolate(0.51, 1.02) == doctest::Approx(f.value(0.51, 1.02)).epsilon(0.02));

  const auto dir = std::filesystem::temp_directory_path() / "dnlens_io_test";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "sig").string();
  write_signal(base, f, g.dx());
  SampleFileInfo info;
  const SpaceTimeSamples back = read_samples(base, &info);
  CHECK(back.same_layout(f));
  CHECK(back.data() == f.data());
  CHECK(info.kind == "signal");
  write_samples_csv((dir / "sig.csv").string(), f);
  CHECK(std::filesystem::file_size(dir / "sig.csv") > 100);
  std::filesystem::remove_all(dir);
}
