#include "dnlens/wave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "dnlens/error.hpp"

namespace dnlens::wave {

WaveSolver::WaveSolver(const WaveGrid& grid, const geometry::SpeedField& speed) : grid_(grid) {
  const std::size_t n = grid.node_count();
  k2_.assign(n, 0.0);
  inv_c2_.assign(n, 0.0);
  const double r = grid.dt() / grid.dx();
  for (const RowRun& run : grid.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      const double c = speed(grid.node(k));
      if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("speed must be positive and finite on the grid");
      k2_[k] = c * c * r * r;
      inv_c2_[k] = 1.0 / (c * c);
    }
  }
  c_boundary_.reserve(grid.stencils().size());
  for (const DnStencil& st : grid.stencils()) c_boundary_.push_back(speed(st.xb));
  prev_.assign(n, 0.0);
  cur_.assign(n, 0.0);
  older_.assign(n, 0.0);
  b_prev_.assign(grid.cuts().size(), 0.0);
  b_cur_.assign(grid.cuts().size(), 0.0);
  boundary_ = [](double, double) { return 0.0; };
}

void WaveSolver::boundary_values(std::vector<double>& bvals, double t) const {
  const auto& cuts = grid_.cuts();
  for (std::size_t c = 0; c < cuts.size(); ++c) bvals[c] = boundary_(t, cuts[c].s);
}

void WaveSolver::set_boundary(BoundaryFunction f) {
  boundary_ = std::move(f);
  boundary_values(b_cur_, time());
  if (step_ > 0) boundary_values(b_prev_, time() - grid_.dt());
}

void WaveSolver::set_initial(const std::function<double(Vec2)>& u0, const std::function<double(Vec2)>& v0,
                             double t0) {
  t0_ = t0;
  step_ = 0;
  std::fill(older_.begin(), older_.end(), 0.0);
  std::fill(prev_.begin(), prev_.end(), 0.0);
  for (const RowRun& run : grid_.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) prev_[k] = u0(grid_.node(k));
  }
  boundary_values(b_prev_, t0);

  const std::size_t nx = grid_.nx();
  const double dt = grid_.dt();
  std::fill(cur_.begin(), cur_.end(), 0.0);
  for (const RowRun& run : grid_.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      const double lap = prev_[k - 1] + prev_[k + 1] + prev_[k - nx] + prev_[k + nx] - 4.0 * prev_[k];
      cur_[k] = prev_[k] + dt * v0(grid_.node(k)) + 0.5 * k2_[k] * lap;
    }
  }
  const auto& cuts = grid_.cuts();
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const std::size_t k = cuts[c].node;
    cur_[k] += 0.5 * k2_[k] * ((b_prev_[c] - prev_[k]) / cuts[c].theta_used + prev_[k]);
  }
  step_ = 1;
  boundary_values(b_cur_, time());
}

void WaveSolver::advance() {
  const std::size_t nx = grid_.nx();
  const double* u = cur_.data();
  const double* p = prev_.data();
  double* out = older_.data();
  const double* k2 = k2_.data();
  for (const RowRun& run : grid_.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      const double lap = u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx] - 4.0 * u[k];
      out[k] = 2.0 * u[k] - p[k] + k2[k] * lap;
    }
  }
  const auto& cuts = grid_.cuts();
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const std::size_t k = cuts[c].node;
    out[k] += k2[k] * ((b_cur_[c] - u[k]) / cuts[c].theta_used + u[k]);
  }
  std::swap(older_, prev_);  // older <- u^{n-1}, prev <- u^{n+1}
  std::swap(prev_, cur_);    // prev <- u^n, cur <- u^{n+1}
  std::swap(b_prev_, b_cur_);
  ++step_;
  boundary_values(b_cur_, time());
}

double WaveSolver::energy() const {
  if (step_ < 2) return 0.0;
  const std::size_t nx = grid_.nx();
  const double dt = grid_.dt(), dx = grid_.dx();
  double kinetic = 0.0, potential = 0.0;
  for (const RowRun& run : grid_.runs()) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      const double v = (cur_[k] - older_[k]) / (2.0 * dt);
      kinetic += v * v * inv_c2_[k];
      if (grid_.interior(k + 1)) {
        const double d = prev_[k + 1] - prev_[k];
        potential += d * d;
      }
      if (grid_.interior(k + nx)) {
        const double d = prev_[k + nx] - prev_[k];
        potential += d * d;
      }
    }
  }
  const auto& cuts = grid_.cuts();
  for (std::size_t c = 0; c < cuts.size(); ++c) {
    const double d = b_prev_[c] - prev_[cuts[c].node];
    potential += d * d / cuts[c].theta_used;
  }
  return kinetic * dx * dx + potential;
}

double WaveSolver::tap_value(const Tap& tap, double t) const {
  return tap.exterior ? boundary_(t, tap.s_exterior) : cur_[tap.node];
}

void WaveSolver::normal_derivative(std::vector<double>& out) const {
  const auto& st = grid_.stencils();
  out.resize(st.size());
  const double t = time();
  for (std::size_t j = 0; j < st.size(); ++j) {
    double u1 = 0.0, u2 = 0.0;
    for (const Tap& tp : st[j].near) u1 += tp.weight * tap_value(tp, t);
    for (const Tap& tp : st[j].far) u2 += tp.weight * tap_value(tp, t);
    const double fb = boundary_(t, st[j].s);
    out[j] = c_boundary_[j] * (3.0 * fb - 4.0 * u1 + u2) / (2.0 * st[j].depth);
  }
}

double WaveSolver::interpolate(Vec2 p) const {
  const double h = grid_.dx();
  const double fx = (p.x - grid_.origin().x) / h, fy = (p.y - grid_.origin().y) / h;
  if (fx < 0.0 || fy < 0.0 || fx > static_cast<double>(grid_.nx() - 1) || fy > static_cast<double>(grid_.ny() - 1)) {
    return 0.0;
  }
  const auto i = std::min(static_cast<std::size_t>(fx), grid_.nx() - 2);
  const auto j = std::min(static_cast<std::size_t>(fy), grid_.ny() - 2);
  const double u = fx - static_cast<double>(i), v = fy - static_cast<double>(j);
  const std::size_t k = j * grid_.nx() + i;
  return (1 - u) * (1 - v) * cur_[k] + u * (1 - v) * cur_[k + 1] + (1 - u) * v * cur_[k + grid_.nx()] +
         u * v * cur_[k + grid_.nx() + 1];
}

DNTrace solve_ibvp(const geometry::SpeedField& speed, const BoundarySignal& f, const WaveGrid& grid,
                   const SolveOptions& opt) {
  grid.check_cfl(speed);
  const SpaceTimeSamples layout = grid.layout();
  if (!f.same_layout(layout) || f.s() != layout.s()) {
    throw PreconditionError("boundary signal layout does not match the grid");
  }
  WaveSolver run(grid, speed);
  if (f.has_exact()) {
    run.set_boundary(f.exact());
  } else {
    run.set_boundary([&f](double t, double s) { return f.interpolate(t, s); });
  }

  DNTrace trace(layout.nt(), layout.dt(), layout.s(), layout.perimeter());
  trace.speed_hash = speed.hash();
  trace.dx = grid.dx();
  trace.solver_dt = grid.dt();

  std::vector<double> dn;
  const std::size_t stride = grid.trace_stride();
  const std::size_t check = std::max<std::size_t>(1, opt.nan_check_interval);
  for (std::size_t n = 0;; ++n) {
    if (n % stride == 0) {
      run.normal_derivative(dn);
      std::copy(dn.begin(), dn.end(), trace.row(n / stride));
    }
    if (n % check == 0 || n == grid.nsteps()) {
      double sum = 0.0;
      for (double v : run.current()) sum += v;
      for (double v : dn) sum += v;
      if (!std::isfinite(sum)) throw NumericalAbort("non-finite wave field", n);
    }
    if (n == grid.nsteps()) break;
    run.advance();
    if (opt.observer) opt.observer(run);
  }
  return trace;
}

}  // namespace dnlens::wave
