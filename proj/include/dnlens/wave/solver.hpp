#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dnlens/geometry/speed.hpp"
#include "dnlens/wave/grid.hpp"
#include "dnlens/wave/samples.hpp"

namespace dnlens::wave {

// Leapfrog for u_tt = c^2 Lap u with Dirichlet data on the embedded boundary.
//
// Along a grid direction whose neighbor lies outside, the second difference uses
// the boundary value at fraction theta of the step:
//   [(u_b - u_P) / theta - (u_P - u_Q)] / dx^2,   theta clamped below at 0.2.
// The resulting operator is symmetric in the 1/c^2-weighted inner product with
// spectrum in [-14/dx^2, 0], so c dt / dx <= 0.5 is stable.
class WaveSolver {
 public:
  WaveSolver(const WaveGrid& grid, const geometry::SpeedField& speed);

  // Replaces the Dirichlet data; boundary values of the current level are refreshed.
  void set_boundary(BoundaryFunction f);

  // Starts from u(t0) = u0, u_t(t0) = v0 using the Taylor start
  // u^1 = u^0 + dt v^0 + dt^2/2 c^2 L u^0. Default state is zero data at t = 0.
  void set_initial(const std::function<double(Vec2)>& u0, const std::function<double(Vec2)>& v0,
                   double t0 = 0.0);

  void advance();
  std::size_t step() const { return step_; }
  double time() const { return t0_ + static_cast<double>(step_) * grid_.dt(); }

  const std::vector<double>& current() const { return cur_; }
  const std::vector<double>& previous() const { return prev_; }

  // Discrete energy of level n-1 (one behind the current step n), with centered
  // velocity (u^n - u^{n-2}) / (2 dt):
  //   sum (u_t^2 / c^2) dx^2 + sum over edges (du)^2 + sum over cuts (u_b - u_P)^2 / theta.
  // Meaningful once two steps have been taken.
  double energy() const;

  // Outward derivative c(x_b) d_nu u at each boundary sample for the current level.
  void normal_derivative(std::vector<double>& out) const;

  double interpolate(Vec2 p) const;

 private:
  void boundary_values(std::vector<double>& bvals, double t) const;
  double tap_value(const Tap& tap, double t) const;

  const WaveGrid& grid_;
  std::vector<double> k2_;  // (c dt / dx)^2 per node
  std::vector<double> inv_c2_;
  std::vector<double> c_boundary_;  // c at each DN stencil foot
  std::vector<double> prev_, cur_, older_;
  std::vector<double> b_prev_, b_cur_;  // boundary values per cut link
  BoundaryFunction boundary_;
  double t0_ = 0.0;
  std::size_t step_ = 0;
};

struct SolveOptions {
  // Called after every step with the solver (snapshots, energy monitoring).
  std::function<void(const WaveSolver&)> observer;
  std::size_t nan_check_interval = 32;
};

// Zero initial data, Dirichlet data f; returns c d_nu u on the grid's trace layout.
DNTrace solve_ibvp(const geometry::SpeedField& speed, const BoundarySignal& f, const WaveGrid& grid,
                   const SolveOptions& opt = {});

}  // namespace dnlens::wave
