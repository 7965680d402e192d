#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace dnlens::wave {

// Samples on the boundary cylinder: rows are times t_i = i * dt, columns are
// arclengths s_j (uniform, spacing perimeter / ns).
class SpaceTimeSamples {
 public:
  SpaceTimeSamples() = default;
  SpaceTimeSamples(std::size_t nt, double dt, std::vector<double> s, double perimeter);

  std::size_t nt() const { return nt_; }
  std::size_t ns() const { return s_.size(); }
  double dt() const { return dt_; }
  double ds() const { return perimeter_ / static_cast<double>(s_.size()); }
  double perimeter() const { return perimeter_; }
  double t(std::size_t i) const { return static_cast<double>(i) * dt_; }
  double t_end() const { return t(nt_ - 1); }
  const std::vector<double>& s() const { return s_; }

  double& at(std::size_t i, std::size_t j) { return data_[i * s_.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * s_.size() + j]; }
  double* row(std::size_t i) { return data_.data() + i * s_.size(); }
  const double* row(std::size_t i) const { return data_.data() + i * s_.size(); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  // Squared L2 norm over t in [t1, t2] (rows inside the window) and columns in
  // `mask` (all columns when empty).
  double l2_squared(double t1, double t2, const std::vector<bool>& mask = {}) const;
  double l2_squared() const { return l2_squared(0.0, t_end()); }
  double max_abs() const;
  bool same_layout(const SpaceTimeSamples& o) const;

  // Cubic Lagrange in t, periodic cubic Lagrange in s.
  double interpolate(double t, double s) const;

 protected:
  std::size_t nt_ = 0;
  double dt_ = 0.0;
  std::vector<double> s_;
  double perimeter_ = 0.0;
  std::vector<double> data_;
};

using BoundaryFunction = std::function<double(double t, double s)>;

// Dirichlet data f(t, s). When `exact` is set the solver evaluates it directly at
// every step and cut point; the samples are then its restriction to the layout.
class BoundarySignal : public SpaceTimeSamples {
 public:
  using SpaceTimeSamples::SpaceTimeSamples;

  static BoundarySignal sample(const SpaceTimeSamples& layout, BoundaryFunction f);

  double value(double t, double s) const { return exact_ ? exact_(t, s) : interpolate(t, s); }
  bool has_exact() const { return static_cast<bool>(exact_); }
  const BoundaryFunction& exact() const { return exact_; }

  // Number of leading time rows that vanish identically (the discrete H1_(0) condition).
  std::size_t leading_zero_rows() const;
  bool vanishes_near_zero(std::size_t k0 = 2) const { return leading_zero_rows() >= k0; }

  // Discrete H1 norm on the cylinder by forward differences in t and s.
  double h1_norm() const;

  BoundarySignal scaled_sum(double a, const BoundarySignal& other, double b) const;

 private:
  BoundaryFunction exact_;
};

class DNTrace : public SpaceTimeSamples {
 public:
  using SpaceTimeSamples::SpaceTimeSamples;
  std::uint64_t speed_hash = 0;
  double dx = 0.0;
  double solver_dt = 0.0;
};

}  // namespace dnlens::wave
