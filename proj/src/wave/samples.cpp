#include "dnlens/wave/samples.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dnlens/error.hpp"

namespace dnlens::wave {

namespace {

std::array<double, 4> lagrange4(double u) {
  return {-u * (u - 1.0) * (u - 2.0) / 6.0, (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
          -(u + 1.0) * u * (u - 2.0) / 2.0, (u + 1.0) * u * (u - 1.0) / 6.0};
}

}  // namespace

SpaceTimeSamples::SpaceTimeSamples(std::size_t nt, double dt, std::vector<double> s, double perimeter)
    : nt_(nt), dt_(dt), s_(std::move(s)), perimeter_(perimeter), data_(nt * s_.size(), 0.0) {
  if (nt == 0 || s_.empty()) throw PreconditionError("sample layout must be non-empty");
  if (!(dt > 0.0) || !(perimeter > 0.0)) throw PreconditionError("sample spacing must be positive");
}

double SpaceTimeSamples::l2_squared(double t1, double t2, const std::vector<bool>& mask) const {
  if (!mask.empty() && mask.size() != ns()) throw PreconditionError("column mask size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < nt_; ++i) {
    const double ti = t(i);
    if (ti < t1 - 1e-12 * dt_ || ti > t2 + 1e-12 * dt_) continue;
    const double* r = row(i);
    for (std::size_t j = 0; j < ns(); ++j) {
      if (mask.empty() || mask[j]) sum += r[j] * r[j];
    }
  }
  return sum * dt_ * ds();
}

double SpaceTimeSamples::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool SpaceTimeSamples::same_layout(const SpaceTimeSamples& o) const {
  return nt_ == o.nt_ && s_.size() == o.s_.size() && std::abs(dt_ - o.dt_) <= 1e-14 * dt_ &&
         std::abs(perimeter_ - o.perimeter_) <= 1e-12 * perimeter_;
}

double SpaceTimeSamples::interpolate(double t, double s) const {
  if (t < 0.0) return 0.0;
  const double ft = std::min(t, t_end()) / dt_;
  const auto i0 = static_cast<std::ptrdiff_t>(std::floor(ft));
  const auto wt = lagrange4(ft - static_cast<double>(i0));
  const double h = ds();
  double sw = s - perimeter_ * std::floor(s / perimeter_);
  const double fs = sw / h;
  const auto j0 = static_cast<std::ptrdiff_t>(std::floor(fs));
  const auto wsv = lagrange4(fs - static_cast<double>(j0));
  const auto nt = static_cast<std::ptrdiff_t>(nt_);
  const auto ns = static_cast<std::ptrdiff_t>(s_.size());
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    std::ptrdiff_t i = std::clamp<std::ptrdiff_t>(i0 - 1 + a, 0, nt - 1);
    const double* r = row(static_cast<std::size_t>(i));
    double racc = 0.0;
    for (int b = 0; b < 4; ++b) {
      std::ptrdiff_t j = ((j0 - 1 + b) % ns + ns) % ns;
      racc += wsv[b] * r[j];
    }
    acc += wt[a] * racc;
  }
  return acc;
}

BoundarySignal BoundarySignal::sample(const SpaceTimeSamples& layout, BoundaryFunction f) {
  BoundarySignal sig(layout.nt(), layout.dt(), layout.s(), layout.perimeter());
  for (std::size_t i = 0; i < sig.nt(); ++i) {
    for (std::size_t j = 0; j < sig.ns(); ++j) sig.at(i, j) = f(sig.t(i), sig.s()[j]);
  }
  sig.exact_ = std::move(f);
  return sig;
}

std::size_t BoundarySignal::leading_zero_rows() const {
  for (std::size_t i = 0; i < nt_; ++i) {
    const double* r = row(i);
    for (std::size_t j = 0; j < ns(); ++j) {
      if (r[j] != 0.0) return i;
    }
  }
  return nt_;
}

double BoundarySignal::h1_norm() const {
  const double h = ds();
  double sum = 0.0;
  for (std::size_t i = 0; i < nt_; ++i) {
    const double* r = row(i);
    const double* rn = i + 1 < nt_ ? row(i + 1) : nullptr;
    for (std::size_t j = 0; j < ns(); ++j) {
      const double ft = rn ? (rn[j] - r[j]) / dt_ : 0.0;
      const double fs = (r[(j + 1) % ns()] - r[j]) / h;
      sum += r[j] * r[j] + ft * ft + fs * fs;
    }
  }
  return std::sqrt(sum * dt_ * h);
}

BoundarySignal BoundarySignal::scaled_sum(double a, const BoundarySignal& other, double b) const {
  if (!same_layout(other)) throw PreconditionError("signals have different layouts");
  BoundarySignal out(nt_, dt_, s_, perimeter_);
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = a * data_[k] + b * other.data_[k];
  if (exact_ && other.exact_) {
    out.exact_ = [fa = exact_, fb = other.exact_, a, b](double t, double s) { return a * fa(t, s) + b * fb(t, s); };
  }
  return out;
}

}  // namespace dnlens::wave
