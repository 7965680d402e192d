#include "dnlens/wave/grid.hpp"

#include <algorithm>
#include <cmath>

#include "dnlens/error.hpp"

namespace dnlens::wave {

using geometry::Domain;
using geometry::DomainKind;

Vec2 WaveGrid::node(std::size_t k) const {
  return {origin_.x + static_cast<double>(k % nx_) * dx_, origin_.y + static_cast<double>(k / nx_) * dx_};
}

WaveGrid WaveGrid::build(const Domain& domain, double dx, double dt, double T, std::size_t trace_stride) {
  if (!(dx > 0.0) || !(dt > 0.0) || !(T > 0.0)) throw PreconditionError("dx, dt and T must be positive");
  if (trace_stride == 0) throw PreconditionError("trace stride must be at least 1");
  WaveGrid g;
  g.domain_ = domain;
  g.dt_ = dt;
  g.trace_stride_ = trace_stride;
  const auto raw_steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  g.nsteps_ = (raw_steps + trace_stride - 1) / trace_stride * trace_stride;

  const bool rect = domain.kind() == DomainKind::rectangle;
  if (rect) {
    const double cells = std::ceil(domain.width() / dx - 1e-9);
    g.dx_ = domain.width() / cells;
    const double rows = domain.height() / g.dx_;
    if (std::abs(rows - std::round(rows)) > 1e-6) {
      throw PreconditionError("rectangle height is not a multiple of the grid step");
    }
    g.nx_ = static_cast<std::size_t>(cells) + 1;
    g.ny_ = static_cast<std::size_t>(std::round(rows)) + 1;
    g.origin_ = {0.0, 0.0};
  } else {
    g.dx_ = dx;
    const auto bb = domain.bounds();
    g.origin_ = bb.lo - Vec2{2.0 * dx, 2.0 * dx};
    g.nx_ = static_cast<std::size_t>(std::ceil((bb.hi.x - bb.lo.x) / dx)) + 5;
    g.ny_ = static_cast<std::size_t>(std::ceil((bb.hi.y - bb.lo.y) / dx)) + 5;
  }
  const double h = g.dx_;

  g.mask_.assign(g.nx_ * g.ny_, 0);
  for (std::size_t j = 1; j + 1 < g.ny_; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx_; ++i) {
      const std::size_t k = j * g.nx_ + i;
      if (domain.defining_function(g.node(k)) < 0.0) {
        g.mask_[k] = 1;
        ++g.interior_count_;
      }
    }
  }
  if (g.interior_count_ == 0) throw PreconditionError("grid has no interior nodes");

  for (std::size_t j = 0; j < g.ny_; ++j) {
    std::size_t i = 0;
    while (i < g.nx_) {
      while (i < g.nx_ && !g.mask_[j * g.nx_ + i]) ++i;
      const std::size_t b = i;
      while (i < g.nx_ && g.mask_[j * g.nx_ + i]) ++i;
      if (i > b) g.runs_.push_back({j * g.nx_ + b, j * g.nx_ + i});
    }
  }

  const std::ptrdiff_t offs[4] = {1, -1, static_cast<std::ptrdiff_t>(g.nx_), -static_cast<std::ptrdiff_t>(g.nx_)};
  for (const RowRun& run : g.runs_) {
    for (std::size_t k = run.begin; k < run.end; ++k) {
      for (std::ptrdiff_t off : offs) {
        const auto q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + off);
        if (g.mask_[q]) continue;
        const Vec2 p = g.node(k), e = g.node(q);
        CutLink c;
        c.node = k;
        c.theta = rect ? 1.0 : domain.segment_crossing(p, e);
        c.theta_used = std::max(c.theta, kThetaMin);
        c.s = domain.arclength_of(p + c.theta * (e - p));
        g.cuts_.push_back(c);
      }
    }
  }

  // Boundary samples and normal-derivative stencils.
  const double P = domain.perimeter();
  std::size_t ns;
  if (rect) {
    ns = static_cast<std::size_t>(std::llround(P / h));
  } else {
    ns = static_cast<std::size_t>(std::ceil(P / (1.25 * h)));
  }
  const double depth = rect ? h : 2.0 * h;
  g.boundary_s_.resize(ns);
  g.stencils_.resize(ns);
  auto taps_at = [&](Vec2 p) {
    std::array<Tap, 4> t{};
    const double fx = (p.x - g.origin_.x) / h, fy = (p.y - g.origin_.y) / h;
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(fx), 0.0, static_cast<double>(g.nx_ - 2)));
    const auto j = static_cast<std::size_t>(std::clamp(std::floor(fy), 0.0, static_cast<double>(g.ny_ - 2)));
    const double u = fx - static_cast<double>(i), v = fy - static_cast<double>(j);
    const std::size_t idx[4] = {j * g.nx_ + i, j * g.nx_ + i + 1, (j + 1) * g.nx_ + i, (j + 1) * g.nx_ + i + 1};
    const double w[4] = {(1 - u) * (1 - v), u * (1 - v), (1 - u) * v, u * v};
    for (int a = 0; a < 4; ++a) {
      t[a].node = idx[a];
      t[a].weight = w[a];
      t[a].exterior = !g.mask_[idx[a]];
      if (t[a].exterior) t[a].s_exterior = domain.arclength_of(g.node(idx[a]));
    }
    return t;
  };
  for (std::size_t j = 0; j < ns; ++j) {
    const double s = P * static_cast<double>(j) / static_cast<double>(ns);
    g.boundary_s_[j] = s;
    DnStencil& st = g.stencils_[j];
    st.s = s;
    st.xb = domain.boundary_point(s);
    st.normal = domain.outward_normal(s);
    st.depth = depth;
    st.near = taps_at(st.xb - depth * st.normal);
    st.far = taps_at(st.xb - 2.0 * depth * st.normal);
  }
  return g;
}

double WaveGrid::max_boundary_spacing() const {
  double m = 0.0;
  for (std::size_t j = 0; j < boundary_s_.size(); ++j) {
    const double a = boundary_s_[j];
    const double b = j + 1 < boundary_s_.size() ? boundary_s_[j + 1] : boundary_s_[0] + domain_.perimeter();
    m = std::max(m, b - a);
  }
  return m;
}

SpaceTimeSamples WaveGrid::layout() const {
  return SpaceTimeSamples(trace_rows(), dt_ * static_cast<double>(trace_stride_), boundary_s_,
                          domain_.perimeter());
}

double WaveGrid::cfl_bound(const geometry::SpeedField& speed) const {
  double cmax = geometry::sample_range(speed, domain_, 101).max;
  for (const RowRun& run : runs_) {
    for (std::size_t k = run.begin; k < run.end; ++k) cmax = std::max(cmax, speed(node(k)));
  }
  return kCflLimit * dx_ / cmax;
}

void WaveGrid::check_cfl(const geometry::SpeedField& speed) const {
  const double bound = cfl_bound(speed);
  if (dt_ > bound * (1.0 + 1e-12)) throw CflViolation(dt_, bound);
}

}  // namespace dnlens::wave
