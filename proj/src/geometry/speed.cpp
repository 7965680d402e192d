#include "dnlens/geometry/speed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dnlens/error.hpp"
#include "dnlens/hash.hpp"

namespace dnlens::geometry {

namespace {

// Catmull-Rom weights for samples at -1, 0, 1, 2 and their derivatives in u.
void catmull_rom(double u, std::array<double, 4>& w, std::array<double, 4>& dw) {
  const double u2 = u * u, u3 = u2 * u;
  w = {0.5 * (-u3 + 2.0 * u2 - u), 0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
       0.5 * (-3.0 * u3 + 4.0 * u2 + u), 0.5 * (u3 - u2)};
  dw = {0.5 * (-3.0 * u2 + 4.0 * u - 1.0), 0.5 * (9.0 * u2 - 10.0 * u),
        0.5 * (-9.0 * u2 + 8.0 * u + 1.0), 0.5 * (3.0 * u2 - 2.0 * u)};
}

}  // namespace

SpeedField::SpeedField() : SpeedField(Expr::constant(1.0), 0.0) {}

SpeedField::SpeedField(Expr rule, double collar_width)
    : rule_([rule](Vec2 p) { return rule.eval(p); }),
      label_(rule.canonical()),
      collar_width_(collar_width) {
  if (collar_width < 0.0) throw PreconditionError("collar width must be nonnegative");
}

SpeedField SpeedField::constant(double c, double collar_width) {
  if (!(c > 0.0)) throw PreconditionError("speed must be positive");
  return SpeedField(Expr::constant(c), collar_width);
}

SpeedField SpeedField::from_function(std::function<Dual(Vec2)> rule, std::string label,
                                     double collar_width) {
  SpeedField f;
  f.rule_ = std::move(rule);
  f.label_ = std::move(label);
  f.collar_width_ = collar_width;
  return f;
}

SpeedField SpeedField::gridded(const SpeedField& source, BoundingBox box, std::size_t nx,
                               std::size_t ny) {
  if (nx < 4 || ny < 4) throw PreconditionError("gridded speed needs at least 4x4 samples");
  auto g = std::make_shared<Grid>();
  g->box = box;
  g->nx = nx;
  g->ny = ny;
  g->hx = (box.hi.x - box.lo.x) / static_cast<double>(nx - 1);
  g->hy = (box.hi.y - box.lo.y) / static_cast<double>(ny - 1);
  g->values.resize(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      g->values[j * nx + i] = source(Vec2{box.lo.x + static_cast<double>(i) * g->hx,
                                          box.lo.y + static_cast<double>(j) * g->hy});
    }
  }
  SpeedField f;
  f.grid_ = std::move(g);
  f.label_ = "gridded[" + std::to_string(nx) + "x" + std::to_string(ny) + "](" + source.label() + ")";
  f.collar_width_ = source.collar_width_;
  return f;
}

Dual SpeedField::eval_grid(Vec2 p) const {
  const Grid& g = *grid_;
  const double fx = (p.x - g.box.lo.x) / g.hx;
  const double fy = (p.y - g.box.lo.y) / g.hy;
  const auto ix = static_cast<std::ptrdiff_t>(
      std::clamp(std::floor(fx), 0.0, static_cast<double>(g.nx - 2)));
  const auto iy = static_cast<std::ptrdiff_t>(
      std::clamp(std::floor(fy), 0.0, static_cast<double>(g.ny - 2)));
  const double u = fx - static_cast<double>(ix), v = fy - static_cast<double>(iy);
  std::array<double, 4> wu, dwu, wv, dwv;
  catmull_rom(u, wu, dwu);
  catmull_rom(v, wv, dwv);
  auto at = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(g.nx) - 1);
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(g.ny) - 1);
    return g.values[static_cast<std::size_t>(j) * g.nx + static_cast<std::size_t>(i)];
  };
  Dual out;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const double val = at(ix - 1 + a, iy - 1 + b);
      out.v += wu[a] * wv[b] * val;
      out.dx += dwu[a] * wv[b] * val;
      out.dy += wu[a] * dwv[b] * val;
    }
  }
  out.dx /= g.hx;
  out.dy /= g.hy;
  return out;
}

Dual SpeedField::eval(Vec2 p) const {
  if (grid_) return eval_grid(p);
  return rule_(p);
}

SpeedField SpeedField::with_collar(double w) const {
  if (w < 0.0) throw PreconditionError("collar width must be nonnegative");
  SpeedField f = *this;
  f.collar_width_ = w;
  return f;
}

std::uint64_t SpeedField::hash() const {
  std::uint64_t h = fnv1a(label_);
  if (grid_) {
    const auto* bytes = reinterpret_cast<const char*>(grid_->values.data());
    h = fnv1a(std::string_view(bytes, grid_->values.size() * sizeof(double)), h);
  }
  return h;
}

SpeedRange sample_range(const SpeedField& speed, const Domain& domain, std::size_t n) {
  const BoundingBox bb = domain.bounds();
  SpeedRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto visit = [&](Vec2 p) {
    const double c = speed(p);
    if (!std::isfinite(c)) throw NumericalAbort("non-finite speed while sampling", 0);
    r.min = std::min(r.min, c);
    r.max = std::max(r.max, c);
  };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p{bb.lo.x + (bb.hi.x - bb.lo.x) * static_cast<double>(i) / static_cast<double>(n - 1),
                   bb.lo.y + (bb.hi.y - bb.lo.y) * static_cast<double>(j) / static_cast<double>(n - 1)};
      if (domain.contains(p, 1e-12)) visit(p);
    }
  }
  for (std::size_t k = 0; k < 4 * n; ++k) {
    visit(domain.boundary_point(domain.perimeter() * static_cast<double>(k) / static_cast<double>(4 * n)));
  }
  return r;
}

double collar_defect(const SpeedField& a, const SpeedField& b, const Domain& domain, double width,
                     std::size_t boundary_samples, std::size_t depth_samples) {
  double worst = 0.0;
  for (std::size_t k = 0; k < boundary_samples; ++k) {
    const double s = domain.perimeter() * static_cast<double>(k) / static_cast<double>(boundary_samples);
    const Vec2 x = domain.boundary_point(s);
    const Vec2 n = domain.outward_normal(s);
    for (std::size_t d = 0; d < depth_samples; ++d) {
      const double depth = width * static_cast<double>(d) / static_cast<double>(depth_samples);
      const Vec2 p = x - depth * n;
      if (!domain.contains(p, 1e-12)) continue;
      worst = std::max(worst, std::abs(a(p) - b(p)));
    }
  }
  return worst;
}

bool boundary_equal(const SpeedField& a, const SpeedField& b, const Domain& domain, double width) {
  return collar_defect(a, b, domain, width) < 1e-12;
}

}  // namespace dnlens::geometry
