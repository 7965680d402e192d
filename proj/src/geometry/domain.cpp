#include "dnlens/geometry/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dnlens/error.hpp"

namespace dnlens::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 unit_gradient(const Expr& phi, Vec2 p) {
  const Dual d = phi.eval(p);
  const double g = std::hypot(d.dx, d.dy);
  if (!(g > 0.0)) throw PreconditionError("level-set function has vanishing gradient on its zero set");
  return {d.dx / g, d.dy / g};
}

}  // namespace

Domain Domain::disk(double radius) {
  if (!(radius > 0.0)) throw PreconditionError("disk radius must be positive");
  Domain d;
  d.kind_ = DomainKind::disk;
  d.width_ = radius;
  d.height_ = radius;
  d.perimeter_ = kTwoPi * radius;
  return d;
}

Domain Domain::rectangle(double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) throw PreconditionError("rectangle sides must be positive");
  Domain d;
  d.kind_ = DomainKind::rectangle;
  d.width_ = width;
  d.height_ = height;
  d.perimeter_ = 2.0 * (width + height);
  return d;
}

Domain Domain::level_set(Expr phi, Vec2 interior_point, double table_step) {
  if (!(phi.value(interior_point) < 0.0)) {
    throw PreconditionError("level-set interior point does not satisfy phi < 0");
  }
  auto table = std::make_shared<LevelSetTable>();
  table->phi = phi;
  table->center = interior_point;

  auto project = [&](Vec2 p) {
    for (int it = 0; it < 8; ++it) {
      const Dual d = phi.eval(p);
      const double g2 = d.dx * d.dx + d.dy * d.dy;
      if (!(g2 > 0.0)) throw PreconditionError("level-set gradient vanishes near the boundary");
      p -= (d.v / g2) * Vec2{d.dx, d.dy};
      if (std::abs(d.v) < 1e-15) break;
    }
    return p;
  };
  auto tangent_at = [&](Vec2 p) { return perp(unit_gradient(phi, p)); };
  auto angle_of = [&](Vec2 p) { return std::atan2(p.y - interior_point.y, p.x - interior_point.x); };

  // Start point on the +x ray.
  double far = 1.0;
  while (phi.value(interior_point + Vec2{far, 0.0}) <= 0.0) {
    far *= 2.0;
    if (far > 1e6) throw PreconditionError("level-set domain is unbounded along +x");
  }
  double lo = 0.0, hi = far;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * far; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi.value(interior_point + Vec2{mid, 0.0}) < 0.0 ? lo : hi) = mid;
  }
  const Vec2 start = project(interior_point + Vec2{0.5 * (lo + hi), 0.0});

  auto rk4 = [&](Vec2 p, double h) {
    const Vec2 k1 = tangent_at(p);
    const Vec2 k2 = tangent_at(p + 0.5 * h * k1);
    const Vec2 k3 = tangent_at(p + 0.5 * h * k2);
    const Vec2 k4 = tangent_at(p + h * k3);
    return project(p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  };

  Vec2 p = start;
  double s = 0.0;
  double unwrapped = 0.0;
  double prev_angle = angle_of(p);
  table->s.push_back(0.0);
  table->points.push_back(p);
  table->tangents.push_back(tangent_at(p));
  const std::size_t max_steps = 50'000'000;
  for (std::size_t step = 0;; ++step) {
    if (step > max_steps) throw PreconditionError("level-set boundary tracing did not close");
    const Vec2 q = rk4(p, table_step);
    double da = angle_of(q) - prev_angle;
    if (da > std::numbers::pi) da -= kTwoPi;
    if (da < -std::numbers::pi) da += kTwoPi;
    if (da <= 0.0 && step > 0) {
      throw PreconditionError("level-set domain is not star-shaped about the interior point");
    }
    if (unwrapped + da >= kTwoPi) {
      // Partial closing step by bisection on the step length.
      double a = 0.0, b = table_step;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        const Vec2 t = rk4(p, m);
        double dm = angle_of(t) - prev_angle;
        if (dm > std::numbers::pi) dm -= kTwoPi;
        if (dm < -std::numbers::pi) dm += kTwoPi;
        (unwrapped + dm < kTwoPi ? a : b) = m;
      }
      s += 0.5 * (a + b);
      table->s.push_back(s);
      table->points.push_back(start);
      table->tangents.push_back(tangent_at(start));
      break;
    }
    unwrapped += da;
    prev_angle = angle_of(q);
    p = q;
    s += table_step;
    table->s.push_back(s);
    table->points.push_back(p);
    table->tangents.push_back(tangent_at(p));
  }

  Domain d;
  d.kind_ = DomainKind::level_set;
  d.perimeter_ = s;
  d.table_ = std::move(table);
  return d;
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case DomainKind::disk: os << "disk(R=" << width_ << ")"; break;
    case DomainKind::rectangle: os << "rectangle(" << width_ << "x" << height_ << ")"; break;
    case DomainKind::level_set: os << "level_set(" << table_->phi.canonical() << ")"; break;
  }
  return os.str();
}

double Domain::defining_function(Vec2 p) const {
  switch (kind_) {
    case DomainKind::disk: return std::hypot(p.x, p.y) - width_;
    case DomainKind::rectangle:
      return std::max({-p.x, p.x - width_, -p.y, p.y - height_});
    case DomainKind::level_set: return table_->phi.value(p);
  }
  return 0.0;
}

double Domain::wrap(double s) const {
  double w = std::fmod(s, perimeter_);
  if (w < 0.0) w += perimeter_;
  if (w >= perimeter_) w -= perimeter_;
  return w;
}

double Domain::arc_difference(double s1, double s2) const {
  double d = std::fmod(s1 - s2, perimeter_);
  if (d < -0.5 * perimeter_) d += perimeter_;
  if (d >= 0.5 * perimeter_) d -= perimeter_;
  return d;
}

double Domain::arc_distance(double s1, double s2) const { return std::abs(arc_difference(s1, s2)); }

Vec2 Domain::project_to_level(Vec2 p) const {
  const Expr& phi = table_->phi;
  for (int it = 0; it < 6; ++it) {
    const Dual d = phi.eval(p);
    if (std::abs(d.v) < 1e-15) break;
    const double g2 = d.dx * d.dx + d.dy * d.dy;
    p -= (d.v / g2) * Vec2{d.dx, d.dy};
  }
  return p;
}

Vec2 Domain::boundary_point(double s) const {
  s = wrap(s);
  switch (kind_) {
    case DomainKind::disk: {
      const double th = s / width_;
      return {width_ * std::cos(th), width_ * std::sin(th)};
    }
    case DomainKind::rectangle: {
      const double a = width_, b = height_;
      if (s < a) return {s, 0.0};
      if (s < a + b) return {a, s - a};
      if (s < 2.0 * a + b) return {a - (s - a - b), b};
      return {0.0, b - (s - 2.0 * a - b)};
    }
    case DomainKind::level_set: {
      const auto& t = *table_;
      auto it = std::upper_bound(t.s.begin(), t.s.end(), s);
      std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.s.begin() - 1, 0));
      k = std::min(k, t.s.size() - 2);
      const double h = t.s[k + 1] - t.s[k];
      const double u = (s - t.s[k]) / h;
      const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
      const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
      const Vec2 q = h00 * t.points[k] + (h10 * h) * t.tangents[k] + h01 * t.points[k + 1] +
                     (h11 * h) * t.tangents[k + 1];
      return project_to_level(q);
    }
  }
  return {};
}

Vec2 Domain::outward_normal(double s) const {
  s = wrap(s);
  switch (kind_) {
    case DomainKind::disk: {
      const double th = s / width_;
      return {std::cos(th), std::sin(th)};
    }
    case DomainKind::rectangle: {
      const double a = width_, b = height_;
      const double tol = 1e-12 * (a + b);
      const double corners[4] = {a, a + b, 2.0 * a + b, 2.0 * a + 2.0 * b};
      const double r = std::sqrt(0.5);
      if (s < tol || std::abs(s - corners[3]) < tol) return {-r, -r};
      if (std::abs(s - corners[0]) < tol) return {r, -r};
      if (std::abs(s - corners[1]) < tol) return {r, r};
      if (std::abs(s - corners[2]) < tol) return {-r, r};
      if (s < a) return {0.0, -1.0};
      if (s < a + b) return {1.0, 0.0};
      if (s < 2.0 * a + b) return {0.0, 1.0};
      return {-1.0, 0.0};
    }
    case DomainKind::level_set: return unit_gradient(table_->phi, boundary_point(s));
  }
  return {};
}

Vec2 Domain::tangent(double s) const {
  const Vec2 n = outward_normal(s);
  return perp(n);
}

double Domain::arclength_of(Vec2 p) const {
  switch (kind_) {
    case DomainKind::disk: {
      double th = std::atan2(p.y, p.x);
      if (th < 0.0) th += kTwoPi;
      return wrap(th * width_);
    }
    case DomainKind::rectangle: {
      const double a = width_, b = height_;
      struct Candidate { double dist; double s; };
      const double cx = std::clamp(p.x, 0.0, a), cy = std::clamp(p.y, 0.0, b);
      const Candidate cands[4] = {
          {std::hypot(p.x - cx, p.y), cx},
          {std::hypot(p.x - a, p.y - cy), a + cy},
          {std::hypot(p.x - cx, p.y - b), a + b + (a - cx)},
          {std::hypot(p.x, p.y - cy), 2.0 * a + b + (b - cy)}};
      const auto* best = std::min_element(std::begin(cands), std::end(cands),
                                          [](const Candidate& l, const Candidate& r) {
                                            return l.dist < r.dist;
                                          });
      return wrap(best->s);
    }
    case DomainKind::level_set: {
      const auto& t = *table_;
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < t.points.size(); ++k) {
        const double d = norm2(t.points[k] - p);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      const double step = t.s[1] - t.s[0];
      double lo = t.s[best] - 1.5 * step, hi = t.s[best] + 1.5 * step;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      auto f = [&](double s) { return norm2(boundary_point(s) - p); };
      double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
          hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = f(x1);
        } else {
          lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = f(x2);
        }
      }
      return wrap(0.5 * (lo + hi));
    }
  }
  return 0.0;
}

double Domain::distance_to_boundary(Vec2 p) const {
  switch (kind_) {
    case DomainKind::disk: return std::abs(std::hypot(p.x, p.y) - width_);
    case DomainKind::rectangle: {
      if (contains(p)) return std::min({p.x, width_ - p.x, p.y, height_ - p.y});
      return norm(boundary_point(arclength_of(p)) - p);
    }
    case DomainKind::level_set: return norm(boundary_point(arclength_of(p)) - p);
  }
  return 0.0;
}

double Domain::segment_crossing(Vec2 inside, Vec2 outside) const {
  const Vec2 d = outside - inside;
  if (kind_ == DomainKind::disk) {
    // |inside + l d|^2 = R^2, root in (0, 1].
    const double A = norm2(d), B = 2.0 * dot(inside, d), C = norm2(inside) - width_ * width_;
    const double disc = std::max(B * B - 4.0 * A * C, 0.0);
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    double l1 = q / A, l2 = C / q;
    if (l1 > l2) std::swap(l1, l2);
    const double l = (l2 >= 0.0 && l2 <= 1.0 + 1e-12) ? l2 : l1;
    return std::clamp(l, 0.0, 1.0);
  }
  const double scale = std::max(1.0, norm(d));
  if (std::abs(defining_function(outside)) <= 1e-14 * scale) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (defining_function(inside + mid * d) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BoundingBox Domain::bounds() const {
  switch (kind_) {
    case DomainKind::disk: return {{-width_, -width_}, {width_, width_}};
    case DomainKind::rectangle: return {{0.0, 0.0}, {width_, height_}};
    case DomainKind::level_set: {
      BoundingBox bb{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
                     {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
      for (const Vec2& p : table_->points) {
        bb.lo.x = std::min(bb.lo.x, p.x);
        bb.lo.y = std::min(bb.lo.y, p.y);
        bb.hi.x = std::max(bb.hi.x, p.x);
        bb.hi.y = std::max(bb.hi.y, p.y);
      }
      return bb;
    }
  }
  return {};
}

}  // namespace dnlens::geometry
