#include "dnlens/geometry/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnlens/error.hpp"
#include "json.hpp"

namespace dnlens::geometry {

namespace {

constexpr double kGradientFloor = 1e-6;

}  // namespace

double convexity_second_derivative(const Metric& metric, const FoliationSpec& fol, Vec2 x, Vec2 v,
                                   double delta) {
  const Dual r = fol.rho.eval(x);
  const double gn = norm(r.grad());
  if (!(gn > kGradientFloor)) throw PreconditionError("degenerate gradient of rho");
  const double c = metric.speed(x);
  if (std::abs(norm(v) / c - 1.0) > 1e-8) throw PreconditionError("direction is not unit in the metric");
  if (std::abs(dot(r.grad(), v)) > 1e-8 * gn * norm(v)) {
    throw PreconditionError("direction is not tangent to the level set");
  }
  const PhaseState st{x, v / (c * c)};
  const double step = delta / 4.0;
  const PhaseState fwd = flow(metric.speed, st, delta, step);
  const PhaseState bwd = flow(metric.speed, st, -delta, step);
  return (fol.rho.value(fwd.x) - 2.0 * r.v + fol.rho.value(bwd.x)) / (delta * delta);
}

Convexity classify_convexity(double value, double margin) {
  return value < -margin ? Convexity::strict : Convexity::non_strict;
}

Vec2 level_tangent(const Metric& metric, const FoliationSpec& fol, Vec2 x) {
  const Vec2 g = fol.rho.eval(x).grad();
  const double gn = norm(g);
  if (!(gn > kGradientFloor)) throw PreconditionError("degenerate gradient of rho");
  return (metric.speed(x) / gn) * perp(g);
}

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::not_strictly_convex: return "not_strictly_convex";
    case ViolationKind::degenerate_gradient: return "degenerate_gradient";
    case ViolationKind::sigma0_meets_domain: return "sigma0_meets_domain";
    case ViolationKind::coverage: return "coverage";
  }
  return "unknown";
}

std::size_t FoliationReport::count(ViolationKind k) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

std::string FoliationReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["pass"] = pass;
  j["levels_sampled"] = levels_sampled;
  j["points_sampled"] = points_sampled;
  j["max_convexity"] = max_convexity;
  j["min_gradient"] = min_gradient;
  nlohmann::json counts = nlohmann::json::object();
  for (auto k : {ViolationKind::not_strictly_convex, ViolationKind::degenerate_gradient,
                 ViolationKind::sigma0_meets_domain, ViolationKind::coverage}) {
    counts[to_string(k)] = count(k);
  }
  j["violation_counts"] = counts;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& v : violations) {
    list.push_back({{"kind", to_string(v.kind)},
                    {"x", v.location.x},
                    {"y", v.location.y},
                    {"level", v.level},
                    {"value", v.value}});
  }
  j["violations"] = list;
  return j.dump(2);
}

FoliationReport check_foliation(const Metric& metric, const FoliationSpec& fol,
                                const FoliationSampling& sampling) {
  if (!(fol.S > 0.0)) throw PreconditionError("foliation range bound S must be positive");
  const Domain& dom = metric.domain;
  const BoundingBox bb = dom.bounds();
  FoliationReport rep;
  rep.max_convexity = -std::numeric_limits<double>::infinity();
  rep.min_gradient = std::numeric_limits<double>::infinity();

  auto inside = [&](Vec2 p) { return dom.defining_function(p) < -1e-9; };

  auto visit_level_point = [&](Vec2 p, double level) {
    ++rep.points_sampled;
    const Dual r = fol.rho.eval(p);
    const double gn = norm(r.grad());
    rep.min_gradient = std::min(rep.min_gradient, gn);
    if (level <= 0.0) {
      rep.violations.push_back({ViolationKind::sigma0_meets_domain, p, r.v, r.v});
      return;
    }
    if (!(gn > kGradientFloor)) {
      rep.violations.push_back({ViolationKind::degenerate_gradient, p, r.v, gn});
      return;
    }
    const double val = convexity_second_derivative(metric, fol, p, level_tangent(metric, fol, p));
    rep.max_convexity = std::max(rep.max_convexity, val);
    if (classify_convexity(val, sampling.margin) != Convexity::strict) {
      rep.violations.push_back({ViolationKind::not_strictly_convex, p, r.v, val});
    }
  };

  // Level points: roots of rho = level along horizontal and vertical lines.
  const std::size_t lines = std::max<std::size_t>(2, sampling.lines);
  const std::size_t fine = 8 * lines;
  for (std::size_t k = 0; k <= sampling.levels; ++k) {
    const double level = fol.S * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(1, sampling.levels));
    ++rep.levels_sampled;
    for (int axis = 0; axis < 2; ++axis) {
      for (std::size_t j = 0; j < lines; ++j) {
        const double frac = (static_cast<double>(j) + 0.5) / static_cast<double>(lines);
        auto point = [&](double u) {
          return axis == 0 ? Vec2{bb.lo.x + u * (bb.hi.x - bb.lo.x), bb.lo.y + frac * (bb.hi.y - bb.lo.y)}
                           : Vec2{bb.lo.x + frac * (bb.hi.x - bb.lo.x), bb.lo.y + u * (bb.hi.y - bb.lo.y)};
        };
        double u0 = 0.0;
        double f0 = fol.rho.value(point(u0)) - level;
        for (std::size_t i = 1; i <= fine; ++i) {
          const double u1 = static_cast<double>(i) / static_cast<double>(fine);
          const double f1 = fol.rho.value(point(u1)) - level;
          if ((f0 < 0.0) != (f1 < 0.0)) {
            double a = u0, b = u1, fa = f0;
            for (int it = 0; it < 60; ++it) {
              const double m = 0.5 * (a + b);
              const double fm = fol.rho.value(point(m)) - level;
              if ((fm < 0.0) == (fa < 0.0)) {
                a = m;
                fa = fm;
              } else {
                b = m;
              }
            }
            const Vec2 p = point(0.5 * (a + b));
            if (inside(p)) visit_level_point(p, level);
          }
          u0 = u1;
          f0 = f1;
        }
      }
    }
  }

  // Sigma_0 and coverage on a lattice.
  const std::size_t n = std::max<std::size_t>(2, sampling.lattice);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p{bb.lo.x + (bb.hi.x - bb.lo.x) * (static_cast<double>(i) + 0.5) / static_cast<double>(n),
                   bb.lo.y + (bb.hi.y - bb.lo.y) * (static_cast<double>(j) + 0.5) / static_cast<double>(n)};
      if (!inside(p)) continue;
      const double r = fol.rho.value(p);
      if (r <= 0.0) rep.violations.push_back({ViolationKind::sigma0_meets_domain, p, r, r});
      if (fol.m0.value(p) <= 0.0 && !(r > 0.0 && r <= fol.S)) {
        rep.violations.push_back({ViolationKind::coverage, p, r, r});
      }
    }
  }

  if (rep.points_sampled == 0) rep.max_convexity = 0.0;
  if (!std::isfinite(rep.min_gradient)) rep.min_gradient = 0.0;
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace dnlens::geometry
