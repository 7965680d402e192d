#pragma once

#include <string>
#include <vector>

#include "dnlens/expr.hpp"
#include "dnlens/geometry/geodesic.hpp"

namespace dnlens::geometry {

// rho measures depth: 0 on (or outside) the outer shell, increasing inward.
// M0 = {x in M : m0(x) <= 0}.
struct FoliationSpec {
  Expr rho;
  double S = 1.0;
  Expr m0;
};

inline constexpr double kConvexityMargin = 1e-4;

// d^2/dt^2 rho(gamma(t)) at t = 0 for the geodesic with gamma(0) = x, gamma'(0) = v,
// by a symmetric second difference with g-length step `delta`.
double convexity_second_derivative(const Metric& metric, const FoliationSpec& fol, Vec2 x, Vec2 v,
                                   double delta = 1e-3);

enum class Convexity { strict, non_strict };
Convexity classify_convexity(double value, double margin = kConvexityMargin);

// Unit (in g) tangent to the level set of rho through x.
Vec2 level_tangent(const Metric& metric, const FoliationSpec& fol, Vec2 x);

enum class ViolationKind { not_strictly_convex, degenerate_gradient, sigma0_meets_domain, coverage };
std::string to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  Vec2 location;
  double level = 0.0;  // rho at the location
  double value = 0.0;  // convexity value, |grad rho|, or rho depending on kind
};

struct FoliationReport {
  bool pass = false;
  std::size_t levels_sampled = 0;
  std::size_t points_sampled = 0;
  double max_convexity = 0.0;  // largest (least negative) value seen
  double min_gradient = 0.0;
  std::vector<Violation> violations;

  std::size_t count(ViolationKind k) const;
  std::string to_json() const;
};

struct FoliationSampling {
  std::size_t levels = 24;   // level values spread over (0, S]
  std::size_t lines = 48;    // grid lines per axis used to locate level points
  std::size_t lattice = 81;  // lattice for the Sigma_0 and coverage checks
  double margin = kConvexityMargin;
};

FoliationReport check_foliation(const Metric& metric, const FoliationSpec& fol,
                                const FoliationSampling& sampling = {});

}  // namespace dnlens::geometry
