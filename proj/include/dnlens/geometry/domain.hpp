#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dnlens/expr.hpp"
#include "dnlens/vec2.hpp"

namespace dnlens::geometry {

enum class DomainKind { disk, rectangle, level_set };

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
};

// Planar domain M with a closed boundary parameterized by Euclidean arclength s.
// The parameterization runs counterclockwise: the outward normal is the tangent
// rotated clockwise by 90 degrees.
//
//   disk       centered at the origin, s = 0 at (R, 0)
//   rectangle  [0,a] x [0,b], s = 0 at (0, 0), bottom edge first
//   level_set  {phi < 0} for a smooth phi, star-shaped with respect to a supplied
//              interior point; s = 0 where the ray from that point in +x hits phi = 0
class Domain {
 public:
  static Domain disk(double radius);
  static Domain rectangle(double width, double height);
  static Domain level_set(Expr phi, Vec2 interior_point, double table_step = 1e-3);

  DomainKind kind() const { return kind_; }
  std::string describe() const;

  // Negative inside, zero on the boundary, positive outside.
  double defining_function(Vec2 p) const;
  bool contains(Vec2 p, double tol = 0.0) const { return defining_function(p) <= tol; }
  bool strictly_inside(Vec2 p) const { return defining_function(p) < 0.0; }

  double perimeter() const { return perimeter_; }
  double wrap(double s) const;
  // Signed periodic difference s1 - s2 folded into [-P/2, P/2).
  double arc_difference(double s1, double s2) const;
  double arc_distance(double s1, double s2) const;

  Vec2 boundary_point(double s) const;
  Vec2 tangent(double s) const;
  Vec2 outward_normal(double s) const;

  // Arclength of the boundary point nearest to p.
  double arclength_of(Vec2 p) const;
  double distance_to_boundary(Vec2 p) const;

  // Fraction lambda in (0, 1] with phi(a + lambda (b - a)) = 0 for a inside, b outside.
  double segment_crossing(Vec2 inside, Vec2 outside) const;

  BoundingBox bounds() const;

  double radius() const { return width_; }
  double width() const { return width_; }
  double height() const { return height_; }

 private:
  struct LevelSetTable {
    Expr phi;
    Vec2 center;
    std::vector<double> s;
    std::vector<Vec2> points;
    std::vector<Vec2> tangents;
  };

  Vec2 project_to_level(Vec2 p) const;

  DomainKind kind_ = DomainKind::disk;
  double width_ = 1.0;
  double height_ = 1.0;
  double perimeter_ = 0.0;
  std::shared_ptr<const LevelSetTable> table_;
};

}  // namespace dnlens::geometry
