#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dnlens/expr.hpp"
#include "dnlens/geometry/domain.hpp"

namespace dnlens::geometry {

// Conformal factor c > 0 defining g = c^-2 g0 with g0 Euclidean.
//
// Either an analytic rule (expression or closure) or bicubic interpolation of
// gridded samples. The collar width w marks the band {dist(x, dM) < w} where the
// speed is treated as known.
class SpeedField {
 public:
  SpeedField();  // c = 1
  explicit SpeedField(Expr rule, double collar_width = 0.0);
  static SpeedField constant(double c, double collar_width = 0.0);
  static SpeedField from_function(std::function<Dual(Vec2)> rule, std::string label,
                                  double collar_width = 0.0);
  // Samples `source` on an (nx x ny) lattice spanning `box` and interpolates bicubically.
  static SpeedField gridded(const SpeedField& source, BoundingBox box, std::size_t nx,
                            std::size_t ny);

  Dual eval(Vec2 p) const;
  double operator()(Vec2 p) const { return eval(p).v; }

  double collar_width() const { return collar_width_; }
  SpeedField with_collar(double w) const;
  const std::string& label() const { return label_; }
  std::uint64_t hash() const;
  bool is_gridded() const { return grid_ != nullptr; }

 private:
  struct Grid {
    BoundingBox box;
    std::size_t nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    std::vector<double> values;
  };

  Dual eval_grid(Vec2 p) const;

  std::function<Dual(Vec2)> rule_;
  std::shared_ptr<const Grid> grid_;
  std::string label_;
  double collar_width_ = 0.0;
};

struct SpeedRange {
  double min = 0.0;
  double max = 0.0;
};

// Extremes of c over an n x n lattice of points inside the domain closure.
SpeedRange sample_range(const SpeedField& speed, const Domain& domain, std::size_t n = 201);

// max |c_a - c_b| over points of the collar {x in M : dist(x, dM) < width}.
double collar_defect(const SpeedField& a, const SpeedField& b, const Domain& domain, double width,
                     std::size_t boundary_samples = 512, std::size_t depth_samples = 16);

// True when the two fields agree on the collar to 1e-12.
bool boundary_equal(const SpeedField& a, const SpeedField& b, const Domain& domain, double width);

}  // namespace dnlens::geometry
