#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "dnlens/vec2.hpp"

namespace dnlens {

// Value together with its gradient in the plane.
struct Dual {
  double v = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  Vec2 grad() const { return {dx, dy}; }
};

// Small declarative expression language for scalar fields on the plane.
//
//   variables  x, y, r (= |x|), r2 (= |x|^2), pi
//   operators  + - * / ^ and unary minus; '^' is right associative
//   functions  exp log sqrt sin cos tanh abs
//              gauss(x0, y0, w)   exp(-((x-x0)^2 + (y-y0)^2) / w)
//              bump(x0, y0, R)    exp(1 - 1/(1 - q)), q = |x-x0|^2/R^2, zero for q >= 1
//              ring(r0, w)        exp(-(r - r0)^2 / w)
//
// Arguments of gauss/bump/ring must be constant expressions. The gradient is
// propagated exactly by forward-mode differentiation.
class Expr {
 public:
  struct Node;

  Expr();  // the constant 0
  static Expr parse(std::string_view text);
  static Expr constant(double value);

  Dual eval(Vec2 p) const;
  double value(Vec2 p) const { return eval(p).v; }

  // Canonical fully parenthesized form; equal expressions print identically.
  std::string canonical() const;
  std::uint64_t hash() const;
  bool is_constant() const;

 private:
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

}  // namespace dnlens
