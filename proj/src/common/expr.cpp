#include "dnlens/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "dnlens/error.hpp"
#include "dnlens/hash.hpp"

namespace dnlens {

enum class Op {
  constant, var_x, var_y, var_r, var_r2,
  add, sub, mul, div, pow, neg,
  exp, log, sqrt, sin, cos, tanh, abs,
  gauss, bump, ring
};

struct Expr::Node {
  Op op = Op::constant;
  double value = 0.0;
  std::array<double, 3> params{};
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_const(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

NodePtr make_op(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

bool node_constant(const Expr::Node& n) {
  switch (n.op) {
    case Op::var_x: case Op::var_y: case Op::var_r: case Op::var_r2:
    case Op::gauss: case Op::bump: case Op::ring:
      return false;
    default:
      break;
  }
  for (const auto& a : n.args) {
    if (!node_constant(*a)) return false;
  }
  return true;
}

Dual eval_node(const Expr::Node& n, Vec2 p) {
  auto arg = [&](std::size_t i) { return eval_node(*n.args[i], p); };
  switch (n.op) {
    case Op::constant: return {n.value, 0.0, 0.0};
    case Op::var_x: return {p.x, 1.0, 0.0};
    case Op::var_y: return {p.y, 0.0, 1.0};
    case Op::var_r: {
      const double r = std::hypot(p.x, p.y);
      if (r == 0.0) return {0.0, 0.0, 0.0};
      return {r, p.x / r, p.y / r};
    }
    case Op::var_r2: return {p.x * p.x + p.y * p.y, 2.0 * p.x, 2.0 * p.y};
    case Op::add: { Dual a = arg(0), b = arg(1); return {a.v + b.v, a.dx + b.dx, a.dy + b.dy}; }
    case Op::sub: { Dual a = arg(0), b = arg(1); return {a.v - b.v, a.dx - b.dx, a.dy - b.dy}; }
    case Op::mul: {
      Dual a = arg(0), b = arg(1);
      return {a.v * b.v, a.dx * b.v + a.v * b.dx, a.dy * b.v + a.v * b.dy};
    }
    case Op::div: {
      Dual a = arg(0), b = arg(1);
      const double inv = 1.0 / b.v;
      const double q = a.v * inv;
      return {q, (a.dx - q * b.dx) * inv, (a.dy - q * b.dy) * inv};
    }
    case Op::pow: {
      Dual a = arg(0), b = arg(1);
      if (b.dx == 0.0 && b.dy == 0.0) {
        const double v = std::pow(a.v, b.v);
        const double d = (b.v == 0.0) ? 0.0 : b.v * std::pow(a.v, b.v - 1.0);
        return {v, d * a.dx, d * a.dy};
      }
      const double v = std::pow(a.v, b.v);
      const double la = std::log(a.v);
      return {v, v * (b.dx * la + b.v * a.dx / a.v), v * (b.dy * la + b.v * a.dy / a.v)};
    }
    case Op::neg: { Dual a = arg(0); return {-a.v, -a.dx, -a.dy}; }
    case Op::exp: { Dual a = arg(0); const double v = std::exp(a.v); return {v, v * a.dx, v * a.dy}; }
    case Op::log: { Dual a = arg(0); return {std::log(a.v), a.dx / a.v, a.dy / a.v}; }
    case Op::sqrt: {
      Dual a = arg(0);
      const double v = std::sqrt(a.v);
      if (v == 0.0) return {0.0, 0.0, 0.0};
      return {v, 0.5 * a.dx / v, 0.5 * a.dy / v};
    }
    case Op::sin: { Dual a = arg(0); const double c = std::cos(a.v); return {std::sin(a.v), c * a.dx, c * a.dy}; }
    case Op::cos: { Dual a = arg(0); const double s = -std::sin(a.v); return {std::cos(a.v), s * a.dx, s * a.dy}; }
    case Op::tanh: {
      Dual a = arg(0);
      const double t = std::tanh(a.v);
      const double d = 1.0 - t * t;
      return {t, d * a.dx, d * a.dy};
    }
    case Op::abs: {
      Dual a = arg(0);
      const double s = (a.v < 0.0) ? -1.0 : 1.0;
      return {std::abs(a.v), s * a.dx, s * a.dy};
    }
    case Op::gauss: {
      const double ex = p.x - n.params[0], ey = p.y - n.params[1], w = n.params[2];
      const double v = std::exp(-(ex * ex + ey * ey) / w);
      return {v, -2.0 * ex / w * v, -2.0 * ey / w * v};
    }
    case Op::bump: {
      const double ex = p.x - n.params[0], ey = p.y - n.params[1], R = n.params[2];
      const double q = (ex * ex + ey * ey) / (R * R);
      if (q >= 1.0) return {0.0, 0.0, 0.0};
      const double om = 1.0 - q;
      const double v = std::exp(1.0 - 1.0 / om);
      const double dvdq = -v / (om * om);
      return {v, dvdq * 2.0 * ex / (R * R), dvdq * 2.0 * ey / (R * R)};
    }
    case Op::ring: {
      const double r = std::hypot(p.x, p.y);
      const double r0 = n.params[0], w = n.params[1];
      const double v = std::exp(-(r - r0) * (r - r0) / w);
      if (r == 0.0) return {v, 0.0, 0.0};
      const double dvdr = -2.0 * (r - r0) / w * v;
      return {v, dvdr * p.x / r, dvdr * p.y / r};
    }
  }
  return {};
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::tanh: return "tanh";
    case Op::abs: return "abs";
    case Op::gauss: return "gauss";
    case Op::bump: return "bump";
    case Op::ring: return "ring";
    default: return "?";
  }
}

void print_node(const Expr::Node& n, std::string& out) {
  auto bin = [&](const char* sym) {
    out += '(';
    print_node(*n.args[0], out);
    out += sym;
    print_node(*n.args[1], out);
    out += ')';
  };
  switch (n.op) {
    case Op::constant: out += fmt_double(n.value); return;
    case Op::var_x: out += 'x'; return;
    case Op::var_y: out += 'y'; return;
    case Op::var_r: out += 'r'; return;
    case Op::var_r2: out += "r2"; return;
    case Op::add: bin("+"); return;
    case Op::sub: bin("-"); return;
    case Op::mul: bin("*"); return;
    case Op::div: bin("/"); return;
    case Op::pow: bin("^"); return;
    case Op::neg:
      out += "(-";
      print_node(*n.args[0], out);
      out += ')';
      return;
    case Op::gauss: case Op::bump:
      out += op_name(n.op);
      out += '(' + fmt_double(n.params[0]) + ',' + fmt_double(n.params[1]) + ',' +
             fmt_double(n.params[2]) + ')';
      return;
    case Op::ring:
      out += "ring(" + fmt_double(n.params[0]) + ',' + fmt_double(n.params[1]) + ')';
      return;
    default:
      out += op_name(n.op);
      out += '(';
      print_node(*n.args[0], out);
      out += ')';
      return;
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr n = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw PreconditionError("expression error at offset " + std::to_string(pos_) + " in '" +
                            std::string(text_) + "': " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = make_op(Op::add, {lhs, parse_product()});
      else if (accept('-')) lhs = make_op(Op::sub, {lhs, parse_product()});
      else return lhs;
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_power();
    for (;;) {
      if (accept('*')) lhs = make_op(Op::mul, {lhs, parse_power()});
      else if (accept('/')) lhs = make_op(Op::div, {lhs, parse_power()});
      else return lhs;
    }
  }

  NodePtr parse_power() {
    NodePtr base = parse_unary();
    if (accept('^')) return make_op(Op::pow, {base, parse_power()});
    return base;
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_op(Op::neg, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_primary();
  }

  double constant_arg() {
    NodePtr n = parse_sum();
    if (!node_constant(*n)) fail("argument must be a constant expression");
    return eval_node(*n, {}).v;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr n = parse_sum();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    char* end = nullptr;
    const std::string tmp(text_.substr(pos_));
    const double v = std::strtod(tmp.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - tmp.c_str());
    if (used == 0) fail("malformed number");
    pos_ += used;
    return make_const(v);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "x") return make_op(Op::var_x, {});
    if (name == "y") return make_op(Op::var_y, {});
    if (name == "r") return make_op(Op::var_r, {});
    if (name == "r2") return make_op(Op::var_r2, {});
    if (name == "pi") return make_const(std::numbers::pi);

    struct Unary { const char* name; Op op; };
    static constexpr Unary unary[] = {
        {"exp", Op::exp}, {"log", Op::log}, {"sqrt", Op::sqrt}, {"sin", Op::sin},
        {"cos", Op::cos}, {"tanh", Op::tanh}, {"abs", Op::abs}};
    for (const auto& u : unary) {
      if (name == u.name) {
        expect('(');
        NodePtr a = parse_sum();
        expect(')');
        return make_op(u.op, {a});
      }
    }
    if (name == "gauss" || name == "bump") {
      expect('(');
      auto n = std::make_shared<Expr::Node>();
      n->op = (name == "gauss") ? Op::gauss : Op::bump;
      n->params[0] = constant_arg();
      expect(',');
      n->params[1] = constant_arg();
      expect(',');
      n->params[2] = constant_arg();
      expect(')');
      if (!(n->params[2] > 0.0)) fail(name + " width/radius must be positive");
      return n;
    }
    if (name == "ring") {
      expect('(');
      auto n = std::make_shared<Expr::Node>();
      n->op = Op::ring;
      n->params[0] = constant_arg();
      expect(',');
      n->params[1] = constant_arg();
      expect(')');
      if (!(n->params[1] > 0.0)) fail("ring width must be positive");
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr() : root_(make_const(0.0)) {}

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }

Expr Expr::constant(double value) { return Expr(make_const(value)); }

Dual Expr::eval(Vec2 p) const { return eval_node(*root_, p); }

std::string Expr::canonical() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

std::uint64_t Expr::hash() const { return fnv1a(canonical()); }

bool Expr::is_constant() const { return node_constant(*root_); }

}  // namespace dnlens
