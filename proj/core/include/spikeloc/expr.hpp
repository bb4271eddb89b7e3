// Scalar expressions over x1..x3: parser, evaluator, exact gradients.
//
// Grammar: numbers, x1/x2/x3, + - * / ^ with the usual precedence, unary
// minus, parentheses, and the call forms exp, log, sin, cos, tanh, sqrt,
// abs. '^' binds tightest and associates to the right.
//
// Gradients are forward-mode and exact for smooth expressions. At an abs
// kink the one-sided convention derivative is 0 and the result is flagged
// nonsmooth; the same convention covers sqrt and fractional powers at the
// origin of their domain. Domain faults (log of a nonpositive value,
// division by zero, negative base under a fractional power) throw
// EvalDomainError rather than returning NaN.
#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace spikeloc {

struct ExprGrad {
  std::array<double, 3> g{0.0, 0.0, 0.0};
  bool nonsmooth = false;  // a kink convention fired at this point
};

class Expr {
 public:
  Expr() = default;

  // Throws ExprSyntaxError / UnknownIdentifier. dim in 1..3 bounds which
  // variables may appear.
  static Expr parse(std::string_view src, int dim);

  // A constant expression (no variables); dim still bounds eval points.
  static Expr constant(double value, int dim);

  double eval(std::span<const double> x) const;
  ExprGrad grad(std::span<const double> x) const;

  // Canonical rendering; parsing it back yields a structurally identical
  // tree. Empty expressions render as "0".
  std::string str() const;

  int dim() const { return dim_; }
  bool empty() const { return root_ == nullptr; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  int dim_ = 0;
};

}  // namespace spikeloc
