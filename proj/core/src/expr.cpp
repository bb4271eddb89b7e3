#include "spikeloc/expr.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "spikeloc/errors.hpp"

namespace spikeloc {

namespace {

enum class Fun { Abs, Cos, Exp, Log, Sin, Sqrt, Tanh };

constexpr std::pair<std::string_view, Fun> kFuns[] = {
    {"abs", Fun::Abs}, {"cos", Fun::Cos},   {"exp", Fun::Exp},  {"log", Fun::Log},
    {"sin", Fun::Sin}, {"sqrt", Fun::Sqrt}, {"tanh", Fun::Tanh}};

[[noreturn]] void syntax(std::string_view src, std::size_t pos, std::string_view what) {
  throw ExprSyntaxError(
      fmt::format("exprfield.parse: {} at position {} in \"{}\"", what, pos, src));
}

// Forward-mode value with up to three partials.
struct Dual {
  double v = 0.0;
  std::array<double, 3> d{0.0, 0.0, 0.0};
};

bool is_integer(double b) { return std::rint(b) == b && std::isfinite(b); }

double pow_checked(double a, double b, std::string_view who) {
  if (a > 0.0) return std::pow(a, b);
  if (a == 0.0) {
    if (b <= 0.0)
      throw EvalDomainError(fmt::format("exprfield.{}: 0^b with b = {} <= 0", who, b));
    return 0.0;
  }
  if (!is_integer(b))
    throw EvalDomainError(
        fmt::format("exprfield.{}: negative base {} under non-integer exponent {}", who, a, b));
  return std::pow(a, b);
}

}  // namespace

struct Expr::Node {
  enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call };
  Kind kind;
  double value = 0.0;   // Const
  int var = 0;          // Var, 0-based
  Fun fun = Fun::Abs;   // Call
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  NodePtr run() {
    auto e = sum();
    skip_ws();
    if (pos_ != src_.size()) syntax(src_, pos_, "trailing input");
    return e;
  }

 private:
  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
  int depth_ = 0;

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& p_) : p(p_) {
      if (++p.depth_ > 256) syntax(p.src_, p.pos_, "expression nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
  };

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr sum() {
    DepthGuard g(*this);
    auto lhs = product();
    for (;;) {
      if (eat('+')) {
        auto rhs = product();
        auto n = make(Kind::Add, std::move(lhs), std::move(rhs));
        lhs = std::move(n);
      } else if (eat('-')) {
        auto rhs = product();
        auto n = make(Kind::Sub, std::move(lhs), std::move(rhs));
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    DepthGuard g(*this);
    auto lhs = unary();
    for (;;) {
      if (eat('*')) {
        auto rhs = unary();
        auto n = make(Kind::Mul, std::move(lhs), std::move(rhs));
        lhs = std::move(n);
      } else if (eat('/')) {
        auto rhs = unary();
        auto n = make(Kind::Div, std::move(lhs), std::move(rhs));
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    DepthGuard g(*this);
    if (eat('-')) return make(Kind::Neg, unary());
    return power();
  }

  NodePtr power() {
    DepthGuard g(*this);
    auto base = atom();
    if (eat('^')) return make(Kind::Pow, std::move(base), unary());  // right-assoc
    return base;
  }

  NodePtr atom() {
    DepthGuard g(*this);
    skip_ws();
    if (pos_ >= src_.size()) syntax(src_, pos_, "unexpected end of input");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = sum();
      if (!eat(')')) syntax(src_, pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    syntax(src_, pos_, fmt::format("unexpected character '{}'", c));
  }

  NodePtr number() {
    double v = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) syntax(src_, pos_, "malformed number");
    pos_ = static_cast<std::size_t>(ptr - src_.data());
    auto n = make(Kind::Const);
    const_cast<Expr::Node&>(*n).value = v;
    return n;
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3') {
      int idx = name[1] - '1';
      if (idx >= dim_)
        throw UnknownIdentifier(fmt::format(
            "exprfield.parse: variable {} out of range for dimension {}", name, dim_));
      auto n = make(Kind::Var);
      const_cast<Expr::Node&>(*n).var = idx;
      return n;
    }
    for (auto [fname, fun] : kFuns) {
      if (name == fname) {
        if (!eat('(')) syntax(src_, pos_, fmt::format("expected '(' after {}", name));
        auto arg = sum();
        if (!eat(')')) syntax(src_, pos_, "expected ')'");
        auto n = make(Kind::Call, std::move(arg));
        const_cast<Expr::Node&>(*n).fun = fun;
        return n;
      }
    }
    throw UnknownIdentifier(
        fmt::format("exprfield.parse: unknown identifier \"{}\" at position {}", name, start));
  }
};

double eval_node(const Expr::Node& n, std::span<const double> x) {
  using K = Kind;
  switch (n.kind) {
    case K::Const: return n.value;
    case K::Var: return x[static_cast<std::size_t>(n.var)];
    case K::Add: return eval_node(*n.a, x) + eval_node(*n.b, x);
    case K::Sub: return eval_node(*n.a, x) - eval_node(*n.b, x);
    case K::Mul: return eval_node(*n.a, x) * eval_node(*n.b, x);
    case K::Div: {
      double den = eval_node(*n.b, x);
      if (den == 0.0) throw EvalDomainError("exprfield.eval: division by zero");
      return eval_node(*n.a, x) / den;
    }
    case K::Pow: return pow_checked(eval_node(*n.a, x), eval_node(*n.b, x), "eval");
    case K::Neg: return -eval_node(*n.a, x);
    case K::Call: {
      double a = eval_node(*n.a, x);
      switch (n.fun) {
        case Fun::Abs: return std::fabs(a);
        case Fun::Cos: return std::cos(a);
        case Fun::Exp: return std::exp(a);
        case Fun::Log:
          if (a <= 0.0)
            throw EvalDomainError(fmt::format("exprfield.eval: log of {} <= 0", a));
          return std::log(a);
        case Fun::Sin: return std::sin(a);
        case Fun::Sqrt:
          if (a < 0.0)
            throw EvalDomainError(fmt::format("exprfield.eval: sqrt of {} < 0", a));
          return std::sqrt(a);
        case Fun::Tanh: return std::tanh(a);
      }
      break;
    }
  }
  throw Error("exprfield.eval: corrupt node");
}

bool all_zero(const std::array<double, 3>& d) {
  return d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0;
}

Dual eval_dual(const Expr::Node& n, std::span<const double> x, bool& nonsmooth) {
  using K = Kind;
  Dual r;
  switch (n.kind) {
    case K::Const: r.v = n.value; return r;
    case K::Var:
      r.v = x[static_cast<std::size_t>(n.var)];
      r.d[static_cast<std::size_t>(n.var)] = 1.0;
      return r;
    case K::Add: {
      Dual a = eval_dual(*n.a, x, nonsmooth), b = eval_dual(*n.b, x, nonsmooth);
      r.v = a.v + b.v;
      for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] + b.d[i];
      return r;
    }
    case K::Sub: {
      Dual a = eval_dual(*n.a, x, nonsmooth), b = eval_dual(*n.b, x, nonsmooth);
      r.v = a.v - b.v;
      for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] - b.d[i];
      return r;
    }
    case K::Mul: {
      Dual a = eval_dual(*n.a, x, nonsmooth), b = eval_dual(*n.b, x, nonsmooth);
      r.v = a.v * b.v;
      for (int i = 0; i < 3; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
      return r;
    }
    case K::Div: {
      Dual a = eval_dual(*n.a, x, nonsmooth), b = eval_dual(*n.b, x, nonsmooth);
      if (b.v == 0.0) throw EvalDomainError("exprfield.grad: division by zero");
      r.v = a.v / b.v;
      for (int i = 0; i < 3; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
      return r;
    }
    case K::Pow: {
      Dual a = eval_dual(*n.a, x, nonsmooth), b = eval_dual(*n.b, x, nonsmooth);
      r.v = pow_checked(a.v, b.v, "grad");
      if (a.v > 0.0) {
        double la = std::log(a.v);
        for (int i = 0; i < 3; ++i)
          r.d[i] = r.v * (b.d[i] * la + b.v * a.d[i] / a.v);
      } else if (a.v == 0.0) {
        // b.v > 0 here; the exponent's own variation contributes 0 in the limit
        if (b.v > 1.0) {
          // derivative 0
        } else if (b.v == 1.0) {
          r.d = a.d;
        } else {
          nonsmooth = true;  // infinite one-sided slope; convention derivative 0
        }
      } else {
        // negative base, integer exponent; d/dx a^b = b a^{b-1} a' needs b' = 0
        if (!all_zero(b.d))
          throw EvalDomainError(
              "exprfield.grad: negative base with varying exponent");
        double s = b.v * std::pow(a.v, b.v - 1.0);
        for (int i = 0; i < 3; ++i) r.d[i] = s * a.d[i];
      }
      return r;
    }
    case K::Neg: {
      Dual a = eval_dual(*n.a, x, nonsmooth);
      r.v = -a.v;
      for (int i = 0; i < 3; ++i) r.d[i] = -a.d[i];
      return r;
    }
    case K::Call: {
      Dual a = eval_dual(*n.a, x, nonsmooth);
      double s = 0.0;  // chain factor
      switch (n.fun) {
        case Fun::Abs:
          if (a.v > 0.0) {
            s = 1.0;
          } else if (a.v < 0.0) {
            s = -1.0;
          } else {
            if (!all_zero(a.d)) nonsmooth = true;
            s = 0.0;  // kink convention
          }
          r.v = std::fabs(a.v);
          break;
        case Fun::Cos: r.v = std::cos(a.v); s = -std::sin(a.v); break;
        case Fun::Exp: r.v = std::exp(a.v); s = r.v; break;
        case Fun::Log:
          if (a.v <= 0.0)
            throw EvalDomainError(fmt::format("exprfield.grad: log of {} <= 0", a.v));
          r.v = std::log(a.v);
          s = 1.0 / a.v;
          break;
        case Fun::Sin: r.v = std::sin(a.v); s = std::cos(a.v); break;
        case Fun::Sqrt:
          if (a.v < 0.0)
            throw EvalDomainError(fmt::format("exprfield.grad: sqrt of {} < 0", a.v));
          r.v = std::sqrt(a.v);
          if (a.v == 0.0) {
            if (!all_zero(a.d)) nonsmooth = true;
            s = 0.0;
          } else {
            s = 0.5 / r.v;
          }
          break;
        case Fun::Tanh: r.v = std::tanh(a.v); s = 1.0 - r.v * r.v; break;
      }
      for (int i = 0; i < 3; ++i) r.d[i] = s * a.d[i];
      return r;
    }
  }
  throw Error("exprfield.grad: corrupt node");
}

// Rendering precedence: sum 1, product 2, negation 3, power 4, atoms 5.
int prec(const Expr::Node& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

void render(const Expr::Node& n, std::string& out);

void render_child(const Expr::Node& c, std::string& out, bool parens) {
  if (parens) out += '(';
  render(c, out);
  if (parens) out += ')';
}

void render(const Expr::Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::Const: {
      std::string s = fmt::format("{:.17g}", n.value);
      if (!s.empty() && s[0] == '-') {
        out += '(';
        out += s;
        out += ')';
      } else {
        out += s;
      }
      return;
    }
    case Kind::Var:
      out += 'x';
      out += static_cast<char>('1' + n.var);
      return;
    case Kind::Add:
      render_child(*n.a, out, prec(*n.a) < 1);
      out += " + ";
      render_child(*n.b, out, prec(*n.b) <= 1);
      return;
    case Kind::Sub:
      render_child(*n.a, out, prec(*n.a) < 1);
      out += " - ";
      render_child(*n.b, out, prec(*n.b) <= 1);
      return;
    case Kind::Mul:
      render_child(*n.a, out, prec(*n.a) < 2);
      out += "*";
      render_child(*n.b, out, prec(*n.b) <= 2);
      return;
    case Kind::Div:
      render_child(*n.a, out, prec(*n.a) < 2);
      out += "/";
      render_child(*n.b, out, prec(*n.b) <= 2);
      return;
    case Kind::Neg:
      out += '-';
      render_child(*n.a, out, prec(*n.a) <= 3);
      return;
    case Kind::Pow:
      render_child(*n.a, out, prec(*n.a) <= 4);
      out += '^';
      render_child(*n.b, out, prec(*n.b) < 3);
      return;
    case Kind::Call: {
      switch (n.fun) {
        case Fun::Abs: out += "abs"; break;
        case Fun::Cos: out += "cos"; break;
        case Fun::Exp: out += "exp"; break;
        case Fun::Log: out += "log"; break;
        case Fun::Sin: out += "sin"; break;
        case Fun::Sqrt: out += "sqrt"; break;
        case Fun::Tanh: out += "tanh"; break;
      }
      out += '(';
      render(*n.a, out);
      out += ')';
      return;
    }
  }
}

void check_dim(int dim, std::string_view who) {
  if (dim < 1 || dim > 3)
    throw BadDimension(fmt::format("exprfield.{}: dimension {} not in 1..3", who, dim));
}

void check_point(std::span<const double> x, int dim, std::string_view who) {
  if (static_cast<int>(x.size()) < dim)
    throw EvalDomainError(fmt::format("exprfield.{}: point has {} coordinates, need {}", who,
                                      x.size(), dim));
}

}  // namespace

Expr Expr::parse(std::string_view src, int dim) {
  check_dim(dim, "parse");
  Expr e;
  e.dim_ = dim;
  e.root_ = Parser(src, dim).run();
  return e;
}

Expr Expr::constant(double value, int dim) {
  check_dim(dim, "constant");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Const;
  n->value = value;
  Expr e;
  e.dim_ = dim;
  e.root_ = std::move(n);
  return e;
}

double Expr::eval(std::span<const double> x) const {
  if (!root_) throw Error("exprfield.eval: empty expression");
  check_point(x, dim_, "eval");
  return eval_node(*root_, x);
}

ExprGrad Expr::grad(std::span<const double> x) const {
  if (!root_) throw Error("exprfield.grad: empty expression");
  check_point(x, dim_, "grad");
  ExprGrad out;
  Dual d = eval_dual(*root_, x, out.nonsmooth);
  out.g = d.d;
  for (int i = dim_; i < 3; ++i) out.g[static_cast<std::size_t>(i)] = 0.0;
  return out;
}

std::string Expr::str() const {
  if (!root_) return "0";
  std::string out;
  render(*root_, out);
  return out;
}

}  // namespace spikeloc
