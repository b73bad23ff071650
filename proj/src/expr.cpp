#include "fbh/expr.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fbh {

using nlohmann::json;

Expr::Expr(double c) : n_(std::make_shared<Node>(Node{Op::Const, c, -1, {}})) {}

Expr Expr::var(int i) {
  if (i < 0) throw std::invalid_argument("negative variable index");
  return Expr(std::make_shared<Node>(Node{Op::Var, 0.0, i, {}}));
}

Expr Expr::make(Op op, std::vector<Expr> args, double value, int index) {
  return Expr(std::make_shared<Node>(Node{op, value, index, std::move(args)}));
}

Expr::Op Expr::op() const { return n_->op; }
bool Expr::is_constant() const { return n_->op == Op::Const; }
double Expr::constant_value() const {
  if (!is_constant()) throw std::logic_error("expression is not a constant");
  return n_->value;
}

int Expr::max_var() const {
  if (n_->op == Op::Var) return n_->index;
  int m = -1;
  for (const auto& a : n_->args) m = std::max(m, a.max_var());
  return m;
}

namespace {
bool is_const(const Expr& e, double v) { return e.is_constant() && e.constant_value() == v; }
}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() + b.constant_value());
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return Expr::make(Expr::Op::Add, {a, b});
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() - b.constant_value());
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return -b;
  return Expr::make(Expr::Op::Sub, {a, b});
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() * b.constant_value());
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return Expr::make(Expr::Op::Mul, {a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
  if (is_const(b, 0.0)) throw std::domain_error("expression division by constant zero");
  if (a.is_constant() && b.is_constant()) return Expr(a.constant_value() / b.constant_value());
  if (is_const(a, 0.0)) return Expr(0.0);
  if (is_const(b, 1.0)) return a;
  return Expr::make(Expr::Op::Div, {a, b});
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.constant_value());
  return Expr::make(Expr::Op::Neg, {a});
}

Expr pow(const Expr& a, double p) {
  if (p == 0.0) return Expr(1.0);
  if (p == 1.0) return a;
  if (a.is_constant()) return Expr(std::pow(a.constant_value(), p));
  return Expr::make(Expr::Op::Pow, {a}, p);
}

#define FBH_UNARY(name, OP, fn)                                   \
  Expr name(const Expr& a) {                                      \
    if (a.is_constant()) return Expr(fn(a.constant_value()));     \
    return Expr::make(Expr::Op::OP, {a});                         \
  }
FBH_UNARY(exp, Exp, std::exp)
FBH_UNARY(log, Log, std::log)
FBH_UNARY(sin, Sin, std::sin)
FBH_UNARY(cos, Cos, std::cos)
FBH_UNARY(sqrt, Sqrt, std::sqrt)
FBH_UNARY(atan, Atan, std::atan)
#undef FBH_UNARY

namespace {
double ipow_d(double x, int n) {
  if (n < 0) return 1.0 / ipow_d(x, -n);
  double r = 1.0;
  while (n-- > 0) r *= x;
  return r;
}
double pow_d(double x, double p) {
  if (p == std::round(p) && std::abs(p) <= 64) return ipow_d(x, static_cast<int>(p));
  if (!(x > 0.0)) throw std::domain_error("non-integer power of non-positive value");
  return std::pow(x, p);
}
double log_d(double x) {
  if (!(x > 0.0)) throw std::domain_error("log of non-positive value");
  return std::log(x);
}
double sqrt_d(double x) {
  if (!(x > 0.0)) throw std::domain_error("sqrt of non-positive value");
  return std::sqrt(x);
}
}  // namespace

template <class T>
T Expr::eval_t(std::span<const T> x) const {
  const Node& n = *n_;
  switch (n.op) {
    case Op::Const: return T(n.value);
    case Op::Var:
      if (n.index >= static_cast<int>(x.size()))
        throw std::out_of_range("expression variable x" + std::to_string(n.index) + " not bound");
      return x[n.index];
    case Op::Add: return n.args[0].eval_t(x) + n.args[1].eval_t(x);
    case Op::Sub: return n.args[0].eval_t(x) - n.args[1].eval_t(x);
    case Op::Mul: return n.args[0].eval_t(x) * n.args[1].eval_t(x);
    case Op::Div: return n.args[0].eval_t(x) / n.args[1].eval_t(x);
    case Op::Neg: return -n.args[0].eval_t(x);
    case Op::Pow:
      if constexpr (std::is_same_v<T, double>) return pow_d(n.args[0].eval_t(x), n.value);
      else return pow(n.args[0].eval_t(x), n.value);
    case Op::Exp: { using std::exp; return exp(n.args[0].eval_t(x)); }
    case Op::Log:
      if constexpr (std::is_same_v<T, double>) return log_d(n.args[0].eval_t(x));
      else return log(n.args[0].eval_t(x));
    case Op::Sin: { using std::sin; return sin(n.args[0].eval_t(x)); }
    case Op::Cos: { using std::cos; return cos(n.args[0].eval_t(x)); }
    case Op::Sqrt:
      if constexpr (std::is_same_v<T, double>) return sqrt_d(n.args[0].eval_t(x));
      else return sqrt(n.args[0].eval_t(x));
    case Op::Atan: { using std::atan; return atan(n.args[0].eval_t(x)); }
  }
  throw std::logic_error("unknown expression node");
}

double Expr::eval(std::span<const double> x) const { return eval_t<double>(x); }
Jet Expr::eval(std::span<const Jet> x) const { return eval_t<Jet>(x); }

Expr Expr::substitute(std::span<const Expr> vars) const {
  const Node& n = *n_;
  switch (n.op) {
    case Op::Const: return *this;
    case Op::Var:
      if (n.index >= static_cast<int>(vars.size())) throw std::out_of_range("substitution misses a variable");
      return vars[n.index];
    case Op::Add: return n.args[0].substitute(vars) + n.args[1].substitute(vars);
    case Op::Sub: return n.args[0].substitute(vars) - n.args[1].substitute(vars);
    case Op::Mul: return n.args[0].substitute(vars) * n.args[1].substitute(vars);
    case Op::Div: return n.args[0].substitute(vars) / n.args[1].substitute(vars);
    case Op::Neg: return -n.args[0].substitute(vars);
    case Op::Pow: return pow(n.args[0].substitute(vars), n.value);
    case Op::Exp: return exp(n.args[0].substitute(vars));
    case Op::Log: return log(n.args[0].substitute(vars));
    case Op::Sin: return sin(n.args[0].substitute(vars));
    case Op::Cos: return cos(n.args[0].substitute(vars));
    case Op::Sqrt: return sqrt(n.args[0].substitute(vars));
    case Op::Atan: return atan(n.args[0].substitute(vars));
  }
  throw std::logic_error("unknown expression node");
}

Expr Expr::shifted(int offset) const {
  const int m = max_var();
  if (m < 0) return *this;
  std::vector<Expr> vars;
  for (int i = 0; i <= m; ++i) vars.push_back(Expr::var(i + offset));
  return substitute(vars);
}

namespace {
const std::map<std::string, Expr::Op>& unary_names() {
  static const std::map<std::string, Expr::Op> m = {
      {"exp", Expr::Op::Exp}, {"log", Expr::Op::Log},   {"sin", Expr::Op::Sin},
      {"cos", Expr::Op::Cos}, {"sqrt", Expr::Op::Sqrt}, {"atan", Expr::Op::Atan}};
  return m;
}
const char* op_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::Add: return "+";
    case Expr::Op::Sub: return "-";
    case Expr::Op::Mul: return "*";
    case Expr::Op::Div: return "/";
    case Expr::Op::Neg: return "-";
    case Expr::Op::Pow: return "^";
    case Expr::Op::Exp: return "exp";
    case Expr::Op::Log: return "log";
    case Expr::Op::Sin: return "sin";
    case Expr::Op::Cos: return "cos";
    case Expr::Op::Sqrt: return "sqrt";
    case Expr::Op::Atan: return "atan";
    default: return "?";
  }
}
}  // namespace

json Expr::to_json() const {
  const Node& n = *n_;
  if (n.op == Op::Const) return n.value;
  if (n.op == Op::Var) return "x" + std::to_string(n.index);
  json a = json::array();
  a.push_back(op_name(n.op));
  for (const auto& c : n.args) a.push_back(c.to_json());
  if (n.op == Op::Pow) a.push_back(n.value);
  return a;
}

Expr Expr::from_json(const json& j, std::span<const std::string> names) {
  if (j.is_number()) return Expr(j.get<double>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == s) return Expr::var(static_cast<int>(i));
    if (s == "pi") return Expr(M_PI);
    if (s.size() >= 2 && s[0] == 'x' && s.find_first_not_of("0123456789", 1) == std::string::npos)
      return Expr::var(std::stoi(s.substr(1)));
    throw std::invalid_argument("unknown expression symbol '" + s + "'");
  }
  if (!j.is_array() || j.empty() || !j[0].is_string())
    throw std::invalid_argument("expression must be a number, a symbol or [op, args...]");
  const auto op = j[0].get<std::string>();
  std::vector<Expr> args;
  for (std::size_t i = 1; i < j.size(); ++i) {
    if (op == "^" && i == 2) break;
    args.push_back(from_json(j[i], names));
  }
  auto need = [&](std::size_t k) {
    if (j.size() != k + 1) throw std::invalid_argument("operator '" + op + "' takes " + std::to_string(k) + " argument(s)");
  };
  if (op == "+" || op == "*") {
    if (args.empty()) throw std::invalid_argument("operator '" + op + "' needs arguments");
    Expr r = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) r = (op == "+") ? r + args[i] : r * args[i];
    return r;
  }
  if (op == "-") {
    if (args.size() == 1) return -args[0];
    need(2);
    return args[0] - args[1];
  }
  if (op == "/") {
    need(2);
    return args[0] / args[1];
  }
  if (op == "^") {
    need(2);
    if (!j[2].is_number()) throw std::invalid_argument("exponent must be a number");
    return pow(args[0], j[2].get<double>());
  }
  auto it = unary_names().find(op);
  if (it == unary_names().end()) throw std::invalid_argument("unknown expression operator '" + op + "'");
  need(1);
  switch (it->second) {
    case Op::Exp: return exp(args[0]);
    case Op::Log: return log(args[0]);
    case Op::Sin: return sin(args[0]);
    case Op::Cos: return cos(args[0]);
    case Op::Sqrt: return sqrt(args[0]);
    default: return atan(args[0]);
  }
}

std::string Expr::to_string() const { return to_json().dump(); }

ExprVec coordinate_exprs(int n, int offset) {
  ExprVec v;
  for (int i = 0; i < n; ++i) v.push_back(Expr::var(i + offset));
  return v;
}

}  // namespace fbh
