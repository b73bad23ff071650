#pragma once

#include "fbh/jet.hpp"

#include <json.hpp>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fbh {

// Smooth scalar expression over chart coordinates x0, x1, ...
// Built from a closed set of constructors so every expression can be
// evaluated on plain doubles and on jets, and serialized to JSON.
class Expr {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Log, Sin, Cos, Sqrt, Atan };

  Expr() : Expr(0.0) {}
  Expr(double c);  // NOLINT implicit on purpose
  static Expr var(int i);

  Op op() const;
  bool is_constant() const;
  double constant_value() const;
  // Largest variable index referenced, -1 if none.
  int max_var() const;

  double eval(std::span<const double> x) const;
  Jet eval(std::span<const Jet> x) const;

  // Replaces variable i by vars[i].
  Expr substitute(std::span<const Expr> vars) const;
  // Replaces variable i by variable i + offset.
  Expr shifted(int offset) const;

  // JSON form: number | "x<i>" | coordinate name | [op, args...].
  nlohmann::json to_json() const;
  static Expr from_json(const nlohmann::json& j, std::span<const std::string> coord_names = {});

  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, double p);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr atan(const Expr& a);

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
  static Expr make(Op op, std::vector<Expr> args, double value = 0.0, int index = -1);
  template <class T>
  T eval_t(std::span<const T> x) const;

  std::shared_ptr<const Node> n_;
};

struct Expr::Node {
  Op op;
  double value = 0.0;  // Const value, Pow exponent
  int index = -1;      // Var index
  std::vector<Expr> args;
};

// Vector of expressions, e.g. map components or a vector field.
using ExprVec = std::vector<Expr>;

// Convenience: x_i as expressions for i < n.
ExprVec coordinate_exprs(int n, int offset = 0);

}  // namespace fbh
