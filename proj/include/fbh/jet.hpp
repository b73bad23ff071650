#pragma once

#include <boost/container/small_vector.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace fbh {

// Truncated multivariate Taylor polynomial around a base point.
// A jet with nvars variables and order K stores the coefficients
// c_alpha of monomials delta^alpha with |alpha| <= K, so that
// d^alpha F(base) = alpha! * c_alpha.  Monomials are graded: every
// lower-order jet is a prefix of a higher-order one.
//
// A jet without variables is a plain constant of unbounded order and
// broadcasts against any other jet.

inline constexpr int kMaxJetOrder = 6;
inline constexpr int kMaxJetVars = 10;
inline constexpr int kConstantOrder = 1 << 20;

struct MonomialTable;

class Jet {
 public:
  using Coeffs = boost::container::small_vector<double, 16>;

  Jet() : order_(kConstantOrder), c_(1, 0.0) {}
  Jet(double v) : order_(kConstantOrder), c_(1, v) {}  // NOLINT implicit on purpose

  static Jet variable(int nvars, int order, int index, double value);
  static Jet constant(int nvars, int order, double value);

  bool is_constant() const { return table_ == nullptr; }
  int nvars() const;
  int order() const { return order_; }
  double value() const { return c_[0]; }
  const Coeffs& coeffs() const { return c_; }

  // Taylor coefficient / partial derivative at the base point.
  double coeff(std::span<const int> alpha) const;
  double derivative(std::span<const int> alpha) const;
  double derivative1(int i) const;
  double derivative2(int i, int j) const;

  // d/d delta_i; the result has order one lower.
  Jet partial(int i) const;
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator*=(double s);
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  // f(x) where the univariate Taylor coefficients of f at value() are given.
  Jet apply_series(std::span<const double> series) const;

  // Outer jet (in n variables around q) evaluated along inner jets.
  friend class Composer;
  friend Jet make_jet(const MonomialTable*, int, Coeffs);

 private:
  const MonomialTable* table_ = nullptr;
  int order_;
  Coeffs c_;
};

Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet sqrt(const Jet& x);
Jet atan(const Jet& x);
Jet pow(const Jet& x, double a);
Jet ipow(const Jet& x, int n);

// Number of monomials of degree <= order in nvars variables.
std::size_t monomial_count(int nvars, int order);

// Evaluates many outer jets (all in the same n variables, expanded
// around q) along the same inner jets y_a with y_a(0) = q_a.
class Composer {
 public:
  explicit Composer(std::span<const Jet> inner);
  Jet compose(const Jet& outer) const;

 private:
  int n_outer_ = 0;
  int order_ = 0;
  std::vector<Jet> powers_;  // inner monomials (y - q)^beta, graded
};

// Univariate Taylor coefficients f^(k)(x0)/k!, k = 0..order.
std::vector<double> series_exp(double x0, int order);
std::vector<double> series_log(double x0, int order);
std::vector<double> series_sin(double x0, int order);
std::vector<double> series_cos(double x0, int order);
std::vector<double> series_pow(double x0, double a, int order);
std::vector<double> series_atan(double x0, int order);

}  // namespace fbh
