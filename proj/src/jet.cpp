#include "fbh/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fbh {

using Exponent = std::array<std::int8_t, kMaxJetVars>;

struct MonomialTable {
  int nvars = 0;
  std::vector<Exponent> exps;
  std::vector<int> degree;
  std::vector<double> factorial;                  // alpha!
  std::array<std::size_t, kMaxJetOrder + 2> count{};  // monomials with degree <= d
  std::map<Exponent, std::uint32_t> index;

  struct Triple { std::uint32_t i, j, k; };
  std::vector<Triple> triples;                    // sorted by degree of k
  std::array<std::size_t, kMaxJetOrder + 1> triple_end{};

  struct DerivEntry { std::uint32_t src, dst; double factor; };
  std::vector<std::vector<DerivEntry>> deriv;     // per variable, sorted by src degree

  std::vector<std::uint32_t> parent;              // monomial with one less power of parent_var
  std::vector<int> parent_var;
  std::vector<std::vector<std::uint32_t>> idx2;   // degree-2 monomial e_i + e_j
};

namespace {

void enumerate(int nvars, int deg, int var, Exponent& cur, std::vector<Exponent>& out) {
  if (var == nvars - 1) {
    cur[var] = static_cast<std::int8_t>(deg);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = deg; e >= 0; --e) {
    cur[var] = static_cast<std::int8_t>(e);
    enumerate(nvars, deg - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

std::unique_ptr<MonomialTable> build_table(int nvars) {
  auto t = std::make_unique<MonomialTable>();
  t->nvars = nvars;
  for (int d = 0; d <= kMaxJetOrder; ++d) {
    Exponent cur{};
    std::vector<Exponent> level;
    enumerate(nvars, d, 0, cur, level);
    for (const auto& e : level) {
      t->index[e] = static_cast<std::uint32_t>(t->exps.size());
      t->exps.push_back(e);
      t->degree.push_back(d);
      double f = 1.0;
      for (int v = 0; v < nvars; ++v)
        for (int k = 2; k <= e[v]; ++k) f *= k;
      t->factorial.push_back(f);
    }
    t->count[d] = t->exps.size();
  }
  t->count[kMaxJetOrder + 1] = t->exps.size();

  const auto n = t->exps.size();
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (t->degree[i] + t->degree[j] > kMaxJetOrder) continue;
      Exponent s{};
      for (int v = 0; v < nvars; ++v) s[v] = static_cast<std::int8_t>(t->exps[i][v] + t->exps[j][v]);
      t->triples.push_back({i, j, t->index.at(s)});
    }
  }
  std::stable_sort(t->triples.begin(), t->triples.end(), [&](const auto& a, const auto& b) {
    if (t->degree[a.k] != t->degree[b.k]) return t->degree[a.k] < t->degree[b.k];
    return a.k < b.k;
  });
  for (int d = 0; d <= kMaxJetOrder; ++d) {
    t->triple_end[d] = static_cast<std::size_t>(
        std::partition_point(t->triples.begin(), t->triples.end(),
                             [&](const auto& tr) { return t->degree[tr.k] <= d; }) -
        t->triples.begin());
  }

  t->deriv.resize(nvars);
  for (int v = 0; v < nvars; ++v) {
    for (std::uint32_t s = 0; s < n; ++s) {
      if (t->exps[s][v] == 0) continue;
      Exponent d = t->exps[s];
      d[v] = static_cast<std::int8_t>(d[v] - 1);
      t->deriv[v].push_back({s, t->index.at(d), static_cast<double>(t->exps[s][v])});
    }
  }

  t->parent.assign(n, 0);
  t->parent_var.assign(n, -1);
  for (std::uint32_t s = 1; s < n; ++s) {
    for (int v = 0; v < nvars; ++v) {
      if (t->exps[s][v] > 0) {
        Exponent p = t->exps[s];
        p[v] = static_cast<std::int8_t>(p[v] - 1);
        t->parent[s] = t->index.at(p);
        t->parent_var[s] = v;
        break;
      }
    }
  }

  t->idx2.assign(nvars, std::vector<std::uint32_t>(nvars, 0));
  for (int a = 0; a < nvars; ++a)
    for (int b = 0; b < nvars; ++b) {
      Exponent e{};
      e[a] = static_cast<std::int8_t>(e[a] + 1);
      e[b] = static_cast<std::int8_t>(e[b] + 1);
      t->idx2[a][b] = t->index.at(e);
    }
  return t;
}

const MonomialTable* table_for(int nvars) {
  if (nvars < 1 || nvars > kMaxJetVars)
    throw std::invalid_argument("jet variable count out of range: " + std::to_string(nvars));
  static std::array<std::unique_ptr<MonomialTable>, kMaxJetVars + 1> tables;
  static std::array<std::once_flag, kMaxJetVars + 1> flags;
  std::call_once(flags[nvars], [&] { tables[nvars] = build_table(nvars); });
  return tables[nvars].get();
}

void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder)
    throw std::invalid_argument("jet order out of range: " + std::to_string(order));
}

}  // namespace

Jet make_jet(const MonomialTable* t, int order, Jet::Coeffs c) {
  Jet j;
  j.table_ = t;
  j.order_ = order;
  j.c_ = std::move(c);
  return j;
}

std::size_t monomial_count(int nvars, int order) {
  if (nvars == 0) return 1;
  return table_for(nvars)->count[order];
}

Jet Jet::variable(int nvars, int order, int index, double value) {
  check_order(order);
  const auto* t = table_for(nvars);
  Coeffs c(t->count[order], 0.0);
  c[0] = value;
  if (order >= 1) c[1 + index] = 1.0;
  return make_jet(t, order, std::move(c));
}

Jet Jet::constant(int nvars, int order, double value) {
  check_order(order);
  const auto* t = table_for(nvars);
  Coeffs c(t->count[order], 0.0);
  c[0] = value;
  return make_jet(t, order, std::move(c));
}

int Jet::nvars() const { return table_ ? table_->nvars : 0; }

double Jet::coeff(std::span<const int> alpha) const {
  int deg = 0;
  Exponent e{};
  for (std::size_t v = 0; v < alpha.size(); ++v) {
    if (alpha[v] == 0) continue;
    if (static_cast<int>(v) >= nvars()) return 0.0;
    e[v] = static_cast<std::int8_t>(alpha[v]);
    deg += alpha[v];
  }
  if (deg == 0) return c_[0];
  if (!table_) return 0.0;
  if (deg > order_) throw std::out_of_range("jet coefficient beyond truncation order");
  return c_[table_->index.at(e)];
}

double Jet::derivative(std::span<const int> alpha) const {
  double f = 1.0;
  for (int a : alpha)
    for (int k = 2; k <= a; ++k) f *= k;
  return f * coeff(alpha);
}

double Jet::derivative1(int i) const {
  if (!table_) return 0.0;
  if (order_ < 1) throw std::out_of_range("jet order too low for first derivative");
  return c_[1 + i];
}

double Jet::derivative2(int i, int j) const {
  if (!table_) return 0.0;
  if (order_ < 2) throw std::out_of_range("jet order too low for second derivative");
  double v = c_[table_->idx2[i][j]];
  return i == j ? 2.0 * v : v;
}

Jet Jet::partial(int i) const {
  if (!table_) return Jet(0.0);
  if (order_ < 1) throw std::out_of_range("cannot differentiate an order-0 jet");
  const int k = order_ - 1;
  Coeffs r(table_->count[k], 0.0);
  for (const auto& d : table_->deriv[i]) {
    if (d.dst >= r.size()) break;
    r[d.dst] += d.factor * c_[d.src];
  }
  return make_jet(table_, k, std::move(r));
}

Jet Jet::truncated(int order) const {
  if (!table_ || order >= order_) return *this;
  Coeffs r(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(table_->count[order]));
  return make_jet(table_, order, std::move(r));
}

namespace {
void same_vars(const MonomialTable* ta, const MonomialTable* tb) {
  if (ta && tb && ta != tb) throw std::invalid_argument("jets over different variable sets");
}
}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  if (!o.table_) {
    c_[0] += o.c_[0];
    return *this;
  }
  if (!table_) {
    double v = c_[0];
    *this = o;
    c_[0] += v;
    return *this;
  }
  same_vars(table_, o.table_);
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (!o.table_) {
    c_[0] -= o.c_[0];
    return *this;
  }
  if (!table_) {
    double v = c_[0];
    *this = -o;
    c_[0] += v;
    return *this;
  }
  same_vars(table_, o.table_);
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (!a.table_) return b * a.c_[0];
  if (!b.table_) return a * b.c_[0];
  same_vars(a.table_, b.table_);
  const int k = std::min(a.order_, b.order_);
  const auto* t = a.table_;
  Jet::Coeffs r(t->count[k], 0.0);
  const auto end = t->triple_end[k];
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* pr = r.data();
  for (std::size_t q = 0; q < end; ++q) {
    const auto& tr = t->triples[q];
    pr[tr.k] += pa[tr.i] * pb[tr.j];
  }
  return make_jet(t, k, std::move(r));
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator/(const Jet& a, const Jet& b) {
  if (!b.table_) {
    if (b.c_[0] == 0.0) throw std::domain_error("jet division by zero");
    return a * (1.0 / b.c_[0]);
  }
  if (b.value() == 0.0) throw std::domain_error("jet division by zero");
  return a * b.apply_series(series_pow(b.value(), -1.0, b.order_));
}

Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }

Jet Jet::apply_series(std::span<const double> series) const {
  if (!table_) return Jet(series[0]);
  const int k = std::min<int>(order_, static_cast<int>(series.size()) - 1);
  Jet dx = truncated(k);
  dx.c_[0] = 0.0;
  Jet r = Jet::constant(table_->nvars, k, series[k]);
  for (int q = k - 1; q >= 0; --q) {
    r = r * dx;
    r.c_[0] += series[q];
  }
  return r;
}

std::vector<double> series_exp(double x0, int order) {
  std::vector<double> s(order + 1);
  double e = std::exp(x0), f = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) f *= k;
    s[k] = e / f;
  }
  return s;
}

std::vector<double> series_log(double x0, int order) {
  if (!(x0 > 0.0)) throw std::domain_error("log of non-positive value");
  std::vector<double> s(order + 1);
  s[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= order; ++k) {
    p *= x0;
    s[k] = ((k % 2 == 1) ? 1.0 : -1.0) / (k * p);
  }
  return s;
}

std::vector<double> series_sin(double x0, int order) {
  std::vector<double> s(order + 1);
  const double sv = std::sin(x0), cv = std::cos(x0);
  const double cyc[4] = {sv, cv, -sv, -cv};
  double f = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) f *= k;
    s[k] = cyc[k % 4] / f;
  }
  return s;
}

std::vector<double> series_cos(double x0, int order) {
  std::vector<double> s(order + 1);
  const double sv = std::sin(x0), cv = std::cos(x0);
  const double cyc[4] = {cv, -sv, -cv, sv};
  double f = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) f *= k;
    s[k] = cyc[k % 4] / f;
  }
  return s;
}

std::vector<double> series_pow(double x0, double a, int order) {
  if (!(x0 > 0.0)) throw std::domain_error("non-integer power of non-positive value");
  std::vector<double> s(order + 1);
  double binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) binom *= (a - (k - 1)) / k;
    s[k] = binom * std::pow(x0, a - k);
  }
  return s;
}

std::vector<double> series_atan(double x0, int order) {
  // atan' = 1/(1+x^2); expand the reciprocal of 1 + (x0+t)^2 first.
  std::vector<double> s(order + 1, 0.0);
  s[0] = std::atan(x0);
  if (order == 0) return s;
  const double q0 = 1.0 + x0 * x0, q1 = 2.0 * x0, q2 = 1.0;
  std::vector<double> r(order, 0.0);
  r[0] = 1.0 / q0;
  for (int k = 1; k < order; ++k) {
    double acc = q1 * r[k - 1];
    if (k >= 2) acc += q2 * r[k - 2];
    r[k] = -acc / q0;
  }
  for (int k = 1; k <= order; ++k) s[k] = r[k - 1] / k;
  return s;
}

namespace {
int series_order(const Jet& x) { return x.is_constant() ? 0 : x.order(); }
}  // namespace

Jet exp(const Jet& x) { return x.apply_series(series_exp(x.value(), series_order(x))); }
Jet log(const Jet& x) { return x.apply_series(series_log(x.value(), series_order(x))); }
Jet sin(const Jet& x) { return x.apply_series(series_sin(x.value(), series_order(x))); }
Jet cos(const Jet& x) { return x.apply_series(series_cos(x.value(), series_order(x))); }
Jet sqrt(const Jet& x) { return x.apply_series(series_pow(x.value(), 0.5, series_order(x))); }
Jet atan(const Jet& x) { return x.apply_series(series_atan(x.value(), series_order(x))); }

Jet ipow(const Jet& x, int n) {
  if (n < 0) return Jet(1.0) / ipow(x, -n);
  Jet r(1.0), b = x;
  while (n > 0) {
    if (n & 1) r = r * b;
    n >>= 1;
    if (n > 0) b = b * b;
  }
  return r;
}

Jet pow(const Jet& x, double a) {
  if (a == std::round(a) && std::abs(a) <= 64) return ipow(x, static_cast<int>(a));
  return x.apply_series(series_pow(x.value(), a, series_order(x)));
}

Composer::Composer(std::span<const Jet> inner) {
  n_outer_ = static_cast<int>(inner.size());
  const MonomialTable* t = nullptr;
  order_ = kConstantOrder;
  for (const auto& y : inner) {
    if (y.is_constant()) continue;
    if (t && t != y.table_) throw std::invalid_argument("inner jets over different variable sets");
    t = y.table_;
    order_ = std::min(order_, y.order());
  }
  if (!t || n_outer_ == 0) {
    order_ = 0;
    powers_.assign(1, Jet(1.0));
    return;
  }
  const auto* to = table_for(n_outer_);
  const auto n = to->count[order_];
  std::vector<Jet> dy;
  dy.reserve(inner.size());
  for (const auto& y : inner) {
    if (y.is_constant()) {
      dy.emplace_back(0.0);
    } else {
      Jet d = y.truncated(order_);
      d.c_[0] = 0.0;
      dy.push_back(std::move(d));
    }
  }
  powers_.resize(n);
  powers_[0] = Jet(1.0);
  for (std::size_t b = 1; b < n; ++b) powers_[b] = powers_[to->parent[b]] * dy[to->parent_var[b]];
}

Jet Composer::compose(const Jet& outer) const {
  if (outer.is_constant()) return outer;
  if (outer.nvars() != n_outer_) throw std::invalid_argument("outer jet has wrong variable count");
  const int k = std::min(order_, outer.order());
  const auto* to = outer.table_;
  const auto nb = to->count[k];
  const MonomialTable* ti = nullptr;
  for (std::size_t b = 0; b < nb && !ti; ++b) ti = powers_[b].table_;
  if (!ti) return Jet(outer.c_[0]);
  Jet::Coeffs r(ti->count[k], 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const double w = outer.c_[b];
    if (w == 0.0) continue;
    const auto& p = powers_[b];
    if (p.is_constant()) {
      r[0] += w * p.c_[0];
      continue;
    }
    const std::size_t m = std::min(r.size(), p.c_.size());
    for (std::size_t q = 0; q < m; ++q) r[q] += w * p.c_[q];
  }
  return make_jet(ti, k, std::move(r));
}

}  // namespace fbh
