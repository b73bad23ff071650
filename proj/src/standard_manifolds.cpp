#include "fbh/standard_manifolds.hpp"

#include <numbers>

namespace fbh {

namespace {
std::vector<std::string> axis_names(int n) {
  std::vector<std::string> r;
  for (int i = 0; i < n; ++i) r.push_back("x" + std::to_string(i));
  return r;
}
}  // namespace

ChartManifold flat_torus(int n, double period) {
  return ChartManifold::diagonal("T" + std::to_string(n), axis_names(n),
                                 std::vector<Interval>(n, Interval{0.0, period, true}), std::vector<Expr>(n, 1.0));
}

ChartManifold flat_box(int n, double lo, double hi) {
  return ChartManifold::diagonal("R" + std::to_string(n), axis_names(n),
                                 std::vector<Interval>(n, Interval{lo, hi, false}), std::vector<Expr>(n, 1.0));
}

ChartManifold sphere_chart(double delta) {
  const Expr t = Expr::var(0);
  return ChartManifold::diagonal("S2", {"theta", "phi"},
                                 {{delta, std::numbers::pi - delta, false}, {0.0, 2 * std::numbers::pi, true}},
                                 {Expr(1.0), sin(t) * sin(t)});
}

ChartManifold hyperbolic_chart(double w) {
  const Expr t = Expr::var(0);
  return ChartManifold::diagonal("H2", {"t", "y"}, {{-w, w, false}, {-w, w, false}}, {Expr(1.0), exp(2.0 * t)});
}

ChartManifold conformally_flat_box(int n, double lo, double hi, const Expr& u) {
  return ChartManifold::diagonal("R" + std::to_string(n) + "_conformal", axis_names(n),
                                 std::vector<Interval>(n, Interval{lo, hi, false}), std::vector<Expr>(n, exp(2.0 * u)));
}

ChartManifold conformal_torus(int n, const Expr& u, double period) {
  return ChartManifold::diagonal("T" + std::to_string(n) + "_conformal", axis_names(n),
                                 std::vector<Interval>(n, Interval{0.0, period, true}), std::vector<Expr>(n, exp(2.0 * u)));
}

ChartManifold interval(const std::string& name, double lo, double hi, bool periodic) {
  return ChartManifold::diagonal(name, {name}, {{lo, hi, periodic}}, {Expr(1.0)});
}

}  // namespace fbh
