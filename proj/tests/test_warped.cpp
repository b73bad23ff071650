#include "fbh/errors.hpp"
#include "fbh/warped.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fbh;
using std::numbers::pi;

namespace {

ChartManifold line(const std::string& name, double lo, double hi, bool periodic = false) {
  return ChartManifold::diagonal(name, {name}, {{lo, hi, periodic}}, {Expr(1.0)});
}

// (0, pi) x_{sin t} S^1, the round sphere without poles.
WarpedProduct sphere_wp() {
  return WarpedProduct::singly(line("t", 0.1, pi - 0.1), line("s", 0.0, 2 * pi, true), sin(Expr::var(0)));
}

WarpedProduct hyperbolic_wp() {
  return WarpedProduct::singly(line("t", -1.5, 1.5), line("s", -2.0, 2.0), exp(Expr::var(0)));
}

// Curved 2-dim base with an off-diagonal metric, S^2 chart fiber.
WarpedProduct generic_wp() {
  Expr u = Expr::var(0), v = Expr::var(1);
  ChartManifold base("B", {"u", "v"}, {{-1.0, 1.0, false}, {-1.0, 1.0, false}},
                     {1.0 + 0.3 * u * u, 0.2 * sin(u + v), exp(0.4 * v)});
  Expr th = Expr::var(0);
  ChartManifold fib = ChartManifold::diagonal("S2", {"th", "ph"}, {{0.4, pi - 0.4, false}, {0.0, 2 * pi, true}},
                                              {Expr(1.0), sin(th) * sin(th)});
  return WarpedProduct::singly(base, fib, 2.0 + sin(u) * cos(0.7 * v) + 0.3 * u * v);
}

std::vector<double> random_vec(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = n(rng);
  return v;
}

// Random vector field with polynomial and trigonometric components.
ExprVec random_field(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  ExprVec y;
  for (int k = 0; k < d; ++k) {
    Expr e = n(rng);
    for (int i = 0; i < d; ++i) e = e + n(rng) * Expr::var(i) + 0.3 * n(rng) * sin(Expr::var(i) * Expr::var((i + 1) % d));
    y.push_back(e);
  }
  return y;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Warped, MetricValues) {
  const auto s = sphere_wp();
  const auto g = warped_metric_at(s, Point{{pi / 2, 1.0}});
  EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g(1, 1), 1.0, 1e-15);
  EXPECT_EQ(g(0, 1), 0.0);
  const auto h = warped_metric_at(hyperbolic_wp(), Point{{0.3, 0.0}});
  EXPECT_NEAR(h(1, 1), std::exp(0.6), 1e-14);
  const auto d = WarpedProduct::direct(line("a", -1, 1), line("b", -1, 1));
  const auto gd = warped_metric_at(d, Point{{0.2, 0.1}});
  EXPECT_TRUE(gd.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_TRUE(as_chart_manifold(d).has_constant_metric());
}

TEST(Warped, DoublyWarpedBlocks) {
  Expr x = Expr::var(0);
  WarpedProduct w(line("a", -1, 1), line("b", -1, 1), 2.0 + x, 3.0 + x, WarpKind::doubly);
  const auto g = warped_metric_at(w, Point{{0.5, -0.25}});
  EXPECT_NEAR(g(0, 0), 2.75 * 2.75, 1e-14);
  EXPECT_NEAR(g(1, 1), 2.5 * 2.5, 1e-14);
}

TEST(Warped, KindAndPositivityAreChecked) {
  Expr x = Expr::var(0);
  EXPECT_THROW(WarpedProduct(line("a", -1, 1), line("b", -1, 1), 2.0 + x, 2.0 + x, WarpKind::singly_lambda),
               WrongKind);
  EXPECT_THROW(WarpedProduct::singly(line("a", -1, 1), line("b", -1, 1), x), NonPositiveWeight);
  WarpedProduct doubly(line("a", -1, 1), line("b", -1, 1), 2.0 + x, 2.0 + x, WarpKind::doubly);
  BlockVector e{Point{{0.0, 0.0}}, {1.0}, {0.0}};
  EXPECT_THROW(closed_form_curvature(doubly, e, e, e), WrongKind);
  EXPECT_THROW(closed_form_connection(doubly, e, {Expr(1.0), Expr(0.0)}), WrongKind);
}

TEST(Warped, FlattenedChartCurvature) {
  std::mt19937_64 rng(11);
  const auto s = as_chart_manifold(sphere_wp());
  const auto h = as_chart_manifold(hyperbolic_wp());
  for (int k = 0; k < 3; ++k) {
    const Point p = s.sample(rng), q = h.sample(rng);
    const std::vector<double> a = {1, 0}, b = {0, 1};
    const auto rs = riemann_apply(s, p, a, b, b);
    const auto rh = riemann_apply(h, q, a, b, b);
    EXPECT_NEAR(inner(s, p, rs, a) / (inner(s, p, a, a) * inner(s, p, b, b)), 1.0, 1e-12);
    EXPECT_NEAR(inner(h, q, rh, a) / (inner(h, q, a, a) * inner(h, q, b, b)), -1.0, 1e-12);
  }
}

TEST(Warped, ConnectionExamples) {
  const auto w = hyperbolic_wp();
  // X = Y = (0, d_s) at the origin: -1/2 grad lambda^2 = (-1, 0)
  const auto a = closed_form_connection(w, {Point{{0.0, 0.0}}, {0.0}, {1.0}}, {Expr(0.0), Expr(1.0)});
  EXPECT_NEAR(a.x1[0], -1.0, 1e-14);
  EXPECT_NEAR(a.x2[0], 0.0, 1e-14);
  const auto b = closed_form_connection(w, {Point{{0.0, 0.0}}, {1.0}, {0.0}}, {Expr(0.0), Expr(1.0)});
  EXPECT_NEAR(b.x1[0], 0.0, 1e-14);
  EXPECT_NEAR(b.x2[0], 1.0, 1e-14);
  const auto oracle = covariant_derivative_vf(w.chart(), {Point{{0.0, 0.0}}, {0.0, 1.0}}, {Expr(0.0), Expr(1.0)});
  EXPECT_NEAR(oracle[0], -1.0, 1e-14);
}

TEST(Warped, ConnectionMatchesOracle) {
  const auto w = generic_wp();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Point p = w.chart().sample(rng);
    const auto xv = random_vec(rng, 4);
    const auto y = random_field(rng, 4);
    const auto cf = closed_form_connection(w, BlockVector::split(w, p, xv), y).stacked();
    const auto oracle = covariant_derivative_vf(w.chart(), {p, xv}, y);
    worst = std::max(worst, max_diff(cf, oracle));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(Warped, CurvatureMatchesOracleAndFormsAgree) {
  for (const auto& w : {generic_wp(), sphere_wp(), hyperbolic_wp()}) {
    const int d = w.m() + w.n();
    std::mt19937_64 rng(77);
    double worst = 0.0, forms = 0.0;
    for (int s = 0; s < 100; ++s) {
      const Point p = w.chart().sample(rng);
      const auto xv = random_vec(rng, d), yv = random_vec(rng, d), zv = random_vec(rng, d);
      const auto X = BlockVector::split(w, p, xv), Y = BlockVector::split(w, p, yv),
                 Z = BlockVector::split(w, p, zv);
      const auto a = closed_form_curvature(w, X, Y, Z).stacked();
      const auto b = closed_form_curvature_squared(w, X, Y, Z).stacked();
      const auto c = closed_form_curvature_wedge(w, X, Y, Z).stacked();
      worst = std::max(worst, max_diff(a, riemann_apply(w.chart(), p, xv, yv, zv)));
      forms = std::max({forms, max_diff(a, b), max_diff(a, c)});
    }
    EXPECT_LE(worst, 1e-8) << w.chart().name();
    EXPECT_LE(forms, 1e-10) << w.chart().name();
  }
}

TEST(Warped, SphereFiberAndMixedInputs) {
  const auto w = sphere_wp();
  const Point p{{pi / 3, 0.5}};
  const BlockVector f{p, {0.0}, {1.0}}, t{p, {1.0}, {0.0}};
  const auto a = closed_form_curvature(w, f, f, f).stacked();
  EXPECT_LE(max_diff(a, riemann_apply(w.chart(), p, f.stacked(), f.stacked(), f.stacked())), 1e-8);
  const auto b = closed_form_curvature(w, t, f, f).stacked();
  const auto o = riemann_apply(w.chart(), p, t.stacked(), f.stacked(), f.stacked());
  EXPECT_LE(max_diff(b, o), 1e-8);
  // R(d_t, d_s) d_s = sin^2 t d_t on the unit sphere
  EXPECT_NEAR(b[0], std::sin(pi / 3) * std::sin(pi / 3), 1e-12);
}

TEST(Warped, ConstantWarpingReducesToProduct) {
  const auto base = generic_wp().base();
  const auto fib = generic_wp().fiber();
  const auto c = WarpedProduct::singly(base, fib, Expr(1.7));
  const auto d = WarpedProduct::direct(base, fib);
  std::mt19937_64 rng(5);
  for (int s = 0; s < 10; ++s) {
    const Point p = d.chart().sample(rng);
    const auto X = BlockVector::split(d, p, random_vec(rng, 4)), Y = BlockVector::split(d, p, random_vec(rng, 4)),
               Z = BlockVector::split(d, p, random_vec(rng, 4));
    const auto r = closed_form_curvature(d, X, Y, Z);
    const auto rc = closed_form_curvature(c, X, Y, Z);
    const auto rm = riemann_apply(base, d.base_point(p), X.x1, Y.x1, Z.x1);
    const auto rn = riemann_apply(fib, d.fiber_point(p), X.x2, Y.x2, Z.x2);
    EXPECT_EQ(r.x1, rm);
    EXPECT_EQ(r.x2, rn);
    EXPECT_EQ(rc.x1, rm);
    EXPECT_EQ(rc.x2, rn);
  }
}

TEST(Warped, WedgeIdentities) {
  const auto w = generic_wp();
  std::mt19937_64 rng(9);
  const Point p = w.chart().sample(rng);
  const auto x = BlockVector::split(w, p, random_vec(rng, 4));
  const auto y = BlockVector::split(w, p, random_vec(rng, 4));
  const auto z = BlockVector::split(w, p, random_vec(rng, 4));
  for (double v : wedge(w, x, x, z).stacked()) EXPECT_NEAR(v, 0.0, 1e-13);
  const auto a = wedge(w, x, y, z).stacked(), b = wedge(w, y, x, z).stacked();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], -b[i], 1e-13);
  const auto g = warped_metric_at(w, p);
  const auto xs = x.stacked(), ys = y.stacked(), zs = z.stacked();
  double gyz = 0, gxz = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      gyz += g(i, j) * ys[i] * zs[j];
      gxz += g(i, j) * xs[i] * zs[j];
    }
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], gyz * xs[i] - gxz * ys[i], 1e-12);
  // unit Z orthogonal to X, Y = Z: result is X
  const auto sp = sphere_wp();
  const Point q{{pi / 2, 0.0}};
  const auto r = wedge(sp, {q, {1.0}, {0.0}}, {q, {0.0}, {1.0}}, {q, {0.0}, {1.0}});
  EXPECT_NEAR(r.x1[0], 1.0, 1e-15);
  EXPECT_NEAR(r.x2[0], 0.0, 1e-15);
}
