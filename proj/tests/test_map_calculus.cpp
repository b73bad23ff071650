#include "fbh/map_calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fbh;
using std::numbers::pi;

namespace {

Expr X(int i) { return Expr::var(i); }

ChartManifold flat(int d, double lo = -1.5, double hi = 1.5) {
  std::vector<std::string> names;
  std::vector<Interval> box;
  for (int i = 0; i < d; ++i) {
    names.push_back("u" + std::to_string(i));
    box.push_back({lo, hi, false});
  }
  return ChartManifold::diagonal("flat" + std::to_string(d), names, box, std::vector<Expr>(d, Expr(1.0)));
}

ChartManifold sphere() {
  return ChartManifold::diagonal("S2", {"theta", "phi"}, {{0.05, pi - 0.05, false}, {0.0, 2 * pi, true}},
                                 {Expr(1.0), sin(X(0)) * sin(X(0))});
}

ChartManifold circle(double radius = 1.0) {
  return ChartManifold::diagonal("S1", {"s"}, {{0.0, 2 * pi, true}}, {Expr(radius * radius)});
}

// Curved 2-d domain and 3-d codomain with non-diagonal metrics.
ChartManifold curved2() {
  return ChartManifold("C2", {"a", "b"}, {{-1, 1}, {-1, 1}},
                       {1.5 + 0.3 * sin(X(0) * X(1)), 0.2 * cos(X(0)), 1.2 + 0.25 * X(1) * X(1)});
}
ChartManifold curved3() {
  return ChartManifold("C3", {"p", "q", "r"}, {{-3, 3}, {-3, 3}, {-3, 3}},
                       {2.0 + 0.3 * sin(X(1)), 0.1 * X(2), 0.05 * cos(X(0)), 1.0 + 0.2 * X(0) * X(0),
                        0.15 * sin(X(2)), exp(0.2 * X(1))});
}

SmoothMap curved_map() {
  ExprVec c = {X(0) + 0.3 * sin(X(1)), X(1) * X(0) + 0.2, 0.5 * cos(X(0) - X(1))};
  return SmoothMap(curved2(), curved3(), c);
}

void expect_vec_near(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "component " << i;
}

// Finite-difference oracles built only from metric evaluations.
std::vector<double> fd_christoffel(const ChartManifold& m, const Point& p, double h = 1e-5) {
  const int d = m.dim();
  std::vector<Eigen::MatrixXd> dg(d);
  for (int l = 0; l < d; ++l) {
    Point a = p, b = p;
    a.coords[l] += h;
    b.coords[l] -= h;
    dg[l] = (m.metric(a) - m.metric(b)) / (2 * h);
  }
  const Eigen::MatrixXd gi = m.metric(p).inverse();
  std::vector<double> out(d * d * d, 0.0);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l)
          out[(k * d + i) * d + j] += 0.5 * gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  return out;
}

// (nabla_i S)^a at p by central differences.
std::vector<std::vector<double>> fd_cov(const SmoothMap& phi, const std::function<std::vector<double>(const Point&)>& s,
                                        const Point& p, double h) {
  const int m = phi.domain().dim(), n = phi.codomain().dim();
  const auto gam = fd_christoffel(phi.codomain(), phi(p));
  const auto sv = s(p);
  std::vector<std::vector<double>> out(m, std::vector<double>(n, 0.0));
  for (int i = 0; i < m; ++i) {
    Point a = p, b = p;
    a.coords[i] += h;
    b.coords[i] -= h;
    const auto sa = s(a), sb = s(b);
    const auto pa = phi(a), pb = phi(b);
    for (int k = 0; k < n; ++k) {
      double v = (sa[k] - sb[k]) / (2 * h);
      for (int bb = 0; bb < n; ++bb) {
        const double dphi = (pa[bb] - pb[bb]) / (2 * h);
        for (int c = 0; c < n; ++c) v += gam[(k * n + bb) * n + c] * dphi * sv[c];
      }
      out[i][k] = v;
    }
  }
  return out;
}

std::vector<double> fd_rough_laplacian(const SmoothMap& phi, const ExprVec& s, const Point& p) {
  const int m = phi.domain().dim(), n = phi.codomain().dim();
  auto sec = [&](const Point& q) {
    std::vector<double> v;
    for (const auto& e : s) v.push_back(e.eval(q.coords));
    return v;
  };
  const double h1 = 1e-3, h2 = 1e-4;
  const auto gm = fd_christoffel(phi.domain(), p);
  const Eigen::MatrixXd gi = phi.domain().metric(p).inverse();
  const auto d1 = fd_cov(phi, sec, p, h2);
  std::vector<double> out(n, 0.0);
  for (int j = 0; j < m; ++j) {
    auto dj = [&](const Point& q) { return fd_cov(phi, sec, q, h2)[j]; };
    const auto dd = fd_cov(phi, dj, p, h1);
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < n; ++a) {
        double t = dd[i][a];
        for (int k = 0; k < m; ++k) t -= gm[(k * m + i) * m + j] * d1[k][a];
        out[a] += gi(i, j) * t;
      }
  }
  return out;
}

}  // namespace

TEST(Differential, IdentityAndConstant) {
  const auto m = curved2();
  const TangentVector v{Point{{0.1, 0.2}}, {0.4, -0.9}};
  expect_vec_near(differential(SmoothMap::identity(m), v), v.components, 1e-15);
  expect_vec_near(differential(SmoothMap(m, flat(3), {1.0, 2.0, 3.0}), v), {0, 0, 0}, 0);
}

TEST(EnergyDensity, Examples) {
  const auto m = curved2();
  EXPECT_NEAR(energy_density(SmoothMap::identity(m), Point{{0.3, -0.2}}), 1.0, 1e-14);
  EXPECT_NEAR(energy_density(SmoothMap::identity(curved3()), Point{{0.3, -0.2, 0.1}}), 1.5, 1e-14);
  EXPECT_EQ(energy_density(SmoothMap(m, flat(3, -9, 9), {1.0, 2.0, 3.0}), Point{{0.3, -0.2}}), 0.0);
  EXPECT_NEAR(energy_density(SmoothMap(flat(1), flat(1, -9, 9), {3.0 * X(0)}), Point{{0.4}}), 4.5, 1e-14);
}

TEST(SecondFundamentalForm, AffineMapIsTotallyGeodesic) {
  SmoothMap a(flat(2), flat(3, -20, 20), {2 * X(0) - X(1) + 1, X(1), 3 * X(0) + 0.5 * X(1)});
  const std::vector<double> u = {1, 0.5}, w = {-0.3, 2};
  expect_vec_near(second_fundamental_form(a, Point{{0.1, 0.7}}, u, w), {0, 0, 0}, 1e-15);
}

TEST(SecondFundamentalForm, SymmetricOnCurvedScenario) {
  const auto phi = curved_map();
  const Point p{{0.2, -0.3}};
  const std::vector<double> u = {1, 0.5}, w = {-0.3, 2};
  expect_vec_near(second_fundamental_form(phi, p, u, w), second_fundamental_form(phi, p, w, u), 1e-14);
}

TEST(Tension, IdentityIsHarmonic) {
  expect_vec_near(tension(SmoothMap::identity(curved3()), Point{{0.3, 0.2, -0.4}}), {0, 0, 0}, 1e-14);
  expect_vec_near(tension(SmoothMap::identity(sphere()), Point{{1.0, 0.2}}), {0, 0}, 1e-14);
}

TEST(Tension, FrameIndependence) {
  const auto phi = curved_map();
  const Point p{{0.2, -0.3}};
  const auto r = random_rotation(2, 99);
  expect_vec_near(tension(phi, p), tension(phi, p, r), 1e-12);
  ExprVec s = {X(0) * X(1), sin(X(0)), 1.0 + X(1)};
  expect_vec_near(rough_laplacian(phi, s, p), rough_laplacian(phi, s, p, r), 1e-11);
}

TEST(Tension, CircleIntoSphere) {
  // s -> (t0, s): tau = -sin t0 cos t0 d_theta
  const double t0 = 0.9;
  SmoothMap c(circle(), sphere(), {Expr(t0), X(0)});
  expect_vec_near(tension(c, Point{{0.4}}), {-std::sin(t0) * std::cos(t0), 0.0}, 1e-14);
}

TEST(FTension, Examples) {
  const auto phi = curved_map();
  const Point p{{0.2, -0.3}};
  auto t = tension(phi, p);
  auto tf = f_tension(phi, Expr(2.5), p);
  for (std::size_t a = 0; a < t.size(); ++a) EXPECT_NEAR(tf[a], 2.5 * t[a], 1e-13);
  // harmonic: tau_f = dphi(grad f)
  SmoothMap id = SmoothMap::identity(curved2());
  Expr f = exp(X(0)) + X(1) * X(1);
  expect_vec_near(f_tension(id, f, p), gradient(curved2(), f, p), 1e-13);
}

TEST(PullbackConnection, FlatCodomainIsDirectionalDerivative) {
  SmoothMap phi(curved2(), flat(2, -9, 9), {X(0) * X(1), X(0) + X(1)});
  ExprVec s = {sin(X(0)), X(1) * X(1)};
  const Point p{{0.3, 0.4}};
  const auto r = pullback_connection(phi, s, TangentVector{p, {2.0, -1.0}});
  EXPECT_NEAR(r[0], 2.0 * std::cos(0.3), 1e-14);
  EXPECT_NEAR(r[1], -1.0 * 2 * 0.4, 1e-14);
}

TEST(PullbackConnection, IdentityGivesLeviCivita) {
  const auto m = curved2();
  ExprVec y = {X(0) * X(1), cos(X(1))};
  const TangentVector v{Point{{0.3, 0.4}}, {0.7, -0.2}};
  expect_vec_near(pullback_connection(SmoothMap::identity(m), y, v), covariant_derivative_vf(m, v, y), 1e-14);
}

TEST(RoughLaplacian, FlatExamples) {
  SmoothMap id = SmoothMap::identity(flat(2));
  expect_vec_near(rough_laplacian(id, {Expr(2.0), Expr(-1.0)}, Point{{0.1, 0.2}}), {0, 0}, 0);
  // S = grad u with u = x^3 y: Laplacian of (3x^2 y, x^3) = (6y, 6x)
  ExprVec s = {3 * X(0) * X(0) * X(1), X(0) * X(0) * X(0)};
  expect_vec_near(rough_laplacian(id, s, Point{{0.4, -0.7}}), {6 * -0.7, 6 * 0.4}, 1e-13);
}

TEST(RoughLaplacian, MatchesFiniteDifferenceOracle) {
  const auto phi = curved_map();
  ExprVec s = {X(0) * X(1), sin(X(0)), 1.0 + X(1)};
  std::mt19937_64 rng(4);
  for (int k = 0; k < 3; ++k) {
    const Point p = phi.domain().sample(rng, 0.2);
    expect_vec_near(rough_laplacian(phi, s, p), fd_rough_laplacian(phi, s, p), 1e-6);
  }
}

TEST(CurvatureTrace, Examples) {
  // Id on S^2 with unit S: sum R(S, e_i) e_i = S
  const Point p{{1.1, 0.3}};
  ExprVec s = {Expr(0.6), Expr(0.8 / std::sin(1.1))};
  expect_vec_near(curvature_trace(SmoothMap::identity(sphere()), s, p), {0.6, 0.8 / std::sin(1.1)}, 1e-12);
  expect_vec_near(curvature_trace(SmoothMap::identity(flat(2)), {X(0), X(1)}, Point{{0.1, 0.1}}), {0, 0}, 0);
  expect_vec_near(curvature_trace(SmoothMap(curved2(), sphere(), {Expr(1.0), Expr(2.0)}), s, Point{{0.1, 0.1}}),
                  {0, 0}, 0);
}

TEST(Jacobi, Examples) {
  const auto phi = curved_map();
  expect_vec_near(jacobi_operator(phi, {0.0, 0.0, 0.0}, Point{{0.1, 0.1}}), {0, 0, 0}, 0);
  SmoothMap id = SmoothMap::identity(flat(2));
  ExprVec s = {X(0) * X(0) * X(1), sin(X(1))};
  expect_vec_near(jacobi_operator(id, s, Point{{0.3, 0.5}}), {2 * 0.5, -std::sin(0.5)}, 1e-14);
}

TEST(BiTension, HarmonicMapsVanish) {
  expect_vec_near(bi_tension(SmoothMap::identity(curved3()), Point{{0.3, 0.2, -0.4}}), {0, 0, 0}, 1e-12);
}

TEST(BiTension, CircleIntoSphereReducesToOde) {
  // tau = c d_theta with c = -sin t0 cos t0; Tr nabla^2 tau = -c cos^2 t0, curvature trace = c sin^2 t0
  // so tau_2 = c cos 2 t0 = -sin(4 t0)/4.
  for (double t0 : {0.5, pi / 4, 1.3, 2.2}) {
    SmoothMap c(circle(), sphere(), {Expr(t0), X(0)});
    const auto b = bi_tension(c, Point{{0.4}});
    EXPECT_NEAR(b[0], -std::sin(4 * t0) / 4, 1e-13) << t0;
    EXPECT_NEAR(b[1], 0.0, 1e-13);
  }
}

TEST(BiFTension, ConstantWeightGivesSquareScaling) {
  const auto phi = curved_map();
  const Point p{{0.2, -0.3}};
  const auto b = bi_tension(phi, p);
  const auto bf = bi_f_tension(phi, Expr(1.7), p);
  for (std::size_t a = 0; a < b.size(); ++a) EXPECT_NEAR(bf[a], 1.7 * 1.7 * b[a], 1e-10);
}

TEST(BiFTension, FHarmonicMapVanishes) {
  // phi' = 1/f solves (f phi')' = 0 on the line; f = e^x, phi = -e^{-x}
  SmoothMap phi(flat(1), flat(1, -50, 50), {-exp(-X(0))});
  const auto t = f_tension(phi, exp(X(0)), Point{{0.3}});
  EXPECT_NEAR(t[0], 0.0, 1e-14);
  EXPECT_NEAR(bi_f_tension(phi, exp(X(0)), Point{{0.3}})[0], 0.0, 1e-13);
}

TEST(FBiTension, TwoPathsAgreeOnCurvedScenario) {
  const auto phi = curved_map();
  Expr f = 2.0 + sin(X(0)) * X(1);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) {
    const Point p = phi.domain().sample(rng, 0.1);
    expect_vec_near(f_bi_tension_direct(phi, f, p), f_bi_tension_via_relation(phi, f, p), 1e-11);
  }
}

TEST(FBiTension, Examples) {
  const auto phi = curved_map();
  const Point p{{0.2, -0.3}};
  expect_vec_near(f_bi_tension_direct(phi, Expr(1.0), p), bi_tension(phi, p), 1e-12);
  const auto b = bi_tension(phi, p);
  const auto fb = f_bi_tension_via_relation(phi, Expr(3.0), p);
  for (std::size_t a = 0; a < b.size(); ++a) EXPECT_NEAR(fb[a], 3.0 * b[a], 1e-11);
  expect_vec_near(f_bi_tension_direct(SmoothMap::identity(sphere()), exp(X(0)), Point{{1.0, 0.5}}), {0, 0}, 1e-12);
}

TEST(Hierarchy, ConsistentWithSingleOperations) {
  const auto phi = curved_map();
  Expr f = 2.0 + sin(X(0)) * X(1);
  const Point p{{0.1, 0.4}};
  const auto h = tension_hierarchy(phi, f, p);
  expect_vec_near(h.tau, tension(phi, p), 1e-14);
  expect_vec_near(h.bi_f, bi_f_tension(phi, f, p), 1e-14);
  EXPECT_NEAR(h.energy_density, energy_density(phi, p), 1e-14);
}

TEST(Preconditions, OutOfDomainAndSingular) {
  const auto phi = curved_map();
  EXPECT_THROW(tension(phi, Point{{5.0, 0.0}}), OutOfDomain);
  SmoothMap bad(flat(1), ChartManifold::diagonal("deg", {"v"}, {{-1, 1}}, {X(0) * X(0)}), {Expr(0.0)});
  EXPECT_THROW(tension(bad, Point{{0.1}}), SingularMetric);
}
