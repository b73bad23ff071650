#include "fbh/warped.hpp"

#include "fbh/errors.hpp"

#include <cmath>

namespace fbh {

std::string to_string(WarpKind k) {
  switch (k) {
    case WarpKind::doubly: return "doubly";
    case WarpKind::singly_lambda: return "singly_lambda";
    case WarpKind::singly_mu: return "singly_mu";
    case WarpKind::direct: return "direct";
  }
  return "?";
}

WarpKind warp_kind_from_string(const std::string& s) {
  if (s == "doubly") return WarpKind::doubly;
  if (s == "singly_lambda") return WarpKind::singly_lambda;
  if (s == "singly_mu") return WarpKind::singly_mu;
  if (s == "direct") return WarpKind::direct;
  throw std::invalid_argument("unknown warped product kind '" + s + "'");
}

namespace {

ChartManifold flatten(const ChartManifold& b, const ChartManifold& f, const Expr& lambda, const Expr& mu) {
  const int m = b.dim(), n = f.dim(), d = m + n;
  std::vector<std::string> names = b.coord_names();
  for (const auto& s : f.coord_names()) names.push_back(s);
  std::vector<Interval> box = b.box();
  for (const auto& iv : f.box()) box.push_back(iv);
  const Expr mu_p = mu.shifted(m);
  const Expr mu2 = mu_p.is_constant() && mu_p.constant_value() == 1.0 ? Expr(1.0) : mu_p * mu_p;
  const Expr la2 = lambda.is_constant() && lambda.constant_value() == 1.0 ? Expr(1.0) : lambda * lambda;
  std::vector<Expr> up;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      if (i < m && j < m)
        up.push_back(mu2 * b.metric_entry(i, j));
      else if (i >= m && j >= m)
        up.push_back(la2 * f.metric_entry(i - m, j - m).shifted(m));
      else
        up.push_back(Expr(0.0));
    }
  return ChartManifold(b.name() + "x" + f.name(), names, box, up);
}

// Checks positivity, and exact value 1 where declared, at seeded samples.
void check_warping(const ChartManifold& chart, const Expr& w, bool declared_one, const char* label) {
  std::mt19937_64 rng(0x5eed);
  for (int s = 0; s < 32; ++s) {
    const Point p = chart.sample(rng);
    const double v = w.eval(p.coords);
    if (!(v > 0.0)) throw NonPositiveWeight(std::string("warping function ") + label + " is not positive");
    if (declared_one && v != 1.0)
      throw WrongKind(std::string("warping function ") + label + " declared identically 1 but is not");
  }
}

std::vector<double> mat_vec(const Eigen::MatrixXd& a, std::span<const double> v) {
  std::vector<double> out(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

double bilinear(const Eigen::MatrixXd& a, std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * u[i] * v[j];
  return s;
}

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void require_singly(const WarpedProduct& w) {
  if (w.kind() != WarpKind::singly_lambda && w.kind() != WarpKind::direct)
    throw WrongKind("closed forms need a singly warped product with mu identically 1, got " + to_string(w.kind()));
}

// Base-side data of lambda at x: value, coordinate gradient, Hessian.
struct LambdaData {
  double value = 0.0;
  std::vector<double> d;     // partial derivatives
  std::vector<double> grad;  // raised with g
  Eigen::MatrixXd hess;      // covariant Hessian
  Eigen::MatrixXd ginv;
  double grad_sq = 0.0;
};

LambdaData lambda_data(const WarpedProduct& w, const Point& x) {
  LambdaData L;
  const auto& b = w.base();
  const int m = b.dim();
  L.value = w.lambda().eval(x.coords);
  const auto xj = coordinate_jets(x, 1);
  const Jet lj = w.lambda().eval(std::span<const Jet>(xj));
  L.d.resize(m);
  for (int i = 0; i < m; ++i) L.d[i] = lj.derivative1(i);
  L.grad = gradient(b, w.lambda(), x);
  L.hess = hessian(b, w.lambda(), x);
  L.ginv = b.metric(x).inverse();
  L.grad_sq = dot(L.d, L.grad);
  return L;
}

struct Curvatures {
  std::vector<double> rm, rn;
};

Curvatures product_curvature(const WarpedProduct& w, const Point& x, const Point& y, const BlockVector& X,
                             const BlockVector& Y, const BlockVector& Z) {
  return {riemann_apply(w.base(), x, X.x1, Y.x1, Z.x1), riemann_apply(w.fiber(), y, X.x2, Y.x2, Z.x2)};
}

}  // namespace

WarpedProduct::WarpedProduct(ChartManifold base, ChartManifold fiber, ScalarField lambda, ScalarField mu,
                             WarpKind kind)
    : base_(std::move(base)),
      fiber_(std::move(fiber)),
      lambda_(std::move(lambda)),
      mu_(std::move(mu)),
      kind_(kind),
      chart_(flatten(base_, fiber_, lambda_, mu_)) {
  if (lambda_.max_var() >= base_.dim()) throw std::invalid_argument("lambda must depend on base coordinates only");
  if (mu_.max_var() >= fiber_.dim()) throw std::invalid_argument("mu must depend on fiber coordinates only");
  check_warping(base_, lambda_, kind_ == WarpKind::singly_mu || kind_ == WarpKind::direct, "lambda");
  check_warping(fiber_, mu_, kind_ == WarpKind::singly_lambda || kind_ == WarpKind::direct, "mu");
}

WarpedProduct WarpedProduct::singly(ChartManifold base, ChartManifold fiber, ScalarField lambda) {
  return WarpedProduct(std::move(base), std::move(fiber), std::move(lambda), Expr(1.0), WarpKind::singly_lambda);
}

WarpedProduct WarpedProduct::direct(ChartManifold base, ChartManifold fiber) {
  return WarpedProduct(std::move(base), std::move(fiber), Expr(1.0), Expr(1.0), WarpKind::direct);
}

Point WarpedProduct::base_point(const Point& p) const {
  return Point{std::vector<double>(p.coords.begin(), p.coords.begin() + m())};
}

Point WarpedProduct::fiber_point(const Point& p) const {
  return Point{std::vector<double>(p.coords.begin() + m(), p.coords.end())};
}

Point WarpedProduct::join(const Point& x, const Point& y) const {
  Point p = x;
  p.coords.insert(p.coords.end(), y.coords.begin(), y.coords.end());
  return p;
}

std::vector<double> BlockVector::stacked() const {
  std::vector<double> v = x1;
  v.insert(v.end(), x2.begin(), x2.end());
  return v;
}

BlockVector BlockVector::split(const WarpedProduct& w, const Point& p, std::span<const double> v) {
  if (static_cast<int>(v.size()) != w.m() + w.n()) throw std::invalid_argument("block vector size mismatch");
  return {p, std::vector<double>(v.begin(), v.begin() + w.m()), std::vector<double>(v.begin() + w.m(), v.end())};
}

Eigen::MatrixXd warped_metric_at(const WarpedProduct& w, const Point& p) {
  w.chart().require_contains(p);
  const Eigen::MatrixXd g = w.chart().metric(p);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetric("warped metric is not positive definite");
  return g;
}

ChartManifold as_chart_manifold(const WarpedProduct& w) { return w.chart(); }

BlockVector closed_form_connection(const WarpedProduct& w, const BlockVector& X, const ExprVec& y) {
  require_singly(w);
  const int m = w.m(), n = w.n(), d = m + n;
  if (static_cast<int>(y.size()) != d) throw std::invalid_argument("vector field size mismatch");
  const Point& p = X.base;
  w.chart().require_contains(p);
  const Point xb = w.base_point(p), yb = w.fiber_point(p);
  const auto pj = coordinate_jets(p, 1);
  const auto xv = X.stacked();

  // product connection: full directional derivative plus block Christoffels
  std::vector<double> yv(d), dy(d, 0.0);
  for (int k = 0; k < d; ++k) {
    const Jet yk = y[k].eval(std::span<const Jet>(pj));
    yv[k] = yk.value();
    for (int i = 0; i < d; ++i) dy[k] += xv[i] * yk.derivative1(i);
  }
  const auto gm = christoffel(w.base(), xb);
  const auto gn = christoffel(w.fiber(), yb);
  std::vector<double> out1(dy.begin(), dy.begin() + m), out2(dy.begin() + m, dy.end());
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out1[k] += gm[(k * m + i) * m + j] * X.x1[i] * yv[j];
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out2[k] += gn[(k * n + i) * n + j] * X.x2[i] * yv[m + j];

  const auto L = lambda_data(w, xb);
  const std::span<const double> y1(yv.data(), m), y2(yv.data() + m, n);
  const double l2 = L.value * L.value;
  // grad lambda^2 = 2 lambda grad lambda; X1(lambda^2) = 2 lambda X1(lambda)
  const double h22 = bilinear(w.fiber().metric(yb), X.x2, y2);
  axpy(-0.5 * h22 * 2.0 * L.value, L.grad, out1);
  const double x1l2 = 2.0 * L.value * dot(L.d, X.x1);
  const double y1l2 = 2.0 * L.value * dot(L.d, y1);
  axpy(x1l2 / (2.0 * l2), y2, out2);
  axpy(y1l2 / (2.0 * l2), X.x2, out2);
  return {p, out1, out2};
}

BlockVector closed_form_curvature(const WarpedProduct& w, const BlockVector& X, const BlockVector& Y,
                                  const BlockVector& Z) {
  require_singly(w);
  const Point& p = X.base;
  w.chart().require_contains(p);
  const Point xb = w.base_point(p), yb = w.fiber_point(p);
  auto [out1, out2] = product_curvature(w, xb, yb, X, Y, Z);
  const auto L = lambda_data(w, xb);
  const Eigen::MatrixXd h = w.fiber().metric(yb);
  const double hxz = bilinear(h, X.x2, Z.x2), hyz = bilinear(h, Y.x2, Z.x2);
  // nabla_V grad lambda = g^{-1} Hess(lambda) V
  const Eigen::MatrixXd nab = L.ginv * L.hess;
  axpy(L.value * hxz, mat_vec(nab, Y.x1), out1);
  axpy(-L.value * hyz, mat_vec(nab, X.x1), out1);
  axpy(bilinear(L.hess, X.x1, Z.x1) / L.value, Y.x2, out2);
  axpy(-bilinear(L.hess, Y.x1, Z.x1) / L.value, X.x2, out2);
  axpy(L.grad_sq * hxz, Y.x2, out2);
  axpy(-L.grad_sq * hyz, X.x2, out2);
  return {p, out1, out2};
}

namespace {

// A(V) = nabla_V grad lambda^2 - V(lambda^2)/(2 lambda^2) grad lambda^2,
// with grad lambda^2 = 2 lambda grad lambda and
// nabla_V grad lambda^2 = 2 V(lambda) grad lambda + 2 lambda nabla_V grad lambda.
std::vector<double> squared_shape(const LambdaData& L, std::span<const double> v) {
  const double vl = dot(L.d, v);
  const double l2 = L.value * L.value;
  std::vector<double> gl2(L.grad.size());
  for (std::size_t i = 0; i < gl2.size(); ++i) gl2[i] = 2.0 * L.value * L.grad[i];
  std::vector<double> out(L.grad.size(), 0.0);
  axpy(2.0 * vl, L.grad, out);
  axpy(2.0 * L.value, mat_vec(L.ginv * L.hess, v), out);
  axpy(-(2.0 * L.value * vl) / (2.0 * l2), gl2, out);
  return out;
}

}  // namespace

BlockVector closed_form_curvature_squared(const WarpedProduct& w, const BlockVector& X, const BlockVector& Y,
                                          const BlockVector& Z) {
  require_singly(w);
  const Point& p = X.base;
  w.chart().require_contains(p);
  const Point xb = w.base_point(p), yb = w.fiber_point(p);
  auto [out1, out2] = product_curvature(w, xb, yb, X, Y, Z);
  const auto L = lambda_data(w, xb);
  const double l2 = L.value * L.value;
  const Eigen::MatrixXd g = w.base().metric(xb), h = w.fiber().metric(yb);
  const double hxz = bilinear(h, X.x2, Z.x2), hyz = bilinear(h, Y.x2, Z.x2);
  const auto ax = squared_shape(L, X.x1), ay = squared_shape(L, Y.x1);
  const double gl2_sq = 4.0 * l2 * L.grad_sq;
  axpy(0.5 * hxz, ay, out1);
  axpy(-0.5 * hyz, ax, out1);
  axpy(bilinear(g, ax, Z.x1) / (2.0 * l2), Y.x2, out2);
  axpy(-bilinear(g, ay, Z.x1) / (2.0 * l2), X.x2, out2);
  axpy(gl2_sq / (4.0 * l2) * hxz, Y.x2, out2);
  axpy(-gl2_sq / (4.0 * l2) * hyz, X.x2, out2);
  return {p, out1, out2};
}

BlockVector wedge(const WarpedProduct& w, const BlockVector& X, const BlockVector& Y, const BlockVector& Z) {
  const Eigen::MatrixXd g = warped_metric_at(w, X.base);
  const auto xv = X.stacked(), yv = Y.stacked(), zv = Z.stacked();
  const double gyz = bilinear(g, yv, zv), gxz = bilinear(g, xv, zv);
  std::vector<double> out(xv.size(), 0.0);
  axpy(gyz, xv, out);
  axpy(-gxz, yv, out);
  return BlockVector::split(w, X.base, out);
}

BlockVector closed_form_curvature_wedge(const WarpedProduct& w, const BlockVector& X, const BlockVector& Y,
                                        const BlockVector& Z) {
  require_singly(w);
  const Point& p = X.base;
  w.chart().require_contains(p);
  const Point xb = w.base_point(p), yb = w.fiber_point(p);
  auto [r1, r2] = product_curvature(w, xb, yb, X, Y, Z);
  const auto L = lambda_data(w, xb);
  const double l2 = L.value * L.value;
  const int m = w.m(), n = w.n();
  const std::vector<double> zero_m(m, 0.0), zero_n(n, 0.0);
  const BlockVector ay{p, squared_shape(L, Y.x1), zero_n}, ax{p, squared_shape(L, X.x1), zero_n};
  const BlockVector vx{p, zero_m, X.x2}, vy{p, zero_m, Y.x2};
  const double gl2_sq = 4.0 * l2 * L.grad_sq;
  const auto t1 = wedge(w, ay, vx, Z).stacked();
  const auto t2 = wedge(w, ax, vy, Z).stacked();
  const auto t3 = wedge(w, vx, vy, Z).stacked();
  std::vector<double> out = r1;
  out.insert(out.end(), r2.begin(), r2.end());
  const double c = 1.0 / (2.0 * l2);
  axpy(c, t1, out);
  axpy(-c, t2, out);
  axpy(-c * gl2_sq / (2.0 * l2), t3, out);
  return BlockVector::split(w, p, out);
}

}  // namespace fbh
