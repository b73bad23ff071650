#include "fbh/conformal.hpp"

#include "fbh/errors.hpp"
#include "fbh/standard_manifolds.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace fbh {

namespace {

Eigen::MatrixXd jacobian(const SmoothMap& phi, const Point& p) {
  const auto j = phi.jets(p, 1);
  const int n = phi.codomain().dim(), m = phi.domain().dim();
  Eigen::MatrixXd J(n, m);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < m; ++i) J(a, i) = j[a].derivative1(i);
  return J;
}

Eigen::MatrixXd pullback(const SmoothMap& phi, const Point& p) {
  const auto J = jacobian(phi, p);
  return J.transpose() * phi.codomain().metric(phi.codomain().wrap(phi(p))) * J;
}

std::vector<double> scaled(double s, std::vector<double> v) {
  for (auto& x : v) x *= s;
  return v;
}

std::vector<double> sum_terms(const std::vector<NamedTerm>& terms, std::size_t dim) {
  std::vector<double> r(dim, 0.0);
  for (const auto& t : terms)
    for (std::size_t k = 0; k < dim; ++k) r[k] += t.value[k];
  return r;
}

double rel_delta(std::span<const double> a, std::span<const double> g) {
  return max_abs(difference(a, g)) / (1.0 + max_abs(g));
}

TermwiseComparison compare(std::string formula, std::vector<NamedTerm> terms, std::vector<double> generic) {
  TermwiseComparison c;
  c.formula = std::move(formula);
  c.total = sum_terms(terms, generic.size());
  c.terms = std::move(terms);
  c.generic = std::move(generic);
  c.delta = rel_delta(c.total, c.generic);
  return c;
}

// Domain and along-map calculus at one point of a conformal map.
struct ConformalData {
  const ConformalMap& c;
  const Point& p;
  LocalMap lm, id;
  int n;
  Jet u;           // log lambda
  JetVec gl;       // grad log lambda
  Eigen::MatrixXd ginv;
  Eigen::MatrixXd B;  // nabla dphi(d_i, d_j), component a at row a, column i * n + j

  ConformalData(const ConformalMap& cm, const Point& pt)
      : c(cm), p(pt), lm(cm.map(), pt, 4), id(SmoothMap::identity(cm.domain()), pt, 4), n(cm.dim()) {
    u = id.field(log(c.dilation()));
    gl = id.grad(u);
    ginv = c.domain().metric(p).inverse();
    B.resize(n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto v = jet_values(lm.second_fundamental_form(i, j));
        for (int a = 0; a < n; ++a) B(a, i * n + j) = v[a];
      }
  }

  std::vector<double> push(const JetVec& x) const { return jet_values(lm.push(x)); }
  // nabla^phi_X dphi(Y)
  std::vector<double> along(const JetVec& y, const JetVec& x) const {
    return jet_values(lm.covariant_along(lm.push(y), x));
  }
  // <nabla dphi, nabla d w> with the coordinate Hessian of w.
  std::vector<double> hessian_pairing(const ScalarField& w) const {
    const auto H = hessian(c.domain(), w, p);
    const Eigen::MatrixXd Hup = ginv * H * ginv;
    std::vector<double> r(n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[a] += B(a, i * n + j) * Hup(i, j);
    return r;
  }
  std::vector<double> pull(std::span<const double> v) const {
    const auto J = jacobian(c.map(), p);
    Eigen::VectorXd w(n);
    for (int a = 0; a < n; ++a) w(a) = v[a];
    const Eigen::VectorXd x = J.partialPivLu().solve(w);
    return std::vector<double>(x.data(), x.data() + n);
  }
};

}  // namespace

double pullback_defect(const SmoothMap& phi, const ScalarField& lambda, const Point& p) {
  const double l = lambda.eval(p.coords);
  return (pullback(phi, p) - l * l * phi.domain().metric(p)).cwiseAbs().maxCoeff();
}

ConformalMap::ConformalMap(SmoothMap phi, ScalarField dilation, double tol, int samples, std::uint64_t seed)
    : phi_(std::move(phi)), lambda_(std::move(dilation)) {
  if (phi_.domain().dim() != phi_.codomain().dim())
    throw NotConformal("conformal maps need equal dimensions, got " + std::to_string(phi_.domain().dim()) + " and " +
                       std::to_string(phi_.codomain().dim()));
  std::mt19937_64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Point p = phi_.domain().sample(rng);
    const double l = lambda_.eval(p.coords);
    if (!(l > 0.0)) throw NotConformal("dilation is not positive");
    const double d = pullback_defect(phi_, lambda_, p);
    if (!(d <= tol)) throw NotConformal("pullback misses lambda^2 g by " + std::to_string(d));
  }
}

double extract_dilation(const SmoothMap& phi, const Point& p, double rel_tol) {
  if (phi.domain().dim() != phi.codomain().dim()) throw NotConformal("conformal maps need equal dimensions");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(pullback(phi, p), phi.domain().metric(p),
                                                               Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.maxCoeff();
  if (!(lo > 0.0)) throw NotConformal("pullback metric is degenerate");
  if ((hi - lo) / hi > rel_tol) throw NotConformal("pullback eigenvalue ratios spread by " + std::to_string((hi - lo) / hi));
  return std::sqrt(ev.mean());
}

std::vector<double> conformal_tension(const ConformalMap& c, const Point& p) {
  if (c.dim() < 2) throw NotConformal("conformal tension needs n >= 2");
  ConformalData d(c, p);
  return scaled(2.0 - d.n, d.push(d.gl));
}

BiFConformalReport bi_f_conformal_residual(const ConformalMap& c, const ScalarField& f, const Point& p) {
  ConformalData d(c, p);
  const auto& id = d.id;
  const double nm2 = d.n - 2.0;
  const Jet fj = id.field(f);
  const double fv = fj.value();
  const JetVec gf = id.grad(fj);
  const Jet lapf = id.laplacian(fj);
  const double gf_sq = id.inner_M(gf, gf).value();
  const JetVec grad_lam = id.grad(id.field(c.dilation()));

  std::vector<NamedTerm> common = {
      {"grad_laplacian_log_lambda", scaled(nm2 * fv * fv, d.push(id.grad(id.laplacian(d.u))))},
      {"nabla_grad_log_lambda_dphi_grad_log_lambda", scaled(-nm2 * nm2 * fv * fv, d.along(d.gl, d.gl))},
      {"nabla_grad_f_dphi_grad_log_lambda", scaled(4 * nm2 * fv, d.along(d.gl, gf))},
      {"grad_laplacian_f", scaled(-fv, d.push(id.grad(lapf)))},
      {"pairing_log_lambda", scaled(2 * nm2 * fv * fv, d.hessian_pairing(log(c.dilation())))},
      {"pairing_f", scaled(-2.0, d.hessian_pairing(f))},
      {"grad_f_squared_dphi_grad_log_lambda", scaled(nm2 * gf_sq, d.push(d.gl))},
      {"ricci_grad_log_lambda", scaled(2 * nm2 * fv * fv, d.push(id.curvature_trace(d.gl)))},
      {"nabla_grad_f_dphi_grad_f", scaled(-1.0, d.along(gf, gf))},
  };
  const auto generic = tension_hierarchy(c.map(), f, p).bi_f;
  auto with = [&](const JetVec& g) {
    auto t = common;
    t.push_back({"dphi_grad_times_laplacian_f", scaled(nm2 * fv * lapf.value(), d.push(g))});
    t.push_back({"ricci_grad", scaled(-fv, d.push(id.curvature_trace(g)))});
    return t;
  };
  BiFConformalReport r;
  r.literal = compare("bi_f_conformal_literal", with(grad_lam), generic);
  r.log_variant = compare("bi_f_conformal_log_variant", with(d.gl), generic);
  const double a = r.literal.delta, b = r.log_variant.delta;
  r.closer = std::abs(a - b) <= 1e-12 * (1 + a + b) ? "tie" : (a < b ? "literal" : "log_variant");
  return r;
}

FBiConformalReport f_bi_conformal_residual(const ConformalMap& c, const ScalarField& f, const Point& p,
                                           bool lambda_is_f) {
  if (c.dim() < 3) throw NotConformal("the f-bi criterion needs n >= 3");
  ConformalData d(c, p);
  const auto& id = d.id;
  const int n = d.n;
  const double nm2 = n - 2.0;
  const ScalarField& fe = lambda_is_f ? c.dilation() : f;
  const Jet fj = id.field(fe);
  const double fv = fj.value();
  const JetVec gf = id.grad(fj);
  const double lapf = id.laplacian(fj).value();
  const JetVec ric = id.curvature_trace(d.gl);
  const auto pairing = d.hessian_pairing(log(c.dilation()));
  const auto grad_lap_u = id.grad(id.laplacian(d.u));

  auto terms = [&](double restore) {
    return std::vector<NamedTerm>{
        {"nabla_grad_log_lambda_dphi_grad_log_lambda", scaled(nm2 * (2.0 - n) * fv, d.along(d.gl, d.gl))},
        {"grad_laplacian_log_lambda", scaled(nm2 * fv, d.push(grad_lap_u))},
        {"ricci_grad_log_lambda", scaled(nm2 * 2.0 * restore, d.push(ric))},
        {"pairing_log_lambda", scaled(nm2 * 2.0 * restore, pairing)},
        {"laplacian_f_dphi_grad_log_lambda", scaled(nm2 * lapf, d.push(d.gl))},
        {"nabla_grad_f_dphi_grad_log_lambda", scaled(nm2 * 2.0, d.along(d.gl, gf))},
    };
  };
  const auto generic = tension_hierarchy(c.map(), fe, p).f_bi_direct;
  FBiConformalReport r;
  r.printed = compare("f_bi_conformal_printed", terms(1.0), generic);
  r.f_restored = compare("f_bi_conformal_f_restored", terms(fv), generic);

  if (lambda_is_f) {
    FBiConformalReport::LambdaEqualsF e;
    const double lam = fv;
    const double gl_sq = id.inner_M(d.gl, d.gl).value();
    const double lap_u = id.laplacian(d.u).value();
    const auto glv = jet_values(d.gl);
    const auto nab = jet_values(id.covariant_M(d.gl, d.gl));
    const auto grad_gl_sq = jet_values(id.grad(id.inner_M(d.gl, d.gl)));
    const auto gdu = jet_values(grad_lap_u);
    const auto ricv = jet_values(ric);
    e.first_form.resize(n);
    e.gradient_form.resize(n);
    e.rederived.resize(n);
    for (int i = 0; i < n; ++i) {
      const double head = ((5.0 - n) * lam * gl_sq + (lam - 2.0) * lap_u) * glv[i];
      const double tail = lam * gdu[i] + 2.0 * ricv[i];
      e.first_form[i] = head + ((4.0 - n) * lam + 2.0) * nab[i] + grad_gl_sq[i] + tail;
      e.gradient_form[i] = head + ((4.0 - n) / 2.0 * lam + 2.0) * grad_gl_sq[i] + tail;
      e.rederived[i] = lam * (((5.0 - n) * gl_sq - lap_u) * glv[i] + (6.0 - n) * nab[i] + grad_gl_sq[i] + gdu[i] +
                              2.0 * ricv[i]);
    }
    e.generic_pullback = scaled(1.0 / nm2, d.pull(generic));
    e.forms_difference = max_abs(difference(e.first_form, e.gradient_form));
    e.printed_delta = rel_delta(e.first_form, e.generic_pullback);
    e.rederived_delta = rel_delta(e.rederived, e.generic_pullback);
    r.lambda_equals_f = e;
  }
  return r;
}

double conformal_second_fundamental_form_residual(const ConformalMap& c, const Point& p, std::span<const double> x,
                                                  std::span<const double> y) {
  ConformalData d(c, p);
  const int n = d.n;
  const auto J = jacobian(c.map(), p);
  const auto G = c.domain().metric(p);
  const auto glv = jet_values(d.gl);
  Eigen::VectorXd X(n), Y(n), GL(n);
  for (int i = 0; i < n; ++i) X(i) = x[i], Y(i) = y[i], GL(i) = glv[i];
  const Eigen::VectorXd Gl_lower = G * GL;
  const double xl = X.dot(Gl_lower), yl = Y.dot(Gl_lower), gxy = X.dot(G * Y);
  const Eigen::VectorXd rhs = J * (xl * Y + yl * X - gxy * GL);
  Eigen::VectorXd lhs = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lhs(a) += d.B(a, i * n + j) * X(i) * Y(j);
  return (lhs - rhs).norm();
}

std::array<double, 2> gamma_system_residual(const ScalarField& gamma, const Point& p) {
  const JetVec x = coordinate_jets(p, 2);
  const Jet g = gamma.eval(std::span<const Jet>(x));
  const double gx = g.derivative1(0), gy = g.derivative1(1);
  const double gxx = g.derivative2(0, 0), gxy = g.derivative2(0, 1), gyy = g.derivative2(1, 1);
  return {gx * gxx + gy * gxy, gy * gyy + gx * gxy};
}

std::vector<double> gradient_norm_gradient(const ChartManifold& m, const ScalarField& u, const Point& p) {
  LocalMap id(SmoothMap::identity(m), p, 3);
  const JetVec g = id.grad(id.field(u));
  return jet_values(id.grad(id.inner_M(g, g)));
}

std::vector<ConformalCase> conformal_catalog() {
  const Expr x = Expr::var(0), y = Expr::var(1), z = Expr::var(2);
  std::vector<ConformalCase> out;
  const auto box3 = flat_box(3, 0.5, 1.5);
  out.push_back({"scaling_r3", SmoothMap(box3, flat_box(3, 0.0, 5.0), {3.0 * x, 3.0 * y, 3.0 * z}), Expr(3.0)});
  const Expr r2 = x * x + y * y + z * z;
  out.push_back({"inversion_r3", SmoothMap(box3, flat_box(3, 0.0, 2.5), {x / r2, y / r2, z / r2}), 1.0 / r2});
  const double cs = std::cos(0.5), sn = std::sin(0.5);
  out.push_back({"rotation_r3",
                 SmoothMap(flat_box(3, -1.0, 1.0), flat_box(3, -2.0, 2.0), {cs * x - sn * y, sn * x + cs * y, z}),
                 Expr(1.0)});
  const Expr u1 = x;
  out.push_back({"exp_dilation_r3",
                 SmoothMap(flat_box(3, -1.0, 1.0), conformally_flat_box(3, -1.0, 1.0, u1), coordinate_exprs(3)),
                 exp(u1)});
  const Expr u2 = 0.3 * sin(x) * cos(y) + 0.2 * z * z;
  out.push_back({"bump_dilation_r3",
                 SmoothMap(flat_box(3, -1.0, 1.0), conformally_flat_box(3, -1.0, 1.0, u2), coordinate_exprs(3)),
                 exp(u2)});
  const Expr u3 = 0.2 * x + 0.1 * y * z + 0.15 * cos(Expr::var(3));
  out.push_back({"mixed_dilation_r4",
                 SmoothMap(flat_box(4, -1.0, 1.0), conformally_flat_box(4, -1.0, 1.0, u3), coordinate_exprs(4)),
                 exp(u3)});
  // conformal change on a curved domain: S^2 x R -> same chart with e^{2u} times the metric
  {
    const Expr t = Expr::var(0);
    const auto dom = ChartManifold::diagonal("S2xR", {"theta", "phi", "s"},
                                             {{0.4, 2.7, false}, {0.0, 6.283185307179586, true}, {-1.0, 1.0, false}},
                                             {Expr(1.0), sin(t) * sin(t), Expr(1.0)});
    const Expr u = 0.3 * cos(t) + 0.2 * Expr::var(2);
    const auto cod = ChartManifold::diagonal("S2xR_conformal", {"theta", "phi", "s"}, dom.box(),
                                             {exp(2.0 * u), exp(2.0 * u) * sin(t) * sin(t), exp(2.0 * u)});
    out.push_back({"curved_dilation_s2xr", SmoothMap(dom, cod, coordinate_exprs(3)), exp(u)});
  }
  const auto box2 = ChartManifold::diagonal("R2", {"x0", "x1"}, {{0.5, 1.5, false}, {-0.5, 0.5, false}},
                                            {Expr(1.0), Expr(1.0)});
  out.push_back({"square_r2", SmoothMap(box2, flat_box(2, -2.0, 3.0), {x * x - y * y, 2.0 * x * y}),
                 2.0 * sqrt(x * x + y * y)});
  const auto disk = ChartManifold::diagonal("R2", {"x0", "x1"}, {{0.3, 1.2, false}, {-0.8, 0.8, false}},
                                            {Expr(1.0), Expr(1.0)});
  const Expr rr = x * x + y * y;
  out.push_back({"inverse_stereographic_r2", SmoothMap(disk, sphere_chart(0.1), {2.0 * atan(sqrt(rr)), atan(y / x)}),
                 2.0 / (1.0 + rr)});
  const Expr u4 = 0.4 * sin(x) + 0.3 * y;
  out.push_back({"exp_dilation_r2",
                 SmoothMap(flat_box(2, -1.0, 1.0), conformally_flat_box(2, -1.0, 1.0, u4), coordinate_exprs(2)),
                 exp(u4)});
  return out;
}

}  // namespace fbh
