#include "fbh/special_maps.hpp"

#include "fbh/errors.hpp"
#include "fbh/standard_manifolds.hpp"

#include <cmath>
#include <numbers>

namespace fbh {

std::string to_string(SpecialKind k) {
  switch (k) {
    case SpecialKind::inclusion_iy0: return "inclusion_iy0";
    case SpecialKind::inclusion_ix0: return "inclusion_ix0";
    case SpecialKind::projection_pi1: return "projection_pi1";
    case SpecialKind::projection_pi2: return "projection_pi2";
    case SpecialKind::product_id_x_psi: return "product_id_x_psi";
    case SpecialKind::product_phiM_x_phiN: return "product_phiM_x_phiN";
    case SpecialKind::product_into_warped_id_x_psi: return "product_into_warped_id_x_psi";
  }
  return "?";
}

SpecialKind special_kind_from_string(const std::string& s) {
  for (auto k : {SpecialKind::inclusion_iy0, SpecialKind::inclusion_ix0, SpecialKind::projection_pi1,
                 SpecialKind::projection_pi2, SpecialKind::product_id_x_psi, SpecialKind::product_phiM_x_phiN,
                 SpecialKind::product_into_warped_id_x_psi})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown special map kind '" + s + "'");
}

namespace {

using std::numbers::pi;

JetVec scale(const Jet& a, const JetVec& v) {
  JetVec r;
  r.reserve(v.size());
  for (const auto& c : v) r.push_back(a * c);
  return r;
}

void add(JetVec& a, const JetVec& b, double s = 1.0) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += s * b[k];
}

JetVec sum(std::initializer_list<std::pair<double, JetVec>> terms) {
  JetVec r;
  for (const auto& [c, v] : terms) {
    if (r.empty()) r.assign(v.size(), Jet(0.0));
    add(r, v, c);
  }
  return r;
}

std::vector<double> stack(const JetVec& a, const JetVec& b) {
  std::vector<double> r = jet_values(a);
  for (const auto& c : b) r.push_back(c.value());
  return r;
}

JetVec zeros(int n) { return JetVec(n, Jet(0.0)); }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// f(x, y) with the fiber coordinates frozen at y.
Expr restrict_to_base(const Expr& f, int m, const Point& y) {
  ExprVec v;
  for (int i = 0; i < m; ++i) v.push_back(Expr::var(i));
  for (double c : y.coords) v.push_back(c);
  return f.substitute(v);
}

// f(x, y) with the base coordinates frozen at x, renumbered to the fiber.
Expr restrict_to_fiber(const Expr& f, const Point& x, int n) {
  ExprVec v;
  for (double c : x.coords) v.push_back(c);
  for (int j = 0; j < n; ++j) v.push_back(Expr::var(j));
  return f.substitute(v);
}

// Calculus of one factor at a point, through the identity map.
struct Factor {
  LocalMap lm;
  Factor(const ChartManifold& c, const Point& p) : lm(SmoothMap::identity(c), p, 4) {}
  Jet field(const Expr& e) const { return lm.field(e); }
  JetVec grad(const Jet& f) const { return lm.grad(f); }
  Jet lap(const Jet& f) const { return lm.laplacian(f); }
  Jet inner(const JetVec& u, const JetVec& v) const { return lm.inner_M(u, v); }
  JetVec trace_hess(const JetVec& w) const { return lm.rough_laplacian(w); }
  JetVec ric(const JetVec& w) const { return lm.curvature_trace(w); }
  JetVec nabla(const JetVec& w, const JetVec& x) const { return lm.covariant_along(w, x); }
};

// Warping data on the base at x: lambda, grad lambda^2 = 2 lambda grad lambda.
struct Warping {
  Jet lam;
  JetVec grad_lam, G;
  Jet G_sq;
  JetVec grad_G_sq;
  Warping(const Factor& b, const Expr& lambda) {
    lam = b.field(lambda);
    grad_lam = b.grad(lam);
    G = scale(2.0 * lam, grad_lam);
    G_sq = b.inner(G, G);
    grad_G_sq = b.grad(G_sq);
  }
};

const WarpedProduct& wp(const SpecialMapScenario& s) { return s.warped; }

ChartManifold direct_chart(const WarpedProduct& w) { return WarpedProduct::direct(w.base(), w.fiber()).chart(); }

std::vector<PrintedForm> forms_iy0(const SpecialMapScenario& s, const Point& x) {
  const auto& w = wp(s);
  const int n = w.n();
  Factor b(w.base(), x);
  const Jet f = b.field(s.weight);
  const JetVec gf = b.grad(f);
  const JetVec thg = b.trace_hess(gf), ric = b.ric(gf), gg = b.grad(b.inner(gf, gf));
  std::vector<PrintedForm> out;
  out.push_back({"iy0_tension_zero", "tau", std::vector<double>(w.m() + n, 0.0)});
  out.push_back({"iy0_f_tension", "tau_f", stack(gf, zeros(n))});
  JetVec inner = thg;
  add(inner, ric);
  add(inner, gg, -0.5);
  out.push_back({"iy0_bi_f_tension_printed", "bi_f", stack(scale(-f, inner), zeros(n))});
  JetVec plus = thg;
  add(plus, ric);
  add(plus, gg, 0.5);
  out.push_back({"iy0_bi_f_tension_half_gradient_plus", "bi_f", stack(scale(-f, plus), zeros(n))});
  // criterion 2f(Tr Hess grad f + Ric grad f) + grad|grad f|^2, rescaled by -1/2
  JetVec crit = scale(2.0 * f, sum({{1.0, thg}, {1.0, ric}}));
  add(crit, gg);
  out.push_back({"iy0_bi_f_criterion_times_minus_half", "bi_f", stack(scale(Jet(-0.5), crit), zeros(n))});
  return out;
}

std::vector<PrintedForm> forms_ix0(const SpecialMapScenario& s, const Point& y) {
  const auto& w = wp(s);
  const int m = w.m();
  const double nd = w.n();
  Factor b(w.base(), s.anchor);
  Factor fb(w.fiber(), y);
  const Warping W(b, w.lambda());
  const double lam = W.lam.value(), G_sq = W.G_sq.value();
  const double grad_lam_sq = b.inner(W.grad_lam, W.grad_lam).value();
  const auto G = jet_values(W.G), gG = jet_values(W.grad_G_sq);
  const Jet f = fb.field(s.weight);
  const JetVec gf = fb.grad(f);
  const double fv = f.value(), lapf = fb.lap(f).value(), gf_sq = fb.inner(gf, gf).value();
  const auto gfv = jet_values(gf), ric = jet_values(fb.ric(gf));

  auto base_block = [&](double cG, double cgG) {
    std::vector<double> r(m);
    for (int i = 0; i < m; ++i) r[i] = cG * G[i] + cgG * gG[i];
    return r;
  };
  auto join = [](std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  std::vector<PrintedForm> out;
  out.push_back({"ix0_tension", "tau", join(base_block(-nd / 2, 0.0), std::vector<double>(w.n(), 0.0))});
  out.push_back({"ix0_f_tension", "tau_f", join(base_block(-nd / 2 * fv, 0.0), gfv)});
  {
    const double cG = (nd + 2) / 2 * fv * lapf + (nd + 1) / 2 * gf_sq;
    const double cgG = -nd * nd / 8 * fv * fv;
    std::vector<double> fib(w.n());
    for (int a = 0; a < w.n(); ++a) fib[a] = (3 * nd + 1) / (4 * lam * lam) * fv * G_sq * gfv[a] - fv * ric[a];
    out.push_back({"ix0_bi_f_tension_printed", "bi_f", join(base_block(cG, cgG), fib)});
  }
  {
    std::vector<double> fib(w.n());
    for (int a = 0; a < w.n(); ++a) fib[a] = 2 * nd * grad_lam_sq * gfv[a];
    out.push_back({"ix0_f_bi_tension_printed", "f_bi", join(base_block(nd / 2 * lapf, -nd * nd / 8 * fv), fib)});
  }
  return out;
}

// Base-side pieces shared by the projection and product formulas at p = (x, y).
struct BaseAtProduct {
  Factor b;
  Jet f, lam;
  JetVec grad_f, grad_log_lam;
  BaseAtProduct(const SpecialMapScenario& s, const Point& p)
      : b(wp(s).base(), wp(s).base_point(p)) {
    const auto& w = wp(s);
    f = b.field(restrict_to_base(s.weight, w.m(), w.fiber_point(p)));
    lam = b.field(w.lambda());
    grad_f = b.grad(f);
    grad_log_lam = b.grad(log(lam));
  }
};

std::vector<PrintedForm> forms_pi1(const SpecialMapScenario& s, const Point& p) {
  const auto& w = wp(s);
  const double nd = w.n();
  BaseAtProduct B(s, p);
  const auto& b = B.b;
  const Jet& f = B.f;
  const JetVec& gl = B.grad_log_lam;
  const JetVec Wv = scale(f, b.grad(nd * log(B.lam) + log(f)));
  std::vector<PrintedForm> out;
  out.push_back({"pi1_tension", "tau", jet_values(scale(Jet(nd), gl))});
  out.push_back({"pi1_f_tension", "tau_f", jet_values(Wv)});
  JetVec bif = sum({{-1.0, scale(f, b.trace_hess(Wv))},
                    {-1.0, scale(f, b.ric(Wv))},
                    {-nd, scale(f, b.nabla(Wv, gl))},
                    {-1.0, b.nabla(Wv, B.grad_f)}});
  out.push_back({"pi1_bi_f_tension_printed", "bi_f", jet_values(bif)});
  const double lap_f = laplacian(w.chart(), s.weight, p);
  JetVec fbi = sum({{-nd, scale(f, b.trace_hess(gl))},
                    {-nd * nd / 2, scale(f, b.grad(b.inner(gl, gl)))},
                    {-nd, scale(f, b.ric(gl))},
                    {-nd * lap_f, gl},
                    {-2 * nd, b.nabla(gl, B.grad_f)}});
  out.push_back({"pi1_f_bi_tension_printed", "f_bi", jet_values(fbi)});
  return out;
}

std::vector<PrintedForm> forms_pi2(const SpecialMapScenario& s, const Point& p) {
  const auto& w = wp(s);
  Factor fb(w.fiber(), w.fiber_point(p));
  const double lam = w.lambda().eval(w.base_point(p).coords);
  const double l2 = lam * lam;
  const Jet f = fb.field(restrict_to_fiber(s.weight, w.base_point(p), w.n()));
  const JetVec gf = fb.grad(f);
  std::vector<PrintedForm> out;
  out.push_back({"pi2_tension_zero", "tau", std::vector<double>(w.n(), 0.0)});
  out.push_back({"pi2_f_tension", "tau_f", jet_values(scale(Jet(1.0 / l2), gf))});
  JetVec bif = sum({{-1.0 / l2, scale(f, fb.trace_hess(gf))},
                    {-1.0 / l2, scale(f, fb.ric(gf))},
                    {-0.5 / l2, fb.grad(fb.inner(gf, gf))}});
  out.push_back({"pi2_bi_f_tension_printed", "bi_f", jet_values(bif)});
  out.push_back({"pi2_f_bi_tension_zero", "f_bi", std::vector<double>(w.n(), 0.0)});
  return out;
}

SpecialMapScenario as_projection(const SpecialMapScenario& s, SpecialKind k) {
  SpecialMapScenario r = s;
  r.kind = k;
  r.psi.clear();
  r.phiM.clear();
  return r;
}

std::vector<PrintedForm> forms_id_psi(const SpecialMapScenario& s, const Point& p) {
  const auto& w = wp(s);
  const double nd = w.n();
  BaseAtProduct B(s, p);
  const auto& b = B.b;
  const Jet& f = B.f;
  const JetVec& gl = B.grad_log_lam;
  const double lap_f = laplacian(w.chart(), s.weight, p);
  std::vector<PrintedForm> out;
  out.push_back({"product_id_psi_tension", "tau", stack(scale(Jet(nd), gl), zeros(w.n()))});
  JetVec first = sum({{-nd, scale(f, b.trace_hess(gl))},
                      {-nd * nd / 2, scale(f, b.grad(b.inner(gl, gl)))},
                      {-nd, scale(f, b.ric(gl))},
                      {-nd * lap_f, gl},
                      {-nd, b.nabla(gl, B.grad_f)}});
  out.push_back({"product_id_psi_f_bi_tension_printed", "f_bi", stack(first, zeros(w.n()))});
  // (tau_{2,f}(pi1), 0) with pi1's tension field from the generic engine
  const auto pi1 = special_map(as_projection(s, SpecialKind::projection_pi1));
  LocalMap lm(pi1, p, 4);
  auto block = jet_values(lm.f_bi_tension_direct(lm.field(s.weight)));
  block.resize(w.m() + w.n(), 0.0);
  out.push_back({"product_id_psi_block_structure", "f_bi", block});
  return out;
}

std::vector<PrintedForm> forms_phi_phi(const SpecialMapScenario& s, const Point& p) {
  const auto& w = wp(s);
  const double nd = w.n();
  const Point x = w.base_point(p), y = w.fiber_point(p);
  const SmoothMap phiM(w.base(), w.base(), s.phiM), phiN(w.fiber(), w.fiber(), s.psi);
  LocalMap A(phiM, x, 4), Bn(phiN, y, 4);
  const Jet f = A.field(restrict_to_base(s.weight, w.m(), y));
  const Jet lam = A.field(w.lambda());
  const JetVec gl = A.grad(log(lam));
  const double l2 = lam.value() * lam.value();
  const Jet fN = Bn.field(restrict_to_fiber(s.weight, x, w.n()));
  const JetVec gfN = Bn.grad(fN);
  const JetVec Wp = A.push(scale(f, A.grad(nd * log(lam) + log(f))));
  const JetVec Vp = Bn.push(gfN);
  std::vector<PrintedForm> out;
  out.push_back({"product_phi_phi_tension", "tau", stack(A.push(scale(Jet(nd), gl)), zeros(w.n()))});
  out.push_back({"product_phi_phi_f_tension", "tau_f", stack(Wp, scale(Jet(1.0 / l2), Vp))});
  JetVec a = sum({{-1.0, scale(f, A.rough_laplacian(Wp))},
                  {-1.0, scale(f, A.curvature_trace(Wp))},
                  {-1.0, A.covariant_along(Wp, A.grad(f))},
                  {-nd, scale(f, A.covariant_along(Wp, gl))}});
  JetVec bb = sum({{-1.0 / l2, scale(fN, Bn.rough_laplacian(Vp))},
                   {-1.0 / l2, scale(fN, Bn.curvature_trace(Vp))},
                   {-1.0 / l2, Bn.covariant_along(Vp, gfN)}});
  out.push_back({"product_phi_phi_bi_f_tension_blocks", "bi_f", stack(a, bb)});
  return out;
}

std::vector<PrintedForm> forms_into_warped(const SpecialMapScenario& s, const Point& p) {
  const auto& w = wp(s);
  const Point x = w.base_point(p), y = w.fiber_point(p);
  Factor b(w.base(), x);
  const Warping W(b, w.lambda());
  LocalMap P(SmoothMap(w.fiber(), w.fiber(), s.psi), y, 4);
  const Jet e = P.energy_density();
  const JetVec ge = P.grad(e);
  const double ev = e.value(), lap_e = P.laplacian(e).value();
  const Jet fB = b.field(restrict_to_base(s.weight, w.m(), y));
  const Jet fN = P.field(restrict_to_fiber(s.weight, x, w.n()));
  const JetVec gfB = b.grad(fB), gfN = P.grad(fN);
  const double fv = fB.value(), lam = W.lam.value(), G_sq = W.G_sq.value();
  const double lap_f = laplacian(direct_chart(w), s.weight, p);
  const double gfN_e = P.inner_M(gfN, ge).value();
  std::vector<PrintedForm> out;
  out.push_back({"product_into_warped_tension", "tau", stack(scale(Jet(-ev), W.G), zeros(w.n()))});
  out.push_back({"product_into_warped_f_tension", "tau_f",
                 stack(sum({{-ev * fv, W.G}, {1.0, gfB}}), P.push(gfN))});
  JetVec first = sum({{ev * fv, b.trace_hess(W.G)},
                      {-0.5 * ev * ev * fv, W.grad_G_sq},
                      {2 * ev * fv, b.ric(W.G)},
                      {lap_e * fv, W.G},
                      {lap_f * ev, W.G},
                      {ev, b.nabla(W.G, gfB)},
                      {2 * gfN_e, W.G}});
  JetVec second = sum({{ev / lam * G_sq, gfN}, {G_sq * fv / (lam * lam), P.push(ge)}});
  out.push_back({"product_into_warped_f_bi_tension_printed", "f_bi", stack(first, second)});
  return out;
}

ConditionReport generic_report(const SpecialMapScenario& s, const std::vector<Point>& samples,
                               const std::string& quantity, double tol) {
  const auto phi = special_map(s);
  std::vector<double> field;
  for (const auto& p : samples) field.push_back(norm2(generic_quantity(tension_hierarchy(phi, s.weight, p), quantity)));
  return make_condition(to_string(s.kind) + "_generic_" + quantity, field, tol);
}

}  // namespace

ChartManifold special_domain(const SpecialMapScenario& s) {
  switch (s.kind) {
    case SpecialKind::inclusion_iy0: return s.warped.base();
    case SpecialKind::inclusion_ix0: return s.warped.fiber();
    case SpecialKind::product_into_warped_id_x_psi: return direct_chart(s.warped);
    default: return s.warped.chart();
  }
}

ChartManifold special_codomain(const SpecialMapScenario& s) {
  switch (s.kind) {
    case SpecialKind::projection_pi1: return s.warped.base();
    case SpecialKind::projection_pi2: return s.warped.fiber();
    case SpecialKind::product_id_x_psi:
    case SpecialKind::product_phiM_x_phiN: return direct_chart(s.warped);
    default: return s.warped.chart();
  }
}

SmoothMap special_map(const SpecialMapScenario& s) {
  const int m = s.warped.m(), n = s.warped.n();
  ExprVec c;
  auto need = [&](const ExprVec& v, int d, const char* what) {
    if (static_cast<int>(v.size()) != d) throw ScenarioError(s.name + ": " + what + " needs " + std::to_string(d) + " components");
  };
  switch (s.kind) {
    case SpecialKind::inclusion_iy0:
      if (static_cast<int>(s.anchor.dim()) != n) throw ScenarioError(s.name + ": anchor y0 has wrong dimension");
      c = coordinate_exprs(m);
      for (double v : s.anchor.coords) c.push_back(v);
      break;
    case SpecialKind::inclusion_ix0:
      if (static_cast<int>(s.anchor.dim()) != m) throw ScenarioError(s.name + ": anchor x0 has wrong dimension");
      for (double v : s.anchor.coords) c.push_back(v);
      for (const auto& e : coordinate_exprs(n)) c.push_back(e);
      break;
    case SpecialKind::projection_pi1: c = coordinate_exprs(m); break;
    case SpecialKind::projection_pi2: c = coordinate_exprs(n, m); break;
    case SpecialKind::product_id_x_psi:
    case SpecialKind::product_into_warped_id_x_psi:
      need(s.psi, n, "psi");
      c = coordinate_exprs(m);
      for (const auto& e : s.psi) c.push_back(e.shifted(m));
      break;
    case SpecialKind::product_phiM_x_phiN:
      need(s.phiM, m, "phiM");
      need(s.psi, n, "phiN");
      c = s.phiM;
      for (const auto& e : s.psi) c.push_back(e.shifted(m));
      break;
  }
  return SmoothMap(special_domain(s), special_codomain(s), c);
}

std::vector<Point> special_samples(const SpecialMapScenario& s, int count, std::uint64_t seed) {
  const auto dom = special_domain(s);
  std::mt19937_64 rng(seed);
  std::vector<Point> r;
  for (int i = 0; i < count; ++i) r.push_back(dom.sample(rng, 0.1));
  for (const auto& p : r)
    if (!(s.weight.eval(p.coords) > 0.0)) throw NonPositiveWeight(s.name + ": weight is not positive");
  return r;
}

std::vector<PrintedForm> printed_forms(const SpecialMapScenario& s, const Point& p) {
  switch (s.kind) {
    case SpecialKind::inclusion_iy0: return forms_iy0(s, p);
    case SpecialKind::inclusion_ix0: return forms_ix0(s, p);
    case SpecialKind::projection_pi1: return forms_pi1(s, p);
    case SpecialKind::projection_pi2: return forms_pi2(s, p);
    case SpecialKind::product_id_x_psi: return forms_id_psi(s, p);
    case SpecialKind::product_phiM_x_phiN: return forms_phi_phi(s, p);
    case SpecialKind::product_into_warped_id_x_psi: return forms_into_warped(s, p);
  }
  return {};
}

std::vector<double> generic_quantity(const TensionHierarchy& h, const std::string& q) {
  if (q == "tau") return h.tau;
  if (q == "tau_f") return h.tau_f;
  if (q == "bi") return h.bi;
  if (q == "bi_f") return h.bi_f;
  if (q == "f_bi") return h.f_bi_direct;
  throw std::invalid_argument("unknown tension quantity '" + q + "'");
}

ConditionReport make_condition(std::string formula, std::vector<double> field, double tol) {
  ConditionReport r;
  r.formula = std::move(formula);
  r.residual_field = std::move(field);
  for (double v : r.residual_field) r.max_residual = std::max(r.max_residual, std::isfinite(v) ? v : INFINITY);
  r.tolerance = tol;
  r.satisfied = r.max_residual <= tol;
  return r;
}

std::vector<FormulaCheck> verify_printed_forms(const SpecialMapScenario& s, const std::vector<Point>& samples,
                                               double tol) {
  const auto phi = special_map(s);
  std::vector<FormulaCheck> checks;
  for (const auto& p : samples) {
    const auto h = tension_hierarchy(phi, s.weight, p);
    const auto forms = printed_forms(s, p);
    if (checks.empty())
      for (const auto& f : forms) checks.push_back({f.formula, f.quantity, -1.0, tol, false, {}, {}, {}});
    for (std::size_t k = 0; k < forms.size(); ++k) {
      const auto g = generic_quantity(h, forms[k].quantity);
      const double d = max_abs(difference(forms[k].value, g)) / (1.0 + max_abs(g));
      auto& c = checks[k];
      if (d > c.max_delta || !std::isfinite(d)) {
        c.max_delta = std::isfinite(d) ? d : INFINITY;
        c.worst = p;
        c.printed_at_worst = forms[k].value;
        c.generic_at_worst = g;
      }
    }
  }
  for (auto& c : checks) c.agrees = c.max_delta <= c.tolerance;
  return checks;
}

std::vector<double> iy0_bi_f_tension(const SpecialMapScenario& s, const Point& p) {
  if (s.kind != SpecialKind::inclusion_iy0) throw WrongKind("scenario " + s.name + " is not an i_y0 inclusion");
  return forms_iy0(s, p)[2].value;
}

ConditionReport iy0_condition(const SpecialMapScenario& s, const std::vector<Point>& samples, double tol) {
  if (s.kind != SpecialKind::inclusion_iy0) throw WrongKind("scenario " + s.name + " is not an i_y0 inclusion");
  std::vector<double> field;
  for (const auto& p : samples) {
    auto v = forms_iy0(s, p)[4].value;  // -1/2 criterion
    for (auto& c : v) c *= -2.0;
    field.push_back(norm2(v));
  }
  return make_condition("iy0_bi_f_criterion", field, tol);
}

TensionHierarchy ix0_tension_chain(const SpecialMapScenario& s, const Point& p) {
  if (s.kind != SpecialKind::inclusion_ix0) throw WrongKind("scenario " + s.name + " is not an i_x0 inclusion");
  return tension_hierarchy(special_map(s), s.weight, p);
}

std::vector<ConditionReport> ix0_conditions(const SpecialMapScenario& s, const std::vector<Point>& samples,
                                            double tol) {
  if (s.kind != SpecialKind::inclusion_ix0) throw WrongKind("scenario " + s.name + " is not an i_x0 inclusion");
  const auto& w = s.warped;
  const int m = w.m();
  const double nd = w.n();
  Factor b(w.base(), s.anchor);
  const Warping W(b, w.lambda());
  const auto G = jet_values(W.G), gG = jet_values(W.grad_G_sq);
  const double lam = W.lam.value(), G_sq = W.G_sq.value();
  const double grad_lam_sq = b.inner(W.grad_lam, W.grad_lam).value();
  std::vector<double> bif1, bif2, fbi1, fbi2, fbi1_derived;
  double max_grad_f = 0.0;
  for (const auto& y : samples) {
    Factor fb(w.fiber(), y);
    const Jet f = fb.field(s.weight);
    const JetVec gf = fb.grad(f);
    const double fv = f.value(), lapf = fb.lap(f).value(), gf_sq = fb.inner(gf, gf).value();
    const auto gfv = jet_values(gf), ric = jet_values(fb.ric(gf));
    std::vector<double> e1(m), e3(m), e5(m), e2(w.n()), e4(w.n());
    for (int i = 0; i < m; ++i) {
      e1[i] = (4 * (nd + 2) * fv * lapf + 4 * (nd + 1) * gf_sq) * G[i] - nd * nd * fv * fv * gG[i];
      e3[i] = nd * fv * gG[i] - 8 * lapf * G[i];
      e5[i] = nd * fv * gG[i] - 4 * lapf * G[i];
    }
    for (int a = 0; a < w.n(); ++a) {
      e2[a] = (3 * nd + 1) * fv * G_sq * gfv[a] - 4 * fv * lam * lam * ric[a];
      e4[a] = grad_lam_sq * gfv[a];
    }
    bif1.push_back(norm2(e1));
    bif2.push_back(norm2(e2));
    fbi1.push_back(norm2(e3));
    fbi2.push_back(norm2(e4));
    fbi1_derived.push_back(norm2(e5));
    max_grad_f = std::max(max_grad_f, norm2(gfv));
  }
  // second f-bi equation holding everywhere must force lambda or f constant
  const auto second = make_condition("ix0_f_bi_system_second", fbi2, tol);
  const double forced = second.satisfied ? std::min(std::sqrt(grad_lam_sq), max_grad_f) : 0.0;
  return {make_condition("ix0_bi_f_system_first", bif1, tol),
          make_condition("ix0_bi_f_system_second", bif2, tol),
          make_condition("ix0_f_bi_system_first_printed", fbi1, tol),
          make_condition("ix0_f_bi_system_first_rederived", fbi1_derived, tol),
          second,
          make_condition("ix0_f_bi_second_forces_constant", std::vector<double>(samples.size(), forced), tol),
          generic_report(s, samples, "bi_f", tol),
          generic_report(s, samples, "f_bi", tol)};
}

std::vector<ConditionReport> evaluate_conditions(const SpecialMapScenario& s, const std::vector<Point>& samples,
                                                 double tol) {
  const auto& w = s.warped;
  const double nd = w.n();
  std::vector<ConditionReport> out;
  switch (s.kind) {
    case SpecialKind::inclusion_iy0: {
      out.push_back(iy0_condition(s, samples, tol));
      const auto phi = special_map(s);
      std::vector<double> sff;
      for (const auto& p : samples) {
        LocalMap lm(phi, p, 2);
        double worst = 0.0;
        for (int i = 0; i < w.m(); ++i)
          for (int j = 0; j < w.m(); ++j) worst = std::max(worst, max_abs(jet_values(lm.second_fundamental_form(i, j))));
        sff.push_back(worst);
      }
      out.push_back(make_condition("iy0_totally_geodesic", sff, tol));
      out.push_back(generic_report(s, samples, "tau", tol));
      out.push_back(generic_report(s, samples, "bi_f", tol));
      break;
    }
    case SpecialKind::inclusion_ix0: return ix0_conditions(s, samples, tol);
    case SpecialKind::projection_pi1: {
      std::vector<double> hyp, crit;
      for (const auto& p : samples) {
        BaseAtProduct B(s, p);
        const JetVec g = B.b.grad(nd * log(B.lam) + log(B.f));
        hyp.push_back(norm2(jet_values(g)));
        auto v = forms_pi1(s, p)[3].value;
        for (auto& c : v) c /= -nd;
        crit.push_back(norm2(v));
      }
      out.push_back(make_condition("pi1_bi_f_hypothesis_grad_log_f_lambda_n", hyp, tol));
      out.push_back(make_condition("pi1_f_bi_criterion", crit, tol));
      out.push_back(generic_report(s, samples, "bi_f", tol));
      out.push_back(generic_report(s, samples, "f_bi", tol));
      break;
    }
    case SpecialKind::projection_pi2: {
      std::vector<double> par, ric;
      for (const auto& p : samples) {
        Factor fb(w.fiber(), w.fiber_point(p));
        const Jet f = fb.field(restrict_to_fiber(s.weight, w.base_point(p), w.n()));
        const JetVec gf = fb.grad(f);
        double worst = 0.0;
        for (int i = 0; i < w.n(); ++i) worst = std::max(worst, max_abs(jet_values(fb.lm.covariant(gf, i))));
        par.push_back(worst);
        ric.push_back(norm2(jet_values(fb.ric(gf))));
      }
      out.push_back(make_condition("pi2_bi_f_hypothesis_parallel_gradient", par, tol));
      out.push_back(make_condition("pi2_bi_f_hypothesis_ricci_kills_gradient", ric, tol));
      out.push_back(generic_report(s, samples, "tau", tol));
      out.push_back(generic_report(s, samples, "bi_f", tol));
      break;
    }
    case SpecialKind::product_id_x_psi: {
      const auto phi = special_map(s);
      std::vector<double> crit, fiber;
      for (const auto& p : samples) {
        auto v = forms_id_psi(s, p)[1].value;
        v.resize(w.m());
        for (auto& c : v) c /= -nd;
        crit.push_back(norm2(v));
        const auto g = tension_hierarchy(phi, s.weight, p).f_bi_direct;
        fiber.push_back(norm2(std::vector<double>(g.begin() + w.m(), g.end())));
      }
      out.push_back(make_condition("product_id_psi_f_bi_criterion", crit, tol));
      out.push_back(make_condition("product_id_psi_fiber_block", fiber, tol));
      out.push_back(generic_report(s, samples, "f_bi", tol));
      break;
    }
    case SpecialKind::product_phiM_x_phiN:
      out.push_back(generic_report(s, samples, "tau", tol));
      out.push_back(generic_report(s, samples, "bi_f", tol));
      break;
    case SpecialKind::product_into_warped_id_x_psi: {
      std::vector<double> a, bb;
      for (const auto& p : samples) {
        auto v = forms_into_warped(s, p)[2].value;
        a.push_back(norm2(std::vector<double>(v.begin(), v.begin() + w.m())));
        const Point x = w.base_point(p), y = w.fiber_point(p);
        LocalMap P(SmoothMap(w.fiber(), w.fiber(), s.psi), y, 4);
        const Jet e = P.energy_density();
        const Jet fN = P.field(restrict_to_fiber(s.weight, x, w.n()));
        const double lam = w.lambda().eval(x.coords);
        auto r = jet_values(sum({{e.value() * lam, P.grad(fN)}, {fN.value(), P.push(P.grad(e))}}));
        bb.push_back(norm2(r));
      }
      out.push_back(make_condition("product_into_warped_f_bi_criterion_first", a, tol));
      out.push_back(make_condition("product_into_warped_f_bi_criterion_second", bb, tol));
      out.push_back(generic_report(s, samples, "f_bi", tol));
      break;
    }
  }
  return out;
}

void require_harmonic_factors(const SpecialMapScenario& s, int count, double tol) {
  auto check = [&](const ChartManifold& c, const ExprVec& comps, const char* what) {
    const SmoothMap f(c, c, comps);
    std::mt19937_64 rng(0x4a7);
    for (int i = 0; i < count; ++i) {
      const Point p = c.sample(rng, 0.1);
      if (max_abs(tension(f, p)) > tol)
        throw NonHarmonicFactor(s.name + ": factor map " + what + " is not harmonic");
    }
  };
  switch (s.kind) {
    case SpecialKind::product_id_x_psi:
    case SpecialKind::product_into_warped_id_x_psi: check(s.warped.fiber(), s.psi, "psi"); break;
    case SpecialKind::product_phiM_x_phiN:
      check(s.warped.base(), s.phiM, "phiM");
      check(s.warped.fiber(), s.psi, "phiN");
      break;
    default: break;
  }
}

SwpmCriticality swpm_criticality(const WarpedProduct& w, double t0, double tol) {
  if (w.m() != 1) throw WrongKind("criticality data needs a one-dimensional base");
  Factor b(w.base(), Point{{t0}});
  const Warping W(b, w.lambda());
  SwpmCriticality r;
  r.t0 = t0;
  r.grad_lambda2 = W.G[0].value();
  r.d_grad_lambda2_sq = W.G_sq.derivative1(0);
  r.lambda2_critical = std::abs(r.grad_lambda2) <= tol;
  r.grad_sq_critical = std::abs(r.d_grad_lambda2_sq) <= tol;
  return r;
}

WarpedProduct sphere_swpm() {
  return WarpedProduct::singly(interval("t", 0.1, pi - 0.1), interval("s", 0.0, 2 * pi, true), sin(Expr::var(0)));
}

std::vector<SpecialMapScenario> sphere_swpm_catalog() {
  const auto w = sphere_swpm();
  const Expr s = Expr::var(0);
  std::vector<SpecialMapScenario> out;
  const std::pair<const char*, double> t0s[] = {{"pi4", pi / 4}, {"pi3", pi / 3}, {"pi2", pi / 2}, {"3pi4", 3 * pi / 4}};
  for (const auto& [tag, t0] : t0s) {
    const std::string base = std::string("sphere_swpm_") + tag;
    out.push_back({base, w, SpecialKind::inclusion_ix0, 2.0 + cos(s), Point{{t0}}, {}, {}});
    out.push_back({base + "_unit_weight", w, SpecialKind::inclusion_ix0, Expr(1.0), Point{{t0}}, {}, {}});
  }
  return out;
}

std::vector<SpecialMapScenario> special_catalog() {
  const Expr v0 = Expr::var(0), v1 = Expr::var(1), v2 = Expr::var(2);
  std::vector<SpecialMapScenario> out;
  const auto circle = interval("s", 0.0, 2 * pi, true);
  const auto exp_warp_line = WarpedProduct::singly(interval("t", -1.0, 1.0), interval("s", -2.0, 2.0), exp(v0));
  const auto exp_warp_circle = WarpedProduct::singly(interval("t", -1.0, 1.0), circle, exp(v0));
  const auto sphere_base = WarpedProduct::singly(sphere_chart(0.3), circle, 2.0 + cos(v0));
  const auto line_torus = WarpedProduct::singly(interval("t", -1.0, 1.0), flat_torus(2), 1.5 + 0.5 * sin(v0));
  const auto line_sphere = WarpedProduct::singly(interval("t", -1.0, 1.0), sphere_chart(0.3), 1.0 + v0 * v0);
  const auto box2_circle = WarpedProduct::singly(flat_box(2, -1.0, 1.0), circle, 2.0 + sin(v0) * cos(v1));
  const auto torus_circle = WarpedProduct::singly(flat_torus(2), circle, 2.0 + sin(v0) * cos(v1));

  out.push_back({"iy0_line_exp_weight", exp_warp_circle, SpecialKind::inclusion_iy0, exp(v0), Point{{0.5}}, {}, {}});
  out.push_back({"iy0_affine_weight", box2_circle, SpecialKind::inclusion_iy0, 2.0 + 0.3 * v0 + 0.2 * v1,
                 Point{{1.0}}, {}, {}});
  out.push_back({"iy0_sphere_base", sphere_base, SpecialKind::inclusion_iy0, 2.0 + cos(v0) * sin(v1), Point{{0.7}},
                 {}, {}});
  out.push_back({"iy0_constant_weight", sphere_base, SpecialKind::inclusion_iy0, Expr(1.5), Point{{0.7}}, {}, {}});
  out.push_back({"ix0_exp_warp", exp_warp_line, SpecialKind::inclusion_ix0, 2.0 + sin(v0), Point{{0.3}}, {}, {}});
  out.push_back({"ix0_torus_fiber", line_torus, SpecialKind::inclusion_ix0, 2.0 + cos(v0) * sin(v1), Point{{0.4}},
                 {}, {}});
  out.push_back({"ix0_sphere_fiber", line_sphere, SpecialKind::inclusion_ix0, 2.0 + cos(v0), Point{{0.6}}, {}, {}});
  out.push_back({"pi1_exp_warp_nontrivial_bif", exp_warp_line, SpecialKind::projection_pi1, exp(-v0), {}, {}, {}});
  out.push_back({"pi1_sphere_base_weight", sphere_base, SpecialKind::projection_pi1,
                 2.0 + sin(v0) * cos(v1), {}, {}, {}});
  out.push_back({"pi1_sphere_product_weight", sphere_base, SpecialKind::projection_pi1,
                 2.0 + sin(v0) * cos(v1) + 0.3 * cos(v2), {}, {}, {}});
  out.push_back({"pi2_sphere_fiber", line_sphere, SpecialKind::projection_pi2, 2.0 + cos(v1) + 0.2 * v0, {}, {}, {}});
  out.push_back({"pi2_constant_weight", line_sphere, SpecialKind::projection_pi2, Expr(1.5), {}, {}, {}});
  out.push_back({"pi2_parallel_gradient",
                 WarpedProduct::singly(interval("t", -1.0, 1.0), flat_box(2, -1.0, 1.0), 2.0 + v0),
                 SpecialKind::projection_pi2, 3.0 + 0.3 * v1 + 0.2 * v2, {}, {}, {}});
  out.push_back({"product_id_psi_exp_warp", exp_warp_circle, SpecialKind::product_id_x_psi, Expr(1.0), {},
                 {Expr::var(0)}, {}});
  out.push_back({"product_id_psi_torus_shift", line_torus, SpecialKind::product_id_x_psi,
                 2.0 + cos(v0) + 0.3 * sin(v1), {}, {v0 + 0.3, v1 - 0.2}, {}});
  out.push_back({"product_id_psi_torus_linear", line_torus, SpecialKind::product_id_x_psi,
                 2.0 + cos(v0) + 0.3 * sin(v1), {}, {v0 + v1, v0 - v1}, {}});
  out.push_back({"product_id_psi_sphere_rotation",
                 WarpedProduct::singly(interval("t", -1.0, 1.0), sphere_chart(0.3), 2.0 + 0.5 * sin(v0)),
                 SpecialKind::product_id_x_psi, 2.0 + 0.3 * v0 + 0.2 * cos(v1) * sin(v2), {}, {v0, v1 + 0.7}, {}});
  out.push_back({"product_phi_phi_identity", exp_warp_circle, SpecialKind::product_phiM_x_phiN,
                 2.0 + 0.3 * v0 + 0.2 * cos(v1), {}, {v0}, {v0}});
  out.push_back({"product_phi_phi_base_weight", exp_warp_circle, SpecialKind::product_phiM_x_phiN, 2.0 + 0.3 * v0,
                 {}, {v0}, {v0}});
  out.push_back({"product_phi_phi_torus_linear", torus_circle, SpecialKind::product_phiM_x_phiN,
                 2.0 + 0.3 * sin(v0) + 0.2 * cos(v2), {}, {v0 + 0.4}, {v0 + v1, v1}});
  out.push_back({"product_into_warped_identity", exp_warp_circle, SpecialKind::product_into_warped_id_x_psi,
                 2.0 + 0.3 * v0 + 0.2 * cos(v1), {}, {v0}, {}});
  out.push_back({"product_into_warped_unit_weight", exp_warp_circle, SpecialKind::product_into_warped_id_x_psi,
                 Expr(1.0), {}, {v0}, {}});
  out.push_back({"product_into_warped_torus_linear", line_torus, SpecialKind::product_into_warped_id_x_psi,
                 2.0 + 0.3 * v0 + 0.2 * cos(v1), {}, {v0 + v1, v0 - v1}, {}});
  for (auto& s : sphere_swpm_catalog()) out.push_back(std::move(s));
  return out;
}

}  // namespace fbh
