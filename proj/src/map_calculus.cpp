#include "fbh/map_calculus.hpp"

#include <cmath>

namespace fbh {

SmoothMap::SmoothMap(ChartManifold domain, ChartManifold codomain, ExprVec components)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), comps_(std::move(components)) {
  if (static_cast<int>(comps_->size()) != codomain_.dim())
    throw std::invalid_argument("map has " + std::to_string(comps_->size()) + " components, codomain " +
                                codomain_.name() + " has dimension " + std::to_string(codomain_.dim()));
  for (const auto& c : *comps_)
    if (c.max_var() >= domain_.dim())
      throw std::invalid_argument("map component references a coordinate outside " + domain_.name());
}

SmoothMap::SmoothMap(ChartManifold domain, ChartManifold codomain, JetSource source)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), source_(std::move(source)) {}

SmoothMap SmoothMap::identity(const ChartManifold& m) { return SmoothMap(m, m, coordinate_exprs(m.dim())); }

JetVec SmoothMap::jets(const Point& p, int order) const {
  if (source_) return source_(p, order);
  const auto x = coordinate_jets(p, order);
  JetVec r;
  r.reserve(comps_->size());
  for (const auto& c : *comps_) r.push_back(c.eval(std::span<const Jet>(x)));
  return r;
}

Point SmoothMap::operator()(const Point& p) const {
  Point q;
  if (comps_) {
    for (const auto& c : *comps_) q.coords.push_back(c.eval(p.coords));
  } else {
    q.coords = jet_values(source_(p, 0));
  }
  return q;
}

LocalMap::LocalMap(const SmoothMap& phi, const Point& p, int order,
                   const std::optional<Eigen::MatrixXd>& frame_rotation)
    : m_(phi.domain().dim()), n_(phi.codomain().dim()), order_(order), p_(p) {
  phi.domain().require_contains(p);
  x_ = coordinate_jets(p, order);
  phi_ = phi.jets(p, order);
  if (static_cast<int>(phi_.size()) != n_) throw std::invalid_argument("map jet count mismatch");
  dphi_.resize(n_ * m_);
  for (int a = 0; a < n_; ++a)
    for (int i = 0; i < m_; ++i) dphi_[a * m_ + i] = phi_[a].partial(i);

  dm_ = local_metric(phi.domain(), p, order);
  const auto li = lower_inverse(cholesky(dm_.g));
  JetMat e(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int c = 0; c < m_; ++c) e(i, c) = li(c, i);
  if (frame_rotation) {
    const auto& q = *frame_rotation;
    if (q.rows() != m_ || q.cols() != m_) throw std::invalid_argument("frame rotation has wrong size");
    JetMat er(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (int c = 0; c < m_; ++c) {
        Jet s(0.0);
        for (int d = 0; d < m_; ++d) s += e(i, d) * q(d, c);
        er(i, c) = s;
      }
    e = er;
  }
  G_ = JetMat(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j <= i; ++j) {
      Jet s(0.0);
      for (int c = 0; c < m_; ++c) s += e(i, c) * e(j, c);
      G_(i, j) = s;
      G_(j, i) = s;
    }

  const auto& cod = phi.codomain();
  const Point q{jet_values(phi_)};
  cod.require_contains(q);
  gammaN_.assign(n_ * n_ * n_, Jet(0.0));
  if (cod.has_constant_metric()) {
    flatN_ = true;
    h_ = cod.metric_at<Jet>(values_as_jets(q.coords));
    (void)cholesky(h_);
  } else {
    flatN_ = false;
    nm_ = local_metric(cod, q, order);
    composer_.emplace(phi_);
    h_ = JetMat(n_, n_);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) h_(a, b) = composer_->compose(nm_->g(a, b));
    for (std::size_t k = 0; k < gammaN_.size(); ++k) gammaN_[k] = composer_->compose(nm_->gamma[k]);
  }
}

const JetVec& LocalMap::riemannN() const {
  if (!riemannN_) {
    if (flatN_) {
      riemannN_ = JetVec(n_ * n_ * n_ * n_, Jet(0.0));
    } else {
      const auto r = nm_->riemann();
      JetVec out;
      out.reserve(r.size());
      for (const auto& c : r) out.push_back(composer_->compose(c));
      riemannN_ = std::move(out);
    }
  }
  return *riemannN_;
}

const JetMat& LocalMap::dphi_frame_square() const {
  if (!W_) {
    JetMat w(n_, n_);
    for (int c = 0; c < n_; ++c)
      for (int d = 0; d <= c; ++d) {
        Jet s(0.0);
        for (int i = 0; i < m_; ++i)
          for (int j = 0; j < m_; ++j) s += G_(i, j) * dphi(c, i) * dphi(d, j);
        w(c, d) = s;
        w(d, c) = s;
      }
    W_ = std::move(w);
  }
  return *W_;
}

Jet LocalMap::field(const Expr& f) const { return f.eval(std::span<const Jet>(x_)); }

JetVec LocalMap::section(const ExprVec& s) const {
  if (static_cast<int>(s.size()) != n_) throw std::invalid_argument("section has wrong component count");
  JetVec r;
  for (const auto& e : s) r.push_back(field(e));
  return r;
}

JetVec LocalMap::grad(const Jet& f) const {
  JetVec r(m_, Jet(0.0));
  for (int j = 0; j < m_; ++j) {
    const Jet fj = f.partial(j);
    for (int i = 0; i < m_; ++i) r[i] += G_(i, j) * fj;
  }
  return r;
}

Jet LocalMap::laplacian(const Jet& f) const {
  JetVec df(m_);
  for (int k = 0; k < m_; ++k) df[k] = f.partial(k);
  Jet s(0.0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      Jet hij = df[j].partial(i);
      for (int k = 0; k < m_; ++k) hij -= dm_.Gamma(k, i, j) * df[k];
      s += G_(i, j) * hij;
    }
  return s;
}

Jet LocalMap::inner_M(const JetVec& u, const JetVec& v) const { return inner_jet(dm_.g, u, v); }

JetVec LocalMap::covariant_M(const JetVec& y, const JetVec& x) const {
  JetVec r(m_, Jet(0.0));
  for (int k = 0; k < m_; ++k) {
    for (int i = 0; i < m_; ++i) r[k] += x[i] * y[k].partial(i);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) r[k] += dm_.Gamma(k, i, j) * x[i] * y[j];
  }
  return r;
}

JetVec LocalMap::push(const JetVec& x) const {
  JetVec r(n_, Jet(0.0));
  for (int a = 0; a < n_; ++a)
    for (int i = 0; i < m_; ++i) r[a] += dphi(a, i) * x[i];
  return r;
}

Jet LocalMap::inner_N(const JetVec& s, const JetVec& t) const { return inner_jet(h_, s, t); }

JetVec LocalMap::covariant(const JetVec& s, int i) const {
  JetVec r(n_);
  for (int a = 0; a < n_; ++a) r[a] = s[a].partial(i);
  if (flatN_) return r;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) {
      Jet t(0.0);
      for (int c = 0; c < n_; ++c) t += GammaN(a, b, c) * s[c];
      r[a] += dphi(b, i) * t;
    }
  return r;
}

JetVec LocalMap::covariant_along(const JetVec& s, const JetVec& x) const {
  JetVec r(n_, Jet(0.0));
  for (int i = 0; i < m_; ++i) {
    const auto d = covariant(s, i);
    for (int a = 0; a < n_; ++a) r[a] += x[i] * d[a];
  }
  return r;
}

JetVec LocalMap::rough_laplacian(const JetVec& s) const {
  std::vector<JetVec> d1(m_);
  for (int j = 0; j < m_; ++j) d1[j] = covariant(s, j);
  JetVec r(n_, Jet(0.0));
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < m_; ++j) {
      const auto dd = covariant(d1[j], i);
      for (int a = 0; a < n_; ++a) {
        Jet t = dd[a];
        for (int k = 0; k < m_; ++k) t -= dm_.Gamma(k, i, j) * d1[k][a];
        r[a] += G_(i, j) * t;
      }
    }
  }
  return r;
}

JetVec LocalMap::curvature_trace(const JetVec& s) const {
  JetVec r(n_, Jet(0.0));
  if (flatN_) return r;
  const auto& R = riemannN();
  const auto& w = dphi_frame_square();
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c)
        for (int d = 0; d < n_; ++d) {
          const Jet& rr = R[((a * n_ + b) * n_ + c) * n_ + d];
          if (rr.is_constant() && rr.value() == 0.0) continue;
          r[a] += rr * s[b] * w(c, d);
        }
  return r;
}

JetVec LocalMap::curvature_apply(const JetVec& x, const JetVec& y, const JetVec& z) const {
  JetVec r(n_, Jet(0.0));
  if (flatN_) return r;
  const auto& R = riemannN();
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c)
        for (int d = 0; d < n_; ++d) r[a] += R[((a * n_ + b) * n_ + c) * n_ + d] * x[b] * y[c] * z[d];
  return r;
}

JetVec LocalMap::jacobi(const JetVec& s) const {
  auto r = rough_laplacian(s);
  const auto c = curvature_trace(s);
  for (int a = 0; a < n_; ++a) r[a] += c[a];
  return r;
}

JetVec LocalMap::second_fundamental_form(int i, int j) const {
  JetVec r(n_);
  for (int a = 0; a < n_; ++a) {
    Jet t = dphi(a, j).partial(i);
    for (int k = 0; k < m_; ++k) t -= dm_.Gamma(k, i, j) * dphi(a, k);
    if (!flatN_)
      for (int b = 0; b < n_; ++b)
        for (int c = 0; c < n_; ++c) t += GammaN(a, b, c) * dphi(b, i) * dphi(c, j);
    r[a] = t;
  }
  return r;
}

Jet LocalMap::energy_density() const {
  const auto& w = dphi_frame_square();
  Jet s(0.0);
  for (int c = 0; c < n_; ++c)
    for (int d = 0; d < n_; ++d) s += h_(c, d) * w(c, d);
  return 0.5 * s;
}

const JetVec& LocalMap::tension() const {
  if (!tau_) {
    JetVec r(n_, Jet(0.0));
    for (int a = 0; a < n_; ++a)
      for (int i = 0; i < m_; ++i)
        for (int j = 0; j < m_; ++j) {
          Jet t = dphi(a, j).partial(i);
          for (int k = 0; k < m_; ++k) t -= dm_.Gamma(k, i, j) * dphi(a, k);
          r[a] += G_(i, j) * t;
        }
    if (!flatN_) {
      const auto& w = dphi_frame_square();
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          for (int c = 0; c < n_; ++c) r[a] += GammaN(a, b, c) * w(b, c);
    }
    tau_ = std::move(r);
  }
  return *tau_;
}

namespace {
JetVec scaled(const Jet& f, const JetVec& v) {
  JetVec r;
  r.reserve(v.size());
  for (const auto& c : v) r.push_back(f * c);
  return r;
}
void add_to(JetVec& a, const JetVec& b, double s = 1.0) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += s * b[k];
}
}  // namespace

JetVec LocalMap::f_tension(const Jet& f) const {
  JetVec r = scaled(f, tension());
  add_to(r, push(grad(f)));
  return r;
}

JetVec LocalMap::bi_tension() const { return scaled(Jet(-1.0), jacobi(tension())); }

JetVec LocalMap::bi_f_tension(const Jet& f) const {
  const auto tf = f_tension(f);
  JetVec r = scaled(-f, jacobi(tf));
  add_to(r, covariant_along(tf, grad(f)), -1.0);
  return r;
}

JetVec LocalMap::bi_f_tension_curvature_reading(const Jet& f) const {
  const auto tf = f_tension(f);
  JetVec inside = tf;
  add_to(inside, covariant_along(tf, grad(f)), -1.0);
  JetVec r = scaled(-f, rough_laplacian(tf));
  add_to(r, scaled(f, curvature_trace(inside)), -1.0);
  return r;
}

JetVec LocalMap::f_bi_tension_direct(const Jet& f) const {
  return scaled(Jet(-1.0), jacobi(scaled(f, tension())));
}

JetVec LocalMap::f_bi_tension_via_relation(const Jet& f) const {
  JetVec r = scaled(f, bi_tension());
  add_to(r, scaled(laplacian(f), tension()), -1.0);
  add_to(r, covariant_along(tension(), grad(f)), -2.0);
  return r;
}

std::vector<double> differential(const SmoothMap& phi, const TangentVector& x) {
  phi.domain().require_contains(x.base);
  const auto j = phi.jets(x.base, 1);
  std::vector<double> r(j.size(), 0.0);
  for (std::size_t a = 0; a < j.size(); ++a)
    for (std::size_t i = 0; i < x.components.size(); ++i) r[a] += j[a].derivative1(static_cast<int>(i)) * x.components[i];
  return r;
}

double energy_density(const SmoothMap& phi, const Point& p) { return LocalMap(phi, p, 1).energy_density().value(); }

std::vector<double> second_fundamental_form(const SmoothMap& phi, const Point& p, std::span<const double> x,
                                            std::span<const double> y) {
  LocalMap lm(phi, p, 2);
  std::vector<double> r(lm.n(), 0.0);
  for (int i = 0; i < lm.m(); ++i)
    for (int j = 0; j < lm.m(); ++j) {
      const auto b = lm.second_fundamental_form(i, j);
      for (int a = 0; a < lm.n(); ++a) r[a] += x[i] * y[j] * b[a].value();
    }
  return r;
}

std::vector<double> tension(const SmoothMap& phi, const Point& p, const std::optional<Eigen::MatrixXd>& rot) {
  return jet_values(LocalMap(phi, p, 2, rot).tension());
}

std::vector<double> f_tension(const SmoothMap& phi, const ScalarField& f, const Point& p) {
  LocalMap lm(phi, p, 2);
  return jet_values(lm.f_tension(lm.field(f)));
}

std::vector<double> pullback_connection(const SmoothMap& phi, const ExprVec& s, const TangentVector& x) {
  LocalMap lm(phi, x.base, 1);
  return jet_values(lm.covariant_along(lm.section(s), values_as_jets(x.components)));
}

std::vector<double> rough_laplacian(const SmoothMap& phi, const ExprVec& s, const Point& p,
                                    const std::optional<Eigen::MatrixXd>& rot) {
  LocalMap lm(phi, p, 2, rot);
  return jet_values(lm.rough_laplacian(lm.section(s)));
}

std::vector<double> curvature_trace(const SmoothMap& phi, const ExprVec& s, const Point& p) {
  LocalMap lm(phi, p, 2);
  return jet_values(lm.curvature_trace(lm.section(s)));
}

std::vector<double> jacobi_operator(const SmoothMap& phi, const ExprVec& s, const Point& p) {
  LocalMap lm(phi, p, 2);
  return jet_values(lm.jacobi(lm.section(s)));
}

std::vector<double> bi_tension(const SmoothMap& phi, const Point& p) {
  return jet_values(LocalMap(phi, p, 4).bi_tension());
}

std::vector<double> bi_f_tension(const SmoothMap& phi, const ScalarField& f, const Point& p) {
  LocalMap lm(phi, p, 4);
  return jet_values(lm.bi_f_tension(lm.field(f)));
}

std::vector<double> f_bi_tension_direct(const SmoothMap& phi, const ScalarField& f, const Point& p) {
  LocalMap lm(phi, p, 4);
  return jet_values(lm.f_bi_tension_direct(lm.field(f)));
}

std::vector<double> f_bi_tension_via_relation(const SmoothMap& phi, const ScalarField& f, const Point& p) {
  LocalMap lm(phi, p, 4);
  return jet_values(lm.f_bi_tension_via_relation(lm.field(f)));
}

TensionHierarchy tension_hierarchy(const SmoothMap& phi, const ScalarField& f, const Point& p,
                                   const std::optional<Eigen::MatrixXd>& rot) {
  LocalMap lm(phi, p, 4, rot);
  const Jet fj = lm.field(f);
  TensionHierarchy h;
  h.energy_density = lm.energy_density().value();
  h.tau = jet_values(lm.tension());
  h.tau_f = jet_values(lm.f_tension(fj));
  h.bi = jet_values(lm.bi_tension());
  h.bi_f = jet_values(lm.bi_f_tension(fj));
  h.f_bi_direct = jet_values(lm.f_bi_tension_direct(fj));
  h.f_bi_relation = jet_values(lm.f_bi_tension_via_relation(fj));
  return h;
}

double codomain_norm(const SmoothMap& phi, const Point& p, std::span<const double> v) {
  const Point q = phi(p);
  return std::sqrt(std::max(0.0, inner(phi.codomain(), q, v, v)));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

}  // namespace fbh
