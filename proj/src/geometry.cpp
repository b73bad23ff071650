#include "fbh/geometry.hpp"

#include <cmath>
#include <sstream>

namespace fbh {

ChartManifold::ChartManifold(std::string name, std::vector<std::string> coords, std::vector<Interval> box,
                             std::vector<Expr> metric_upper)
    : name_(std::move(name)), coords_(std::move(coords)), box_(std::move(box)), upper_(std::move(metric_upper)) {
  const auto d = coords_.size();
  if (d == 0) throw std::invalid_argument("manifold needs at least one coordinate");
  if (box_.size() != d) throw std::invalid_argument("domain box dimension mismatch for " + name_);
  if (upper_.size() != d * (d + 1) / 2) throw std::invalid_argument("metric entry count mismatch for " + name_);
  for (const auto& iv : box_)
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("empty coordinate interval in " + name_);
  for (const auto& e : upper_) {
    if (e.max_var() >= static_cast<int>(d))
      throw std::invalid_argument("metric of " + name_ + " references a coordinate it does not have");
    constant_metric_ = constant_metric_ && e.is_constant();
  }
}

ChartManifold ChartManifold::diagonal(std::string name, std::vector<std::string> coords, std::vector<Interval> box,
                                      std::vector<Expr> diag) {
  const int d = static_cast<int>(diag.size());
  std::vector<Expr> up;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) up.push_back(i == j ? diag[i] : Expr(0.0));
  return ChartManifold(std::move(name), std::move(coords), std::move(box), std::move(up));
}

const Expr& ChartManifold::metric_entry(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int d = dim();
  return upper_[i * d - i * (i - 1) / 2 + (j - i)];
}

Eigen::MatrixXd ChartManifold::metric(const Point& p) const {
  const auto g = metric_at<double>(p.coords);
  Eigen::MatrixXd r(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) r(i, j) = g(i, j);
  return r;
}

Point ChartManifold::wrap(const Point& p) const {
  Point q = p;
  for (int i = 0; i < dim(); ++i) {
    const auto& iv = box_[i];
    if (!iv.periodic) continue;
    const double len = iv.length();
    q.coords[i] = iv.lo + std::fmod(std::fmod(p.coords[i] - iv.lo, len) + len, len);
  }
  return q;
}

bool ChartManifold::contains(const Point& p) const {
  if (static_cast<int>(p.dim()) != dim()) return false;
  const Point q = wrap(p);
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(q.coords[i])) return false;
    if (box_[i].periodic) continue;
    if (q.coords[i] < box_[i].lo || q.coords[i] > box_[i].hi) return false;
  }
  return true;
}

void ChartManifold::require_contains(const Point& p) const {
  if (contains(p)) return;
  std::ostringstream os;
  os << "point (";
  for (std::size_t i = 0; i < p.dim(); ++i) os << (i ? ", " : "") << p.coords[i];
  os << ") outside the chart of " << name_;
  throw OutOfDomain(os.str());
}

Point ChartManifold::sample(std::mt19937_64& rng, double margin) const {
  Point p;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& iv : box_) {
    const double m = iv.periodic ? 0.0 : margin * iv.length();
    p.coords.push_back(iv.lo + m + (iv.length() - 2.0 * m) * u(rng));
  }
  return p;
}

JetVec coordinate_jets(const Point& p, int order) {
  const int d = static_cast<int>(p.dim());
  JetVec x;
  x.reserve(d);
  for (int i = 0; i < d; ++i) x.push_back(Jet::variable(d, order, i, p.coords[i]));
  return x;
}

LocalMetric local_metric(const ChartManifold& m, const Point& p, int order) {
  const int d = m.dim();
  LocalMetric lm;
  lm.dim = d;
  const auto x = coordinate_jets(p, order);
  lm.g = m.metric_at<Jet>(x);
  lm.ginv = spd_inverse(lm.g);
  lm.gamma.assign(d * d * d, Jet(0.0));
  if (m.has_constant_metric()) return lm;
  // dg[l][i][j] = d_l g_ij
  std::vector<Jet> dg(d * d * d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) dg[(l * d + i) * d + j] = lm.g(i, j).partial(l);
  auto D = [&](int l, int i, int j) -> const Jet& { return dg[(l * d + i) * d + j]; };
  // first kind Gamma_lij = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
  std::vector<Jet> first(d * d * d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        first[(l * d + i) * d + j] = 0.5 * (D(i, j, l) + D(j, i, l) - D(l, i, j));
        first[(l * d + j) * d + i] = first[(l * d + i) * d + j];
      }
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        Jet s(0.0);
        for (int l = 0; l < d; ++l) s += lm.ginv(k, l) * first[(l * d + i) * d + j];
        lm.gamma[(k * d + i) * d + j] = s;
        lm.gamma[(k * d + j) * d + i] = s;
      }
  return lm;
}

JetVec LocalMetric::riemann() const {
  const int d = dim;
  JetVec r(d * d * d * d, Jet(0.0));
  std::vector<Jet> dgam(d * d * d * d);  // d_m Gamma^k_ij
  for (int mm = 0; mm < d; ++mm)
    for (int k = 0; k < d * d * d; ++k) dgam[mm * d * d * d + k] = gamma[k].partial(mm);
  auto dG = [&](int mm, int k, int i, int j) -> const Jet& { return dgam[mm * d * d * d + (k * d + i) * d + j]; };
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          Jet s = dG(i, l, j, k) - dG(j, l, i, k);
          for (int q = 0; q < d; ++q) s += Gamma(l, i, q) * Gamma(q, j, k) - Gamma(l, j, q) * Gamma(q, i, k);
          r[((l * d + i) * d + j) * d + k] = s;
          r[((l * d + j) * d + i) * d + k] = -s;
        }
  return r;
}

std::vector<double> jet_values(const JetVec& v) {
  std::vector<double> r;
  r.reserve(v.size());
  for (const auto& j : v) r.push_back(j.value());
  return r;
}

JetVec values_as_jets(std::span<const double> v) { return JetVec(v.begin(), v.end()); }

std::vector<double> christoffel(const ChartManifold& m, const Point& p) {
  m.require_contains(p);
  return jet_values(local_metric(m, p, 1).gamma);
}

std::vector<double> riemann(const ChartManifold& m, const Point& p) {
  m.require_contains(p);
  return jet_values(local_metric(m, p, 2).riemann());
}

std::vector<double> riemann_apply(const ChartManifold& m, const Point& p, std::span<const double> x,
                                  std::span<const double> y, std::span<const double> z) {
  const auto r = riemann(m, p);
  const int d = m.dim();
  std::vector<double> out(d, 0.0);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) out[l] += r[((l * d + i) * d + j) * d + k] * x[i] * y[j] * z[k];
  return out;
}

std::vector<double> ricci_apply(const ChartManifold& m, const Point& p, std::span<const double> x) {
  m.require_contains(p);
  const auto lm = local_metric(m, p, 2);
  const auto r = jet_values(lm.riemann());
  const int d = m.dim();
  std::vector<double> out(d, 0.0);
  for (int l = 0; l < d; ++l)
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[l] += r[((l * d + a) * d + i) * d + j] * x[a] * lm.ginv(i, j).value();
  return out;
}

std::vector<double> gradient(const ChartManifold& m, const ScalarField& f, const Point& p) {
  m.require_contains(p);
  const auto x = coordinate_jets(p, 1);
  const Jet fj = f.eval(std::span<const Jet>(x));
  const auto g = m.metric_at<double>(p.coords);
  const auto gi = spd_inverse(g);
  const int d = m.dim();
  std::vector<double> out(d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[i] += gi(i, j) * fj.derivative1(j);
  return out;
}

Eigen::MatrixXd hessian(const ChartManifold& m, const ScalarField& f, const Point& p) {
  m.require_contains(p);
  const int d = m.dim();
  const auto lm = local_metric(m, p, 2);
  const auto x = coordinate_jets(p, 2);
  const Jet fj = f.eval(std::span<const Jet>(x));
  Eigen::MatrixXd h(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = fj.derivative2(i, j);
      for (int k = 0; k < d; ++k) s -= lm.Gamma(k, i, j).value() * fj.derivative1(k);
      h(i, j) = s;
    }
  return h;
}

double laplacian(const ChartManifold& m, const ScalarField& f, const Point& p) {
  const auto h = hessian(m, f, p);
  const auto gi = spd_inverse(m.metric_at<double>(p.coords));
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += gi(i, j) * h(i, j);
  return s;
}

Eigen::MatrixXd orthonormal_frame(const ChartManifold& m, const Point& p,
                                  const std::optional<Eigen::MatrixXd>& rotation) {
  m.require_contains(p);
  const int d = m.dim();
  const auto li = lower_inverse(cholesky(m.metric_at<double>(p.coords)));
  Eigen::MatrixXd e(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) e(i, j) = li(j, i);
  if (rotation) e = e * (*rotation);
  return e;
}

std::vector<double> covariant_derivative_vf(const ChartManifold& m, const TangentVector& x, const ExprVec& y) {
  m.require_contains(x.base);
  const int d = m.dim();
  if (static_cast<int>(y.size()) != d || static_cast<int>(x.components.size()) != d)
    throw std::invalid_argument("vector dimension mismatch");
  const auto lm = local_metric(m, x.base, 1);
  const auto xj = coordinate_jets(x.base, 1);
  std::vector<double> out(d, 0.0);
  for (int k = 0; k < d; ++k) {
    const Jet yk = y[k].eval(std::span<const Jet>(xj));
    for (int i = 0; i < d; ++i) out[k] += x.components[i] * yk.derivative1(i);
  }
  std::vector<double> yv(d);
  for (int j = 0; j < d; ++j) yv[j] = y[j].eval(x.base.coords);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[k] += lm.Gamma(k, i, j).value() * x.components[i] * yv[j];
  return out;
}

double inner(const ChartManifold& m, const Point& p, std::span<const double> u, std::span<const double> v) {
  const auto g = m.metric_at<double>(p.coords);
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += g(i, j) * u[i] * v[j];
  return s;
}

Jet inner_jet(const JetMat& g, const JetVec& u, const JetVec& v) {
  Jet s(0.0);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) s += g(i, j) * u[i] * v[j];
  return s;
}

JetVec lower_jet(const JetMat& g, const JetVec& u) {
  JetVec r(g.rows(), Jet(0.0));
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) r[i] += g(i, j) * u[j];
  return r;
}

JetVec raise_jet(const JetMat& ginv, const JetVec& w) { return lower_jet(ginv, w); }

Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = n(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

}  // namespace fbh
