#include "fbh/variational.hpp"

#include "fbh/errors.hpp"
#include "fbh/standard_manifolds.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace fbh {

namespace {

constexpr int kMaxOrder = 4;

std::vector<std::vector<int>> multi_indices(int d, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(d, 0);
  for (int total = 0; total <= max_order; ++total) {
    std::function<void(int, int)> rec = [&](int axis, int left) {
      if (axis == d - 1) {
        a[axis] = left;
        out.push_back(a);
        return;
      }
      for (int k = left; k >= 0; --k) {
        a[axis] = k;
        rec(axis + 1, left - k);
      }
    };
    rec(0, total);
  }
  return out;
}

int degree(const std::vector<int>& a) {
  int s = 0;
  for (int k : a) s += k;
  return s;
}

double factorial_product(const std::vector<int>& a) {
  double r = 1.0;
  for (int k : a)
    for (int j = 2; j <= k; ++j) r *= j;
  return r;
}

// Forward transform, multiply by prod (i k_j)^{alpha_j}, inverse.
class Spectral {
 public:
  Spectral(int d, int n, std::vector<double> len) : d_(d), n_(n), len_(std::move(len)) {
    total_ = 1;
    for (int i = 0; i < d; ++i) total_ *= static_cast<std::size_t>(n);
  }

  std::vector<std::complex<double>> forward(std::span<const double> v) const {
    std::vector<std::complex<double>> buf(v.begin(), v.end());
    run(buf, FFTW_FORWARD);
    return buf;
  }

  std::vector<double> apply(const std::vector<std::complex<double>>& hat, std::span<const int> alpha) const {
    std::vector<std::complex<double>> buf = hat;
    bool any = false;
    for (int k : alpha) any = any || k > 0;
    if (any) {
      std::vector<int> idx(d_, 0);
      for (std::size_t q = 0; q < total_; ++q) {
        std::size_t r = q;
        for (int j = d_ - 1; j >= 0; --j) {
          idx[j] = static_cast<int>(r % n_);
          r /= n_;
        }
        std::complex<double> m(1.0, 0.0);
        for (int j = 0; j < d_ && m != 0.0; ++j) {
          if (alpha[j] == 0) continue;
          int w = idx[j] <= n_ / 2 ? idx[j] : idx[j] - n_;
          if (n_ % 2 == 0 && idx[j] == n_ / 2) w = 0;
          const std::complex<double> ik(0.0, 2.0 * std::numbers::pi * w / len_[j]);
          for (int e = 0; e < alpha[j]; ++e) m *= ik;
        }
        buf[q] *= m;
      }
    }
    run(buf, FFTW_BACKWARD);
    std::vector<double> out(total_);
    const double s = 1.0 / static_cast<double>(total_);
    for (std::size_t q = 0; q < total_; ++q) out[q] = buf[q].real() * s;
    return out;
  }

 private:
  void run(std::vector<std::complex<double>>& buf, int sign) const {
    std::vector<int> dims(d_, n_);
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft(d_, dims.data(), data, data, sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  int d_, n_;
  std::vector<double> len_;
  std::size_t total_;
};

Point node_value(const GridMap& phi, std::size_t q) {
  const Point& x = phi.domain().nodes()[q];
  Point y;
  const int n = static_cast<int>(phi.periodic().size());
  y.coords.resize(n);
  for (int a = 0; a < n; ++a) {
    double s = phi.periodic()[a][q];
    for (std::size_t i = 0; i < x.dim(); ++i) s += phi.winding()(a, i) * x[i];
    y.coords[a] = s;
  }
  return y;
}

double pair_L2(const GridMap& phi, const NodalField& s, const NodalField& v) {
  const auto& dom = phi.domain();
  const int n = static_cast<int>(s.size());
  std::vector<double> vals(dom.size());
  for (std::size_t q = 0; q < dom.size(); ++q) {
    const Eigen::MatrixXd h = phi.codomain().metric(node_value(phi, q));
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += h(a, b) * s[a][q] * v[b][q];
    vals[q] = acc;
  }
  return dom.integrate(vals);
}

NodalField empty_field(int n, std::size_t size) { return NodalField(n, std::vector<double>(size, 0.0)); }

void store(NodalField& out, std::size_t q, const JetVec& v) {
  for (std::size_t a = 0; a < v.size(); ++a) out[a][q] = v[a].value();
}

JetVec scaled(const Jet& s, const JetVec& v) {
  JetVec r;
  r.reserve(v.size());
  for (const auto& x : v) r.push_back(s * x);
  return r;
}

JetVec combine(const JetVec& a, double sa, const JetVec& b, double sb) {
  JetVec r;
  r.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r.push_back(a[i] * sa + b[i] * sb);
  return r;
}

// Candidate gradients: derived, curvature flipped, and for E_{f,2} the
// reading with grad f inside the curvature trace.
std::vector<NodalField> candidate_fields(const GridMap& phi, const ScalarField& f, Functional k) {
  const auto& dom = phi.domain();
  const int n = phi.codomain().dim();
  const SmoothMap map = phi.as_smooth_map();
  const int count = k == Functional::E_2f ? 2 : 3;
  std::vector<NodalField> out(count, empty_field(n, dom.size()));
  for (std::size_t q = 0; q < dom.size(); ++q) {
    LocalMap lm(map, dom.nodes()[q], 4);
    const Jet fj = lm.field(f);
    if (k == Functional::E_2f) {
      const JetVec s = scaled(fj, lm.tension());
      const JetVec rough = lm.rough_laplacian(s);
      const JetVec curv = lm.curvature_trace(s);
      store(out[0], q, combine(rough, -1.0, curv, -1.0));
      store(out[1], q, combine(rough, -1.0, curv, 1.0));
    } else {
      const JetVec tf = lm.f_tension(fj);
      const JetVec rough = lm.rough_laplacian(tf);
      const JetVec curv = lm.curvature_trace(tf);
      const JetVec drift = lm.covariant_along(tf, lm.grad(fj));
      store(out[0], q, combine(scaled(fj, combine(rough, -1.0, curv, -1.0)), 1.0, drift, -1.0));
      store(out[1], q, combine(scaled(fj, combine(rough, -1.0, curv, 1.0)), 1.0, drift, -1.0));
      store(out[2], q, lm.bi_f_tension_curvature_reading(fj));
    }
  }
  return out;
}

}  // namespace

GridDomain::GridDomain(ChartManifold m, int resolution) : m_(std::move(m)), n_(resolution) {
  if (n_ < 4) throw ScenarioError("grid resolution must be at least 4");
  const int d = m_.dim();
  double cell = 1.0;
  for (const auto& iv : m_.box()) {
    if (!iv.periodic) throw ScenarioError("grid domain needs every axis periodic, " + m_.name() + " is not");
    len_.push_back(iv.length());
    cell *= iv.length() / n_;
  }
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n_);
  nodes_.reserve(total);
  w_.reserve(total);
  for (std::size_t q = 0; q < total; ++q) {
    Point p;
    p.coords.resize(d);
    std::size_t r = q;
    for (int j = d - 1; j >= 0; --j) {
      p.coords[j] = m_.box()[j].lo + len_[j] * static_cast<double>(r % n_) / n_;
      r /= n_;
    }
    const double det = m_.metric(p).determinant();
    if (!(det > 0.0)) throw SingularMetric("metric not positive definite at a grid node of " + m_.name());
    w_.push_back(cell * std::sqrt(det));
    nodes_.push_back(std::move(p));
  }
}

double GridDomain::total_weight() const {
  double s = 0.0;
  for (double w : w_) s += w;
  return s;
}

double GridDomain::integrate(std::span<const double> values) const {
  if (values.size() != w_.size()) throw ScenarioError("nodal data size does not match the grid");
  double s = 0.0;
  for (std::size_t q = 0; q < w_.size(); ++q) s += w_[q] * values[q];
  return s;
}

double GridDomain::integrate(const std::function<double(const Point&)>& density) const {
  double s = 0.0;
  for (std::size_t q = 0; q < w_.size(); ++q) s += w_[q] * density(nodes_[q]);
  return s;
}

std::vector<double> GridDomain::derivative(std::span<const double> values, std::span<const int> alpha) const {
  if (values.size() != nodes_.size() || static_cast<int>(alpha.size()) != dim())
    throw ScenarioError("derivative: size mismatch");
  Spectral sp(dim(), n_, len_);
  return sp.apply(sp.forward(values), alpha);
}

std::size_t GridDomain::index_of(const Point& p) const {
  if (static_cast<int>(p.dim()) != dim()) throw OutOfDomain("point dimension does not match the grid");
  std::size_t q = 0;
  for (int j = 0; j < dim(); ++j) {
    const double t = (p[j] - m_.box()[j].lo) / len_[j] * n_;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-6) throw OutOfDomain("point is not a grid node");
    long k = static_cast<long>(r) % n_;
    if (k < 0) k += n_;
    q = q * n_ + static_cast<std::size_t>(k);
  }
  return q;
}

struct GridMap::Cache {
  std::vector<std::vector<int>> alphas;
  // derivs[a][k][q]: d^{alphas[k]} of the full component a at node q, over alpha!.
  std::vector<std::vector<std::vector<double>>> coeffs;
};

GridMap::GridMap(std::shared_ptr<const GridDomain> domain, ChartManifold codomain, Eigen::MatrixXd winding,
                 NodalField periodic)
    : dom_(std::move(domain)), cod_(std::move(codomain)), K_(std::move(winding)), u_(std::move(periodic)) {
  const int m = dom_->dim(), n = cod_.dim();
  if (K_.rows() != n || K_.cols() != m) throw ScenarioError("winding matrix has the wrong shape");
  if (static_cast<int>(u_.size()) != n) throw ScenarioError("periodic part has the wrong number of components");
  for (const auto& c : u_)
    if (c.size() != dom_->size()) throw ScenarioError("periodic part has the wrong number of nodes");

  auto cache = std::make_shared<Cache>();
  cache->alphas = multi_indices(m, kMaxOrder);
  std::vector<double> len;
  for (const auto& iv : dom_->manifold().box()) len.push_back(iv.length());
  Spectral sp(m, dom_->resolution(), len);
  cache->coeffs.resize(n);
  for (int a = 0; a < n; ++a) {
    const auto hat = sp.forward(u_[a]);
    for (const auto& al : cache->alphas) {
      std::vector<double> c;
      if (degree(al) == 0) {
        c.resize(dom_->size());
        for (std::size_t q = 0; q < dom_->size(); ++q) {
          double s = u_[a][q];
          for (int i = 0; i < m; ++i) s += K_(a, i) * dom_->nodes()[q][i];
          c[q] = s;
        }
      } else {
        c = sp.apply(hat, al);
        if (degree(al) == 1)
          for (int i = 0; i < m; ++i)
            if (al[i] == 1)
              for (double& x : c) x += K_(a, i);
        const double fac = factorial_product(al);
        for (double& x : c) x /= fac;
      }
      cache->coeffs[a].push_back(std::move(c));
    }
  }
  cache_ = std::move(cache);
}

GridMap GridMap::sample(std::shared_ptr<const GridDomain> domain, ChartManifold codomain, const ExprVec& components,
                        Eigen::MatrixXd winding) {
  if (static_cast<int>(components.size()) != codomain.dim()) throw ScenarioError("component count mismatch");
  NodalField u = sample_field(*domain, components);
  for (int a = 0; a < static_cast<int>(u.size()); ++a)
    for (std::size_t q = 0; q < domain->size(); ++q)
      for (int i = 0; i < domain->dim(); ++i) u[a][q] -= winding(a, i) * domain->nodes()[q][i];
  return GridMap(std::move(domain), std::move(codomain), std::move(winding), std::move(u));
}

GridMap GridMap::perturbed(const NodalField& v, double t) const {
  if (v.size() != u_.size()) throw ScenarioError("variation has the wrong number of components");
  NodalField u = u_;
  for (std::size_t a = 0; a < u.size(); ++a) {
    if (v[a].size() != u[a].size()) throw ScenarioError("variation has the wrong number of nodes");
    for (std::size_t q = 0; q < u[a].size(); ++q) u[a][q] += t * v[a][q];
  }
  return GridMap(dom_, cod_, K_, std::move(u));
}

SmoothMap GridMap::as_smooth_map() const {
  auto dom = dom_;
  auto cache = cache_;
  auto K = K_;
  SmoothMap::JetSource src = [dom, cache, K](const Point& p, int order) {
    if (order > kMaxOrder) throw ScenarioError("grid maps carry derivatives up to order 4");
    const std::size_t q = dom->index_of(p);
    const int m = dom->dim();
    const Point& node = dom->nodes()[q];
    JetVec delta;
    for (int i = 0; i < m; ++i) delta.push_back(Jet::variable(m, order, i, 0.0));
    std::vector<Jet> mono;
    for (const auto& al : cache->alphas) {
      if (degree(al) > order) break;
      Jet j = Jet::constant(m, order, 1.0);
      for (int i = 0; i < m; ++i)
        for (int e = 0; e < al[i]; ++e) j = j * delta[i];
      mono.push_back(std::move(j));
    }
    JetVec out;
    for (std::size_t a = 0; a < cache->coeffs.size(); ++a) {
      // Off-node lifts of the same node shift the value by the winding.
      double shift = 0.0;
      for (int i = 0; i < m; ++i) shift += K(a, i) * (p[i] - node[i]);
      Jet s = Jet::constant(m, order, cache->coeffs[a][0][q] + shift);
      for (std::size_t k = 1; k < mono.size(); ++k) s += mono[k] * cache->coeffs[a][k][q];
      out.push_back(std::move(s));
    }
    return out;
  };
  return SmoothMap(dom_->manifold(), cod_, std::move(src));
}

NodalField sample_field(const GridDomain& d, const ExprVec& v) {
  NodalField out(v.size(), std::vector<double>(d.size()));
  for (std::size_t a = 0; a < v.size(); ++a)
    for (std::size_t q = 0; q < d.size(); ++q) out[a][q] = v[a].eval(d.nodes()[q].coords);
  return out;
}

ExprVec random_trig_field(int dim, int components, std::uint64_t seed, int modes, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::vector<int>> ks;
  std::vector<int> k(dim, -modes);
  for (;;) {
    bool nonzero = false;
    for (int x : k) nonzero = nonzero || x != 0;
    if (nonzero) ks.push_back(k);
    int j = 0;
    while (j < dim && ++k[j] > modes) k[j++] = -modes;
    if (j == dim) break;
  }
  const double scale = amplitude / static_cast<double>(ks.size());
  ExprVec out;
  for (int a = 0; a < components; ++a) {
    Expr s(0.0);
    for (const auto& kk : ks) {
      Expr arg(0.0);
      for (int i = 0; i < dim; ++i)
        if (kk[i] != 0) arg = arg + static_cast<double>(kk[i]) * Expr::var(i);
      s = s + scale * U(rng) * cos(arg) + scale * U(rng) * sin(arg);
    }
    out.push_back(s);
  }
  return out;
}

EnergyReport energies(const GridMap& phi, const ScalarField& f) {
  const auto& dom = phi.domain();
  const SmoothMap map = phi.as_smooth_map();
  EnergyReport r;
  const std::size_t N = dom.size();
  r.e.resize(N), r.e_f.resize(N), r.e_2.resize(N), r.e_f2.resize(N), r.e_2f.resize(N);
  for (std::size_t q = 0; q < N; ++q) {
    LocalMap lm(map, dom.nodes()[q], 2);
    const Jet fj = lm.field(f);
    const double fv = fj.value();
    if (!(fv > 0.0)) throw NonPositiveWeight("weight is not positive at a grid node");
    const double e = lm.energy_density().value();
    const JetVec& tau = lm.tension();
    const JetVec tf = lm.f_tension(fj);
    const double t2 = lm.inner_N(tau, tau).value();
    r.e[q] = e;
    r.e_f[q] = fv * e;
    r.e_2[q] = 0.5 * t2;
    r.e_f2[q] = 0.5 * lm.inner_N(tf, tf).value();
    r.e_2f[q] = 0.5 * fv * t2;
  }
  r.E = dom.integrate(r.e);
  r.E_f = dom.integrate(r.e_f);
  r.E_2 = dom.integrate(r.e_2);
  r.E_f2 = dom.integrate(r.e_f2);
  r.E_2f = dom.integrate(r.e_2f);
  return r;
}

double bi_f_energy(const GridMap& phi, const ScalarField& f) {
  const auto& dom = phi.domain();
  const SmoothMap map = phi.as_smooth_map();
  std::vector<double> d(dom.size());
  for (std::size_t q = 0; q < dom.size(); ++q) {
    LocalMap lm(map, dom.nodes()[q], 2);
    const double fv = lm.field(f).value();
    if (!(fv > 0.0)) throw NonPositiveWeight("weight is not positive at a grid node");
    const JetVec& tau = lm.tension();
    d[q] = 0.5 * fv * lm.inner_N(tau, tau).value();
  }
  return dom.integrate(d);
}

std::string to_string(Functional k) { return k == Functional::E_2f ? "E_2f" : "E_f2"; }

Functional functional_from_string(const std::string& s) {
  if (s == "E_2f") return Functional::E_2f;
  if (s == "E_f2") return Functional::E_f2;
  throw ScenarioError("unknown functional '" + s + "', expected E_2f or E_f2");
}

NodalField f_bi_tension_field(const GridMap& phi, const ScalarField& f) {
  return candidate_fields(phi, f, Functional::E_2f)[0];
}

NodalField bi_f_tension_field(const GridMap& phi, const ScalarField& f) {
  return candidate_fields(phi, f, Functional::E_f2)[0];
}

double sup_norm(const GridMap& phi, const NodalField& v) {
  double best = 0.0;
  for (std::size_t q = 0; q < phi.domain().size(); ++q) {
    const Eigen::MatrixXd h = phi.codomain().metric(node_value(phi, q));
    Eigen::VectorXd x(v.size());
    for (std::size_t a = 0; a < v.size(); ++a) x[a] = v[a][q];
    best = std::max(best, std::sqrt(x.dot(h * x)));
  }
  return best;
}

FirstVariationReport first_variation_check(const GridMap& phi, const ScalarField& f, const NodalField& v,
                                           Functional functional, double h, double tol) {
  if (!(h > 0.0)) throw ScenarioError("step must be positive");
  auto energy = [&](double t) {
    const EnergyReport r = energies(phi.perturbed(v, t), f);
    return functional == Functional::E_2f ? r.E_2f : r.E_f2;
  };
  FirstVariationReport r;
  r.functional = functional;
  r.h = h;
  r.lhs = (energy(h) - energy(-h)) / (2.0 * h);
  r.lhs_half = (energy(0.5 * h) - energy(-0.5 * h)) / h;
  r.lhs_extrapolated = (4.0 * r.lhs_half - r.lhs) / 3.0;

  const auto fields = candidate_fields(phi, f, functional);
  std::vector<std::string> names = {"derived", "curvature_flipped"};
  if (functional == Functional::E_f2) names.push_back("curvature_inside_trace");
  auto residual = [&](double rhs) { return std::abs(r.lhs - rhs) / (1.0 + std::abs(rhs)); };
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const double rhs = -pair_L2(phi, fields[k], v);
    r.readings.push_back({names[k], rhs, residual(rhs)});
    if (k == 0) r.readings.push_back({"opposite_sign", -rhs, residual(-rhs)});
  }
  r.rhs = r.readings[0].rhs;
  r.residual = r.readings[0].residual;
  double best = r.readings[0].residual;
  r.best_reading = r.readings[0].reading;
  for (const auto& x : r.readings)
    if (x.residual < best) best = x.residual, r.best_reading = x.reading;

  if (std::abs(r.lhs - r.lhs_half) > 10.0 * tol * (1.0 + std::abs(r.rhs)))
    throw StepTooLarge("central differences at h and h/2 differ by " + std::to_string(std::abs(r.lhs - r.lhs_half)));
  return r;
}

FlowResult gradient_flow(const GridMap& phi0, const ScalarField& f, const FlowOptions& opt) {
  if (!(opt.eta0 > 0.0)) throw ScenarioError("initial step must be positive");
  FlowResult out{{}, phi0, false};
  GridMap phi = phi0;
  double E2f = bi_f_energy(phi, f);
  double eta = opt.eta0;
  auto record = [&](int step, double tau_sup, double used) {
    out.trajectory.push_back({step, energies(phi, f).E, E2f, tau_sup, used});
  };
  for (int k = 0;; ++k) {
    const NodalField t = f_bi_tension_field(phi, f);
    const double tau_sup = sup_norm(phi, t);
    if (tau_sup <= opt.tol) {
      record(k, tau_sup, 0.0);
      out.converged = true;
      break;
    }
    if (k == opt.steps) {
      record(k, tau_sup, 0.0);
      break;
    }
    record(k, tau_sup, eta);
    double trial = std::min(2.0 * eta, opt.eta0);
    int halvings = 0;
    for (;;) {
      if (trial < opt.eta_min)
        throw NoDescent("step " + std::to_string(trial) + " fell below the floor at step " + std::to_string(k));
      GridMap next = phi.perturbed(t, trial);
      const double En = bi_f_energy(next, f);
      if (En < E2f) {
        phi = std::move(next);
        E2f = En;
        eta = trial;
        out.trajectory.back().eta = trial;
        break;
      }
      if (++halvings > opt.max_halvings)
        throw NoDescent("E_2f did not decrease after " + std::to_string(halvings) + " trial steps at step " +
                        std::to_string(k));
      trial *= 0.5;
    }
  }
  out.final_map = phi;
  return out;
}

VariationTriple seeded_variation_triple(std::uint64_t seed, int resolution) {
  auto dom = std::make_shared<const GridDomain>(flat_torus(2), resolution);
  const Expr y0 = Expr::var(0), y1 = Expr::var(1);
  const ChartManifold cod = conformal_torus(2, 0.15 * sin(y0) + 0.1 * cos(y1));
  const ExprVec d = random_trig_field(2, 2, seed, 2, 0.3);
  const ExprVec comps{y0 + d[0], y1 + d[1]};
  const ScalarField f = 2.0 + random_trig_field(2, 1, seed ^ 0x9e3779b97f4a7c15ULL, 2, 0.4)[0];
  ExprVec v = random_trig_field(2, 2, seed * 31 + 7, 2, 1.0);
  GridMap phi = GridMap::sample(dom, cod, comps, Eigen::MatrixXd::Identity(2, 2));
  NodalField vn = sample_field(*dom, v);
  return {std::move(phi), f, std::move(v), std::move(vn)};
}

FlowPlan circle_flow_plan(int resolution, int steps, double eta0) {
  auto dom = std::make_shared<const GridDomain>(flat_torus(1), resolution);
  const Expr x = Expr::var(0);
  GridMap phi = GridMap::sample(dom, flat_torus(1), {x + 0.3 * sin(x)}, Eigen::MatrixXd::Identity(1, 1));
  FlowOptions opt;
  opt.steps = steps;
  opt.eta0 = eta0;
  return {std::move(phi), 2.0 + cos(x), opt};
}

}  // namespace fbh
