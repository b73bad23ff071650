#pragma once

#include "fbh/geometry.hpp"

#include <functional>
#include <optional>
#include <string>

namespace fbh {

// Coordinate expression of a map between charts.  Either closed-form
// component expressions, or a callback returning component jets around
// a domain point (used for grid-backed maps).
class SmoothMap {
 public:
  using JetSource = std::function<JetVec(const Point& p, int order)>;

  SmoothMap(ChartManifold domain, ChartManifold codomain, ExprVec components);
  SmoothMap(ChartManifold domain, ChartManifold codomain, JetSource source);
  static SmoothMap identity(const ChartManifold& m);

  const ChartManifold& domain() const { return domain_; }
  const ChartManifold& codomain() const { return codomain_; }
  const std::optional<ExprVec>& components() const { return comps_; }

  JetVec jets(const Point& p, int order) const;
  Point operator()(const Point& p) const;

 private:
  ChartManifold domain_, codomain_;
  std::optional<ExprVec> comps_;
  JetSource source_;
};

// Local engine: jets of the map, its differential, both metrics and the
// codomain connection pulled back along the map, around one domain
// point.  Every section handled here is a vector of codomain-component
// jets in the domain displacement.
class LocalMap {
 public:
  LocalMap(const SmoothMap& phi, const Point& p, int order = 4,
           const std::optional<Eigen::MatrixXd>& frame_rotation = std::nullopt);

  int m() const { return m_; }
  int n() const { return n_; }
  const Point& point() const { return p_; }
  const JetVec& x() const { return x_; }
  const JetVec& phi() const { return phi_; }
  const Jet& dphi(int a, int i) const { return dphi_[a * m_ + i]; }
  const LocalMetric& domain_metric() const { return dm_; }
  // sum_c e_c^i e_c^j over the orthonormal frame in use.
  const Jet& frame_metric(int i, int j) const { return G_(i, j); }
  const JetMat& codomain_metric() const { return h_; }
  const Jet& GammaN(int a, int b, int c) const { return gammaN_[(a * n_ + b) * n_ + c]; }
  bool flat_codomain() const { return flatN_; }

  Jet field(const Expr& f) const;
  JetVec section(const ExprVec& s) const;

  // Domain-side calculus.
  JetVec grad(const Jet& f) const;
  Jet laplacian(const Jet& f) const;
  Jet inner_M(const JetVec& u, const JetVec& v) const;
  // nabla^M_X Y for domain vector fields given as jets.
  JetVec covariant_M(const JetVec& y, const JetVec& x) const;

  // Codomain-side calculus along the map.
  JetVec push(const JetVec& x) const;
  Jet inner_N(const JetVec& s, const JetVec& t) const;
  JetVec covariant(const JetVec& s, int i) const;
  JetVec covariant_along(const JetVec& s, const JetVec& x) const;
  JetVec rough_laplacian(const JetVec& s) const;
  JetVec curvature_trace(const JetVec& s) const;
  // R^N(x, y) z for sections along the map.
  JetVec curvature_apply(const JetVec& x, const JetVec& y, const JetVec& z) const;
  JetVec jacobi(const JetVec& s) const;

  JetVec second_fundamental_form(int i, int j) const;
  Jet energy_density() const;
  const JetVec& tension() const;
  JetVec f_tension(const Jet& f) const;
  JetVec bi_tension() const;
  JetVec bi_f_tension(const Jet& f) const;
  // Variant in which the grad f term sits inside the curvature trace.
  JetVec bi_f_tension_curvature_reading(const Jet& f) const;
  JetVec f_bi_tension_direct(const Jet& f) const;
  JetVec f_bi_tension_via_relation(const Jet& f) const;

 private:
  const JetVec& riemannN() const;
  const JetMat& dphi_frame_square() const;

  int m_ = 0, n_ = 0, order_ = 0;
  Point p_;
  JetVec x_, phi_, dphi_;
  LocalMetric dm_;
  JetMat G_;
  JetMat h_;
  JetVec gammaN_;
  bool flatN_ = true;
  std::optional<LocalMetric> nm_;
  std::optional<Composer> composer_;
  mutable std::optional<JetVec> riemannN_;
  mutable std::optional<JetMat> W_;
  mutable std::optional<JetVec> tau_;
};

// Value-level operations.
std::vector<double> differential(const SmoothMap& phi, const TangentVector& x);
double energy_density(const SmoothMap& phi, const Point& p);
std::vector<double> second_fundamental_form(const SmoothMap& phi, const Point& p, std::span<const double> x,
                                            std::span<const double> y);
std::vector<double> tension(const SmoothMap& phi, const Point& p,
                            const std::optional<Eigen::MatrixXd>& frame_rotation = std::nullopt);
std::vector<double> f_tension(const SmoothMap& phi, const ScalarField& f, const Point& p);
std::vector<double> pullback_connection(const SmoothMap& phi, const ExprVec& s, const TangentVector& x);
std::vector<double> rough_laplacian(const SmoothMap& phi, const ExprVec& s, const Point& p,
                                    const std::optional<Eigen::MatrixXd>& frame_rotation = std::nullopt);
std::vector<double> curvature_trace(const SmoothMap& phi, const ExprVec& s, const Point& p);
std::vector<double> jacobi_operator(const SmoothMap& phi, const ExprVec& s, const Point& p);
std::vector<double> bi_tension(const SmoothMap& phi, const Point& p);
std::vector<double> bi_f_tension(const SmoothMap& phi, const ScalarField& f, const Point& p);
std::vector<double> f_bi_tension_direct(const SmoothMap& phi, const ScalarField& f, const Point& p);
std::vector<double> f_bi_tension_via_relation(const SmoothMap& phi, const ScalarField& f, const Point& p);

struct TensionHierarchy {
  double energy_density = 0.0;
  std::vector<double> tau, tau_f, bi, bi_f, f_bi_direct, f_bi_relation;
};
TensionHierarchy tension_hierarchy(const SmoothMap& phi, const ScalarField& f, const Point& p,
                                   const std::optional<Eigen::MatrixXd>& frame_rotation = std::nullopt);

// Norm of a codomain vector at the image point.
double codomain_norm(const SmoothMap& phi, const Point& p, std::span<const double> v);
double max_abs(std::span<const double> v);
std::vector<double> difference(std::span<const double> a, std::span<const double> b);

}  // namespace fbh
