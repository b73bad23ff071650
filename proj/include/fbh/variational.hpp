#pragma once

#include "fbh/map_calculus.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fbh {

// Uniform tensor grid on a chart whose axes are all periodic.
class GridDomain {
 public:
  GridDomain(ChartManifold m, int resolution);

  const ChartManifold& manifold() const { return m_; }
  int resolution() const { return n_; }
  int dim() const { return m_.dim(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  // Cell volume times sqrt det g at each node.
  const std::vector<double>& weights() const { return w_; }
  double total_weight() const;

  double integrate(std::span<const double> values) const;
  double integrate(const std::function<double(const Point&)>& density) const;

  // Spectral partial derivative d^alpha of periodic nodal data.
  std::vector<double> derivative(std::span<const double> values, std::span<const int> alpha) const;
  // Node whose coordinates equal p (after wrapping); throws OutOfDomain otherwise.
  std::size_t index_of(const Point& p) const;

 private:
  ChartManifold m_;
  int n_;
  std::vector<double> len_;
  std::vector<Point> nodes_;
  std::vector<double> w_;
};

// Nodal values of one vector-valued periodic field, component-major.
using NodalField = std::vector<std::vector<double>>;

// Map T^m -> chart written as winding * x + u(x) with u periodic and
// sampled on the grid.  Derivatives up to order 4 come from FFTs.
class GridMap {
 public:
  GridMap(std::shared_ptr<const GridDomain> domain, ChartManifold codomain, Eigen::MatrixXd winding, NodalField periodic);
  static GridMap sample(std::shared_ptr<const GridDomain> domain, ChartManifold codomain, const ExprVec& components,
                        Eigen::MatrixXd winding);

  const GridDomain& domain() const { return *dom_; }
  std::shared_ptr<const GridDomain> domain_ptr() const { return dom_; }
  const ChartManifold& codomain() const { return cod_; }
  const Eigen::MatrixXd& winding() const { return K_; }
  const NodalField& periodic() const { return u_; }

  // phi + t v with v given in codomain coordinates at every node.
  GridMap perturbed(const NodalField& v, double t) const;
  SmoothMap as_smooth_map() const;

 private:
  struct Cache;
  std::shared_ptr<const GridDomain> dom_;
  ChartManifold cod_;
  Eigen::MatrixXd K_;
  NodalField u_;
  std::shared_ptr<const Cache> cache_;
};

// Samples each expression at the grid nodes.
NodalField sample_field(const GridDomain& d, const ExprVec& v);
// Low-mode trigonometric field with seeded coefficients.
ExprVec random_trig_field(int dim, int components, std::uint64_t seed, int modes = 2, double amplitude = 0.2);

struct EnergyReport {
  double E = 0.0, E_f = 0.0, E_2 = 0.0, E_f2 = 0.0, E_2f = 0.0;
  std::vector<double> e, e_f, e_2, e_f2, e_2f;  // per-node densities
};
EnergyReport energies(const GridMap& phi, const ScalarField& f);
double bi_f_energy(const GridMap& phi, const ScalarField& f);  // E_{2,f} only

enum class Functional { E_2f, E_f2 };
std::string to_string(Functional k);
Functional functional_from_string(const std::string& s);

struct VariationReading {
  std::string reading;
  double rhs = 0.0, residual = 0.0;
};

struct FirstVariationReport {
  Functional functional = Functional::E_2f;
  double h = 0.0;
  double lhs = 0.0;       // central difference at h
  double lhs_half = 0.0;  // central difference at h / 2
  double lhs_extrapolated = 0.0;
  double rhs = 0.0;       // -int <tension, V> with the engine's tension field
  double residual = 0.0;  // |lhs - rhs| / (1 + |rhs|)
  std::vector<VariationReading> readings;
  std::string best_reading;
};

// Throws StepTooLarge when the h and h/2 differences disagree by more than
// 10 * tol * (1 + |rhs|).
FirstVariationReport first_variation_check(const GridMap& phi, const ScalarField& f, const NodalField& v,
                                           Functional functional, double h = 1e-3, double tol = 1e-4);

// The section whose negative L2 pairing is the first variation.
NodalField f_bi_tension_field(const GridMap& phi, const ScalarField& f);
NodalField bi_f_tension_field(const GridMap& phi, const ScalarField& f);
double sup_norm(const GridMap& phi, const NodalField& v);

struct FlowOptions {
  int steps = 100;
  double eta0 = 1e-2;
  double tol = 1e-9;
  int max_halvings = 30;
  double eta_min = 0.0;  // a trial step below this counts as failure
};

struct FlowStep {
  int step = 0;
  double E = 0.0, E_2f = 0.0, tau_sup = 0.0, eta = 0.0;
};

struct FlowResult {
  std::vector<FlowStep> trajectory;
  GridMap final_map;
  bool converged = false;
};

// phi_{k+1} = phi_k + eta tau_{2,f}(phi_k), eta halved until E_{2,f}
// decreases; throws NoDescent after max_halvings failures or when the
// step would drop below eta_min.
FlowResult gradient_flow(const GridMap& phi0, const ScalarField& f, const FlowOptions& opt = {});

// Seeded (phi, f, V) on the flat 2-torus mapping into a curved conformal
// torus: phi = id + small trigonometric displacement, f = 2 + bounded trig
// term, V a low-mode trigonometric field.
struct VariationTriple {
  GridMap phi;
  ScalarField f;
  ExprVec v_expr;
  NodalField v;
};
VariationTriple seeded_variation_triple(std::uint64_t seed, int resolution = 64);

// T^1 -> T^1, phi0 = x + 0.3 sin x, f = 2 + cos x.
struct FlowPlan {
  GridMap phi0;
  ScalarField f;
  FlowOptions options;
};
FlowPlan circle_flow_plan(int resolution = 12, int steps = 1000, double eta0 = 1e-2);

}  // namespace fbh
