#pragma once

#include "fbh/map_calculus.hpp"
#include "fbh/warped.hpp"

#include <string>
#include <vector>

namespace fbh {

enum class SpecialKind {
  inclusion_iy0,                 // M -> M x_lambda N, x -> (x, y0)
  inclusion_ix0,                 // N -> M x_lambda N, y -> (x0, y)
  projection_pi1,                // M x_lambda N -> M
  projection_pi2,                // M x_lambda N -> N
  product_id_x_psi,              // M x_lambda N -> (M x N, g + h), (x, psi(y))
  product_phiM_x_phiN,           // M x_lambda N -> (M x N, g + h), (phiM(x), phiN(y))
  product_into_warped_id_x_psi,  // (M x N, g + h) -> M x_lambda N, (x, psi(y))
};

std::string to_string(SpecialKind k);
SpecialKind special_kind_from_string(const std::string& s);

// The weight lives on the domain of the special map: on M for i_y0, on N
// for i_x0 and on the product otherwise.  anchor is y0 for i_y0 and x0
// for i_x0.  psi and phiN are in fiber coordinates, phiM in base ones.
struct SpecialMapScenario {
  std::string name;
  WarpedProduct warped;
  SpecialKind kind;
  ScalarField weight = Expr(1.0);
  Point anchor;
  ExprVec psi, phiM;
};

ChartManifold special_domain(const SpecialMapScenario& s);
ChartManifold special_codomain(const SpecialMapScenario& s);
SmoothMap special_map(const SpecialMapScenario& s);
// Seeded domain samples (fixed for i_x0 / i_y0 families too).
std::vector<Point> special_samples(const SpecialMapScenario& s, int count, std::uint64_t seed);

// Printed closed form of one tension-type field at p, in codomain coordinates.
struct PrintedForm {
  std::string formula;   // descriptive id of the evaluated formula
  std::string quantity;  // tau, tau_f, bi_f, f_bi
  std::vector<double> value;
};
std::vector<PrintedForm> printed_forms(const SpecialMapScenario& s, const Point& p);
std::vector<double> generic_quantity(const TensionHierarchy& h, const std::string& quantity);

// Printed formula vs generic engine over sample points.
struct FormulaCheck {
  std::string formula, quantity;
  double max_delta = 0.0;  // max |printed - generic| / (1 + max |generic|)
  double tolerance = 0.0;
  bool agrees = false;
  Point worst;
  std::vector<double> printed_at_worst, generic_at_worst;
};

struct ConditionReport {
  std::string formula;
  std::vector<double> residual_field;  // per sample point
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool satisfied = false;
};

ConditionReport make_condition(std::string formula, std::vector<double> field, double tol);

std::vector<FormulaCheck> verify_printed_forms(const SpecialMapScenario& s, const std::vector<Point>& samples,
                                               double tol = 1e-8);
// Harmonicity criteria attached to the scenario's map kind, as residual fields.
std::vector<ConditionReport> evaluate_conditions(const SpecialMapScenario& s, const std::vector<Point>& samples,
                                                 double tol = 1e-8);

// Throws NonHarmonicFactor unless every factor map the kind requires to be
// harmonic has |tau| <= tol at the samples.
void require_harmonic_factors(const SpecialMapScenario& s, int count = 8, double tol = 1e-8);

// Per-kind entry points.
std::vector<double> iy0_bi_f_tension(const SpecialMapScenario& s, const Point& p);
ConditionReport iy0_condition(const SpecialMapScenario& s, const std::vector<Point>& samples, double tol = 1e-8);
TensionHierarchy ix0_tension_chain(const SpecialMapScenario& s, const Point& p);
std::vector<ConditionReport> ix0_conditions(const SpecialMapScenario& s, const std::vector<Point>& samples,
                                            double tol = 1e-8);

// Elementary data of the sphere model (0, pi) x_{sin t} S^1 at t0.
struct SwpmCriticality {
  double t0 = 0.0;
  double grad_lambda2 = 0.0;           // d/dt sin^2 t
  double d_grad_lambda2_sq = 0.0;      // d/dt |grad sin^2 t|^2
  bool lambda2_critical = false;
  bool grad_sq_critical = false;
};
SwpmCriticality swpm_criticality(const WarpedProduct& w, double t0, double tol = 1e-9);

WarpedProduct sphere_swpm();
std::vector<SpecialMapScenario> sphere_swpm_catalog();
// All special-map scenarios used by the suites, sphere family included.
std::vector<SpecialMapScenario> special_catalog();

}  // namespace fbh
