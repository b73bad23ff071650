#pragma once

#include "fbh/map_calculus.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace fbh {

// Equi-dimensional map with phi^* h = lambda^2 g, certified on samples.
class ConformalMap {
 public:
  // Throws NotConformal if the dimensions differ or the pullback identity
  // misses by more than tol at one of `samples` seeded points.
  ConformalMap(SmoothMap phi, ScalarField dilation, double tol = 1e-9, int samples = 24, std::uint64_t seed = 17);

  const SmoothMap& map() const { return phi_; }
  const ScalarField& dilation() const { return lambda_; }
  int dim() const { return phi_.domain().dim(); }
  const ChartManifold& domain() const { return phi_.domain(); }

 private:
  SmoothMap phi_;
  ScalarField lambda_;
};

// max |phi^* h - lambda^2 g| over the matrix entries at p.
double pullback_defect(const SmoothMap& phi, const ScalarField& lambda, const Point& p);

// sqrt of the common generalized eigenvalue of (phi^* h, g); throws
// NotConformal when the eigenvalues spread by more than rel_tol.
double extract_dilation(const SmoothMap& phi, const Point& p, double rel_tol = 1e-7);

// (2 - n) dphi(grad log lambda).
std::vector<double> conformal_tension(const ConformalMap& c, const Point& p);

struct NamedTerm {
  std::string name;
  std::vector<double> value;
};

// A printed right-hand side split into its terms, next to the generic value.
struct TermwiseComparison {
  std::string formula;
  std::vector<NamedTerm> terms;
  std::vector<double> total;
  std::vector<double> generic;
  double delta = 0.0;  // max |total - generic| / (1 + max |generic|)
};

struct BiFConformalReport {
  TermwiseComparison literal;      // grad lambda as printed in two terms
  TermwiseComparison log_variant;  // grad log lambda in those two terms
  std::string closer;              // "literal", "log_variant" or "tie"
};
BiFConformalReport bi_f_conformal_residual(const ConformalMap& c, const ScalarField& f, const Point& p);

struct FBiConformalReport {
  // Criterion as printed, scaled by (n - 2), against generic tau_{2,f}.
  TermwiseComparison printed;
  // Same criterion with f restored on the curvature and Hessian-pairing terms.
  TermwiseComparison f_restored;
  // lambda = f only: both printed forms pulled back to the domain, their
  // difference, and dphi^{-1} tau_{2,f} / (n - 2) from the generic engine.
  struct LambdaEqualsF {
    std::vector<double> first_form, gradient_form, rederived, generic_pullback;
    double forms_difference = 0.0;
    double printed_delta = 0.0, rederived_delta = 0.0;
  };
  std::optional<LambdaEqualsF> lambda_equals_f;
};
// lambda_is_f: treat f as the dilation and evaluate the lambda = f forms.
FBiConformalReport f_bi_conformal_residual(const ConformalMap& c, const ScalarField& f, const Point& p,
                                           bool lambda_is_f = false);

// |nabla dphi(X, Y) - X(log l) dphi(Y) - Y(log l) dphi(X) + g(X, Y) dphi(grad log l)|.
double conformal_second_fundamental_form_residual(const ConformalMap& c, const Point& p, std::span<const double> x,
                                                  std::span<const double> y);

// Left sides of the two-equation system for gamma on flat R^2.
std::array<double, 2> gamma_system_residual(const ScalarField& gamma, const Point& p);
// grad |grad u|^2 on the chart.
std::vector<double> gradient_norm_gradient(const ChartManifold& m, const ScalarField& u, const Point& p);

// Catalog of admitted conformal maps used by tests and the CLI.
struct ConformalCase {
  std::string name;
  SmoothMap phi;
  ScalarField dilation;
};
std::vector<ConformalCase> conformal_catalog();

}  // namespace fbh
