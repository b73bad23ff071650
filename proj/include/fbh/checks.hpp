#pragma once

#include "fbh/conformal.hpp"
#include "fbh/special_maps.hpp"
#include "fbh/variational.hpp"
#include "fbh/warped.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fbh {

enum class Status { pass, fail, finding };
std::string to_string(Status s);

struct CheckResult {
  std::string name;
  std::string formula;
  double max_residual = 0.0;
  double tolerance = 0.0;
  Status status = Status::pass;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

// pass when residual <= tol, fail otherwise (NaN fails).
CheckResult threshold_check(std::string name, std::string formula, double residual, double tol);
nlohmann::ordered_json to_json(const CheckResult& c);
// 0 when every check passes, 1 if any fails, 2 if only findings remain.
int exit_code(const std::vector<CheckResult>& checks);

struct Tolerances {
  double derivative = 1e-8;
  double quadrature = 1e-10;
  double variation = 1e-4;
  double closed_form = 1e-9;
  double forms = 1e-10;

  // Overrides by key; throws ScenarioError on an unknown key.
  void set(const std::string& key, double value);
  nlohmann::ordered_json to_json() const;
};

struct NamedWarped {
  std::string name;
  WarpedProduct w;
};
// Curved base with an S^2 fiber, the pole-free round sphere, and the
// hyperbolic plane as R x_{e^t} R.
std::vector<NamedWarped> warped_catalog();

// Closed-form connection and curvature against the coordinate oracle at
// seeded samples.  closed_form_exponent != 1 evaluates the closed forms
// with lambda^exponent while the oracle keeps lambda.
CheckResult warped_connection_check(const NamedWarped& w, int samples, std::uint64_t seed, double tol,
                                    double closed_form_exponent = 1.0);
std::vector<CheckResult> warped_curvature_checks(const NamedWarped& w, int samples, std::uint64_t seed, double tol,
                                                 double forms_tol, double closed_form_exponent = 1.0);

// Seeded map between catalog charts with bounded trigonometric components,
// a positive weight and a sample point.
struct MapScenario {
  std::string name;
  SmoothMap phi;
  ScalarField f;
  Point p;
};
MapScenario random_map_scenario(std::uint64_t seed);

CheckResult f_bi_relation_check(int count, std::uint64_t seed, double tol);
std::vector<CheckResult> constant_weight_checks(int count, std::uint64_t seed, double tol);

std::vector<CheckResult> variation_checks(int count, int resolution, double h, double tol);
// Monotonicity and residual reduction of a finished flow.
std::vector<CheckResult> flow_checks(const FlowResult& r);

CheckResult special_tension_check(double tol);
std::vector<CheckResult> swpm_checks(double tol);
CheckResult block_structure_check(double tol);
std::vector<CheckResult> conformal_checks(double tol);

// Each control runs a criterion with lambda and with lambda^1.01;
// passes when every clean run passes and every corrupted run fails.
CheckResult negative_controls(double exponent = 1.01);

}  // namespace fbh
