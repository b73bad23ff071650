#pragma once

#include "fbh/checks.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fbh {

// One named manifold of a scenario; warped entries also keep the product.
struct ManifoldEntry {
  ChartManifold chart;
  std::optional<WarpedProduct> warped;
};

struct FlowSettings {
  int steps = 1000;
  double eta0 = 1e-2;
  double eta_min = 0.0;
  int max_halvings = 30;
};

// Parsed scenario document.  Every object is checked against its key
// list and unknown keys raise ScenarioError.
struct Scenario {
  std::string name;
  std::map<std::string, ManifoldEntry> manifolds;
  std::vector<std::string> manifold_order;

  std::optional<SmoothMap> map;
  std::optional<SpecialMapScenario> special;
  std::optional<ConformalCase> conformal;
  Eigen::MatrixXd winding;  // for grid maps, defaults to identity
  std::optional<ScalarField> weight;

  // Unset values take per-command defaults.
  std::optional<int> resolution;
  std::uint64_t seed = 42;
  std::optional<int> samples;
  std::vector<std::string> checks;
  Tolerances tol;
  double lambda_exponent = 1.0;
  FlowSettings flow;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);
// A scenario built from a catalog entry name; throws ScenarioError if unknown.
Scenario catalog_scenario(const std::string& name);

struct CatalogEntry {
  std::string name;
  std::string family;
  std::string command;  // CLI command the entry is meant for
};
std::vector<CatalogEntry> scenario_catalog();

// Command runners.  Each returns the checks it executed; extra JSON
// (samples, trajectory) goes into `extra`.
std::vector<CheckResult> run_curvature_check(const Scenario& s, nlohmann::ordered_json& extra);
std::vector<CheckResult> run_tension(const Scenario& s, nlohmann::ordered_json& extra);
std::vector<CheckResult> run_variation_check(const Scenario& s, nlohmann::ordered_json& extra);
// trajectory receives one row per recorded step.
std::vector<CheckResult> run_flow(const Scenario& s, nlohmann::ordered_json& extra, std::vector<FlowStep>& trajectory);

// Environment stamp placed in every report.
nlohmann::ordered_json environment_stamp(const std::string& command, const Scenario& s);

}  // namespace fbh
