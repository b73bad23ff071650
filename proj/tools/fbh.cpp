// Command-line front end: fbh <command> [--scenario file | --catalog name] ...
#include "fbh/errors.hpp"
#include "fbh/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace fbh;
using nlohmann::ordered_json;

namespace {

constexpr int kUsageError = 64;

struct Options {
  std::string scenario_file;
  std::string catalog_name;
  std::vector<std::string> checks;
  std::vector<std::string> tols;
  std::optional<int> grid;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::string out_dir;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Options& o, bool with_grid) {
  cmd->add_option("--scenario", o.scenario_file, "scenario JSON file");
  cmd->add_option("--catalog", o.catalog_name, "catalog scenario name");
  cmd->add_option("--check", o.checks, "check groups to run")->delimiter(',');
  cmd->add_option("--tol", o.tols, "tolerance overrides key=value")->delimiter(',');
  if (with_grid) cmd->add_option("--grid", o.grid, "grid resolution per axis")->check(CLI::Range(4, 4096));
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--samples", o.samples, "sample point count")->check(CLI::Range(1, 100000));
  cmd->add_option("--out", o.out_dir, "directory for report.json, residuals.csv, flow.csv");
  cmd->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
}

Scenario build_scenario(const Options& o) {
  if (!o.scenario_file.empty() && !o.catalog_name.empty())
    throw ScenarioError("--scenario and --catalog are mutually exclusive");
  Scenario s;
  if (!o.scenario_file.empty()) s = load_scenario(o.scenario_file);
  else if (!o.catalog_name.empty()) s = catalog_scenario(o.catalog_name);
  if (!o.checks.empty()) s.checks = o.checks;
  for (const auto& kv : o.tols) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ScenarioError("--tol expects key=value, got '" + kv + "'");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
    } catch (const std::exception&) {
      throw ScenarioError("--tol value is not a number in '" + kv + "'");
    }
    s.tol.set(kv.substr(0, eq), v);
  }
  if (o.grid) s.resolution = *o.grid;
  if (o.seed) s.seed = *o.seed;
  if (o.samples) s.samples = *o.samples;
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string number(double v) {
  return ordered_json(v).dump();  // shortest round-trip form, null for non-finite
}

std::string residuals_csv(const std::vector<CheckResult>& cs) {
  std::ostringstream os;
  os << "name,formula,max_residual,tolerance,status\n";
  for (const auto& c : cs)
    os << csv_field(c.name) << ',' << csv_field(c.formula) << ',' << number(c.max_residual) << ','
       << number(c.tolerance) << ',' << to_string(c.status) << '\n';
  return os.str();
}

std::string flow_csv(const std::vector<FlowStep>& t) {
  std::ostringstream os;
  os << "step,E,E_2f,sup_residual,eta\n";
  for (const auto& r : t)
    os << r.step << ',' << number(r.E) << ',' << number(r.E_2f) << ',' << number(r.tau_sup) << ',' << number(r.eta)
       << '\n';
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + p.string());
  out << text;
}

ordered_json report_json(const std::string& command, const Scenario& s, const std::vector<CheckResult>& cs,
                         ordered_json extra) {
  ordered_json r;
  r["environment"] = environment_stamp(command, s);
  ordered_json checks = ordered_json::array();
  int counts[3] = {0, 0, 0};
  for (const auto& c : cs) {
    checks.push_back(to_json(c));
    ++counts[static_cast<int>(c.status)];
  }
  r["checks"] = checks;
  r["summary"] = {{"pass", counts[0]}, {"fail", counts[1]}, {"finding", counts[2]}, {"exit_code", exit_code(cs)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) r[it.key()] = it.value();
  return r;
}

int run_command(const std::string& command, const Options& o) {
  const Scenario s = build_scenario(o);
  ordered_json extra = ordered_json::object();
  std::vector<CheckResult> cs;
  std::vector<FlowStep> trajectory;
  if (command == "curvature-check") cs = run_curvature_check(s, extra);
  else if (command == "tension") cs = run_tension(s, extra);
  else if (command == "variation-check") cs = run_variation_check(s, extra);
  else cs = run_flow(s, extra, trajectory);

  const std::string report = report_json(command, s, cs, extra).dump(2) + "\n";
  const std::string residuals = residuals_csv(cs);
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    const std::filesystem::path dir(o.out_dir);
    write_file(dir / "report.json", report);
    write_file(dir / "residuals.csv", residuals);
    if (command == "flow") write_file(dir / "flow.csv", flow_csv(trajectory));
  }
  if (o.format == "csv") std::cout << (command == "flow" ? flow_csv(trajectory) : residuals);
  else std::cout << report;
  return exit_code(cs);
}

int run_catalog(const std::string& format) {
  const auto entries = scenario_catalog();
  if (format == "csv") {
    std::cout << "name,family,command\n";
    for (const auto& e : entries) std::cout << e.name << ',' << e.family << ',' << e.command << '\n';
  } else {
    ordered_json a = ordered_json::array();
    for (const auto& e : entries) a.push_back({{"name", e.name}, {"family", e.family}, {"command", e.command}});
    std::cout << ordered_json{{"count", entries.size()}, {"scenarios", a}}.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted bi-harmonic map verification"};
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<std::string, CLI::App*>> cmds;
  for (const char* name : {"curvature-check", "tension", "variation-check", "flow"}) {
    auto* c = app.add_subcommand(name);
    const std::string n = name;
    add_common(c, o, n == "variation-check" || n == "flow");
    cmds.emplace_back(n, c);
  }
  cmds[0].second->description("warped connection and curvature closed forms against the coordinate oracle");
  cmds[1].second->description("tension hierarchy at sample points, closed forms where cataloged");
  cmds[2].second->description("first variation of E_2f and E_f2 by finite differences");
  cmds[3].second->description("backtracking gradient descent of E_2f on a periodic grid");
  std::string catalog_format = "json";
  auto* cat = app.add_subcommand("catalog", "list named scenarios");
  cat->add_option("--format", catalog_format)->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (cat->parsed()) return run_catalog(catalog_format);
    for (const auto& [name, c] : cmds)
      if (c->parsed()) return run_command(name, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
