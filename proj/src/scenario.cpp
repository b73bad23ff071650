#include "fbh/scenario.hpp"

#include "fbh/errors.hpp"
#include "fbh/standard_manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

namespace fbh {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void require_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ScenarioError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ScenarioError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ScenarioError(std::string("bad value for '") + key + "' in " + where);
  }
}

Expr parse_expr(const json& j, std::span<const std::string> names, const std::string& where) {
  try {
    return Expr::from_json(j, names);
  } catch (const std::exception& e) {
    throw ScenarioError(where + ": " + e.what());
  }
}

ExprVec parse_exprs(const json& j, std::span<const std::string> names, const std::string& where) {
  if (!j.is_array()) throw ScenarioError(where + " must be an array of expressions");
  ExprVec out;
  for (const auto& e : j) out.push_back(parse_expr(e, names, where));
  return out;
}

Point parse_point(const json& j, const std::string& where) {
  if (!j.is_array()) throw ScenarioError(where + " must be an array of numbers");
  Point p;
  for (const auto& v : j) {
    if (!v.is_number()) throw ScenarioError(where + " must be an array of numbers");
    p.coords.push_back(v.get<double>());
  }
  return p;
}

const ManifoldEntry& resolve_manifold(const json& all, const std::string& name, std::map<std::string, ManifoldEntry>& done,
                                      std::set<std::string>& visiting, std::vector<std::string>& order) {
  if (auto it = done.find(name); it != done.end()) return it->second;
  if (!all.contains(name)) throw ScenarioError("manifold '" + name + "' is not defined");
  if (visiting.count(name)) throw ScenarioError("manifold '" + name + "' refers to itself");
  visiting.insert(name);
  const json& j = all.at(name);
  const std::string where = "manifold '" + name + "'";
  if (!j.is_object() || !j.contains("type")) throw ScenarioError(where + " needs a type");
  const auto type = j.at("type").get<std::string>();
  std::optional<ManifoldEntry> e;
  if (type == "flat_torus") {
    require_keys(j, where, {"type", "dim", "period"});
    e = ManifoldEntry{flat_torus(get_or(j, "dim", 1, where), get_or(j, "period", 2 * std::numbers::pi, where)), {}};
  } else if (type == "flat_box") {
    require_keys(j, where, {"type", "dim", "lo", "hi"});
    e = ManifoldEntry{flat_box(get_or(j, "dim", 1, where), get_or(j, "lo", -1.0, where), get_or(j, "hi", 1.0, where)),
                      {}};
  } else if (type == "sphere_chart") {
    require_keys(j, where, {"type", "delta"});
    e = ManifoldEntry{sphere_chart(get_or(j, "delta", 0.1, where)), {}};
  } else if (type == "hyperbolic_chart") {
    require_keys(j, where, {"type", "half_width"});
    e = ManifoldEntry{hyperbolic_chart(get_or(j, "half_width", 2.0, where)), {}};
  } else if (type == "interval") {
    require_keys(j, where, {"type", "coord", "lo", "hi", "periodic"});
    e = ManifoldEntry{interval(get_or<std::string>(j, "coord", name, where), get_or(j, "lo", 0.0, where),
                               get_or(j, "hi", 1.0, where), get_or(j, "periodic", false, where)),
                      {}};
  } else if (type == "conformal_torus") {
    require_keys(j, where, {"type", "dim", "u", "period"});
    const int d = get_or(j, "dim", 2, where);
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
    const Expr u = j.contains("u") ? parse_expr(j.at("u"), names, where) : Expr(0.0);
    e = ManifoldEntry{conformal_torus(d, u, get_or(j, "period", 2 * std::numbers::pi, where)), {}};
  } else if (type == "warped") {
    require_keys(j, where, {"type", "base", "fiber", "lambda_expr"});
    if (!j.contains("base") || !j.contains("fiber") || !j.contains("lambda_expr"))
      throw ScenarioError(where + " needs base, fiber and lambda_expr");
    const auto base = resolve_manifold(all, j.at("base").get<std::string>(), done, visiting, order).chart;
    const auto fiber = resolve_manifold(all, j.at("fiber").get<std::string>(), done, visiting, order).chart;
    const Expr lam = parse_expr(j.at("lambda_expr"), base.coord_names(), where);
    auto w = WarpedProduct::singly(base, fiber, lam);
    e = ManifoldEntry{w.chart(), w};
  } else {
    throw ScenarioError(where + " has unknown type '" + type + "'");
  }
  visiting.erase(name);
  order.push_back(name);
  return done.emplace(name, std::move(*e)).first->second;
}

const ManifoldEntry& manifold_named(const Scenario& s, const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ScenarioError(where + " needs '" + key + "'");
  const auto name = j.at(key).get<std::string>();
  auto it = s.manifolds.find(name);
  if (it == s.manifolds.end()) throw ScenarioError(where + ": manifold '" + name + "' is not defined");
  return it->second;
}

void parse_map(Scenario& s, const json& j) {
  const std::string where = "map";
  if (j.contains("special")) {
    require_keys(j, where, {"special", "warped", "anchor", "psi", "phiM"});
    const auto& m = manifold_named(s, j, "warped", where);
    if (!m.warped) throw ScenarioError("map.warped must name a warped manifold");
    SpecialMapScenario sp{s.name, *m.warped, special_kind_from_string(j.at("special").get<std::string>()),
                          Expr(1.0), {}, {}, {}};
    if (j.contains("anchor")) sp.anchor = parse_point(j.at("anchor"), "map.anchor");
    const auto& fib = sp.warped.fiber().coord_names();
    const auto& bas = sp.warped.base().coord_names();
    if (j.contains("psi")) sp.psi = parse_exprs(j.at("psi"), fib, "map.psi");
    if (j.contains("phiM")) sp.phiM = parse_exprs(j.at("phiM"), bas, "map.phiM");
    s.special = sp;
    s.map = special_map(sp);
    return;
  }
  require_keys(j, where, {"domain", "codomain", "expr", "winding"});
  const auto& dom = manifold_named(s, j, "domain", where).chart;
  const auto& cod = manifold_named(s, j, "codomain", where).chart;
  if (!j.contains("expr")) throw ScenarioError("map needs 'expr'");
  const ExprVec comps = parse_exprs(j.at("expr"), dom.coord_names(), "map.expr");
  if (static_cast<int>(comps.size()) != cod.dim()) throw ScenarioError("map.expr needs one expression per codomain coordinate");
  s.map = SmoothMap(dom, cod, comps);
  s.winding = Eigen::MatrixXd::Zero(cod.dim(), dom.dim());
  if (j.contains("winding")) {
    const auto& w = j.at("winding");
    if (!w.is_array() || static_cast<int>(w.size()) != cod.dim()) throw ScenarioError("map.winding has the wrong shape");
    for (int a = 0; a < cod.dim(); ++a) {
      if (!w[a].is_array() || static_cast<int>(w[a].size()) != dom.dim())
        throw ScenarioError("map.winding has the wrong shape");
      for (int i = 0; i < dom.dim(); ++i) s.winding(a, i) = w[a][i].get<double>();
    }
  } else if (cod.dim() == dom.dim()) {
    s.winding = Eigen::MatrixXd::Identity(cod.dim(), dom.dim());
  }
}

void apply_common(Scenario& s, const json& doc) {
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    require_keys(g, "grid", {"resolution", "seed", "samples"});
    if (g.contains("resolution")) s.resolution = get_or(g, "resolution", 0, "grid");
    if (g.contains("seed")) s.seed = get_or<std::uint64_t>(g, "seed", 42, "grid");
    if (g.contains("samples")) s.samples = get_or(g, "samples", 0, "grid");
  }
  if (doc.contains("checks")) {
    if (!doc.at("checks").is_array()) throw ScenarioError("checks must be an array of names");
    s.checks.clear();
    for (const auto& c : doc.at("checks")) s.checks.push_back(c.get<std::string>());
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    if (!t.is_object()) throw ScenarioError("tolerances must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!it.value().is_number()) throw ScenarioError("tolerance " + it.key() + " must be a number");
      s.tol.set(it.key(), it.value().get<double>());
    }
  }
  if (doc.contains("negative_control")) {
    const auto& n = doc.at("negative_control");
    require_keys(n, "negative_control", {"lambda_exponent"});
    s.lambda_exponent = get_or(n, "lambda_exponent", 1.0, "negative_control");
  }
  if (doc.contains("flow")) {
    const auto& f = doc.at("flow");
    require_keys(f, "flow", {"steps", "eta0", "eta_min", "max_halvings"});
    s.flow.steps = get_or(f, "steps", s.flow.steps, "flow");
    s.flow.eta0 = get_or(f, "eta0", s.flow.eta0, "flow");
    s.flow.eta_min = get_or(f, "eta_min", s.flow.eta_min, "flow");
    s.flow.max_halvings = get_or(f, "max_halvings", s.flow.max_halvings, "flow");
  }
}

bool selected(const Scenario& s, const std::string& group) {
  return s.checks.empty() || std::find(s.checks.begin(), s.checks.end(), group) != s.checks.end();
}

void reject_unknown_checks(const Scenario& s, std::initializer_list<const char*> groups, const std::string& command) {
  for (const auto& c : s.checks) {
    bool ok = false;
    for (const char* g : groups) ok = ok || c == g;
    if (!ok) throw ScenarioError("check '" + c + "' is not available for " + command);
  }
}

ScalarField weight_of(const Scenario& s) {
  if (s.weight) return *s.weight;
  if (s.special) return s.special->weight;
  return Expr(1.0);
}

ordered_json vec_json(const std::vector<double>& v) { return ordered_json(v); }

std::vector<Point> plain_samples(const ChartManifold& m, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  for (int i = 0; i < count; ++i) out.push_back(m.sample(rng, 0.1));
  return out;
}

CheckResult relation_check(const std::vector<TensionHierarchy>& hs, double tol) {
  double worst = 0.0;
  for (const auto& h : hs) worst = std::max(worst, max_abs(difference(h.f_bi_direct, h.f_bi_relation)));
  return threshold_check("f_bi_relation", "f_bi_tension_direct_vs_relation", worst, tol);
}

GridMap grid_map_of(const Scenario& s, int resolution) {
  const auto comps = s.map->components();
  if (!comps) throw ScenarioError("grid maps need closed-form components");
  auto dom = std::make_shared<const GridDomain>(s.map->domain(), resolution);
  return GridMap::sample(dom, s.map->codomain(), *comps, s.winding);
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  require_keys(doc, "scenario", {"name", "catalog", "manifolds", "map", "weight", "grid", "checks", "tolerances",
                                 "negative_control", "flow"});
  Scenario s;
  if (doc.contains("catalog")) {
    if (doc.contains("manifolds") || doc.contains("map"))
      throw ScenarioError("a catalog scenario cannot also define manifolds or map");
    s = catalog_scenario(doc.at("catalog").get<std::string>());
  } else {
    s.name = get_or<std::string>(doc, "name", "scenario", "scenario");
    if (doc.contains("manifolds")) {
      const auto& all = doc.at("manifolds");
      if (!all.is_object()) throw ScenarioError("manifolds must be an object");
      std::set<std::string> visiting;
      for (auto it = all.begin(); it != all.end(); ++it)
        resolve_manifold(all, it.key(), s.manifolds, visiting, s.manifold_order);
    }
    if (doc.contains("map")) parse_map(s, doc.at("map"));
  }
  if (doc.contains("name")) s.name = doc.at("name").get<std::string>();
  if (doc.contains("weight")) {
    const auto& w = doc.at("weight");
    require_keys(w, "weight", {"expr"});
    if (!s.map) throw ScenarioError("weight needs a map to live on");
    s.weight = parse_expr(w.at("expr"), s.map->domain().coord_names(), "weight.expr");
    if (s.special) s.special->weight = *s.weight;
  }
  apply_common(s, doc);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

std::vector<CatalogEntry> scenario_catalog() {
  std::vector<CatalogEntry> out;
  for (const auto& w : warped_catalog()) out.push_back({"warped_" + w.name, "warped_product", "curvature-check"});
  for (const auto& s : special_catalog()) {
    const bool swpm = s.name.rfind("sphere_swpm", 0) == 0;
    out.push_back({s.name, swpm ? "sphere_swpm" : to_string(s.kind), "tension"});
  }
  for (const auto& c : conformal_catalog()) out.push_back({c.name, "conformal", "tension"});
  out.push_back({"seeded_variation_triple", "variational", "variation-check"});
  out.push_back({"harmonic_torus", "variational", "variation-check"});
  out.push_back({"circle_flow", "variational", "flow"});
  out.push_back({"harmonic_circle_flow", "variational", "flow"});
  return out;
}

Scenario catalog_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  for (const auto& w : warped_catalog())
    if (name == "warped_" + w.name) {
      s.manifolds.emplace(w.name, ManifoldEntry{w.w.chart(), w.w});
      s.manifold_order.push_back(w.name);
      return s;
    }
  for (const auto& sp : special_catalog())
    if (sp.name == name) {
      s.special = sp;
      s.map = special_map(sp);
      s.manifolds.emplace("warped", ManifoldEntry{sp.warped.chart(), sp.warped});
      s.manifold_order.push_back("warped");
      return s;
    }
  for (const auto& c : conformal_catalog())
    if (c.name == name) {
      s.conformal = c;
      s.map = c.phi;
      s.weight = 2.0 + 0.5 * sin(Expr::var(0)) * cos(Expr::var(1));
      return s;
    }
  const Expr x = Expr::var(0), y = Expr::var(1);
  if (name == "seeded_variation_triple") return s;
  if (name == "harmonic_torus") {
    s.map = SmoothMap(flat_torus(2), flat_torus(2), ExprVec{x + 0.4, y - 1.0});
    s.winding = Eigen::MatrixXd::Identity(2, 2);
    s.weight = 2.0 + cos(x) * sin(y);
    return s;
  }
  if (name == "circle_flow" || name == "harmonic_circle_flow") {
    const Expr phi = name == "circle_flow" ? x + 0.3 * sin(x) : x;
    s.map = SmoothMap(flat_torus(1), flat_torus(1), ExprVec{phi});
    s.winding = Eigen::MatrixXd::Identity(1, 1);
    s.weight = 2.0 + cos(x);
    s.resolution = 12;
    return s;
  }
  throw ScenarioError("no catalog scenario named '" + name + "'");
}

ordered_json environment_stamp(const std::string& command, const Scenario& s) {
  ordered_json e;
  e["command"] = command;
  e["scenario"] = s.name;
  e["resolution"] = s.resolution ? ordered_json(*s.resolution) : ordered_json(nullptr);
  e["seed"] = s.seed;
  e["samples"] = s.samples ? ordered_json(*s.samples) : ordered_json(nullptr);
  e["tolerances"] = s.tol.to_json();
  if (s.lambda_exponent != 1.0) e["negative_control_lambda_exponent"] = s.lambda_exponent;
  return e;
}

std::vector<CheckResult> run_curvature_check(const Scenario& s, ordered_json& extra) {
  reject_unknown_checks(s, {"connection", "curvature", "curvature_forms"}, "curvature-check");
  std::vector<NamedWarped> ws;
  for (const auto& name : s.manifold_order) {
    const auto& e = s.manifolds.at(name);
    if (e.warped) ws.push_back({name, *e.warped});
  }
  if (ws.empty() && !s.map) ws = warped_catalog();
  if (ws.empty()) throw ScenarioError("curvature-check needs a warped manifold");
  const int samples = s.samples.value_or(100);
  std::vector<CheckResult> out;
  ordered_json names = ordered_json::array();
  for (const auto& w : ws) {
    names.push_back(w.name);
    if (selected(s, "connection"))
      out.push_back(warped_connection_check(w, samples, s.seed, s.tol.derivative, s.lambda_exponent));
    if (selected(s, "curvature") || selected(s, "curvature_forms")) {
      auto cs = warped_curvature_checks(w, samples, s.seed + 1, s.tol.derivative, s.tol.forms, s.lambda_exponent);
      if (selected(s, "curvature")) out.push_back(cs[0]);
      if (selected(s, "curvature_forms")) out.push_back(cs[1]);
    }
  }
  extra["warped_products"] = names;
  return out;
}

std::vector<CheckResult> run_tension(const Scenario& s, ordered_json& extra) {
  reject_unknown_checks(s, {"closed_forms", "f_bi_relation", "conformal"}, "tension");
  if (!s.map) throw ScenarioError("tension needs a map");
  const SmoothMap& phi = *s.map;
  const ScalarField f = weight_of(s);
  const int count = s.samples.value_or(4);
  const auto pts = s.special ? special_samples(*s.special, count, s.seed) : plain_samples(phi.domain(), count, s.seed);

  std::vector<TensionHierarchy> hs;
  ordered_json rows = ordered_json::array();
  for (const auto& p : pts) {
    hs.push_back(tension_hierarchy(phi, f, p));
    const auto& h = hs.back();
    ordered_json r;
    r["point"] = vec_json(p.coords);
    r["tau"] = vec_json(h.tau);
    r["tau_f"] = vec_json(h.tau_f);
    r["tau_2"] = vec_json(h.bi);
    r["tau_f2"] = vec_json(h.bi_f);
    r["tau_2f"] = vec_json(h.f_bi_direct);
    if (s.special) {
      ordered_json forms = ordered_json::object();
      for (const auto& pf : printed_forms(*s.special, p)) forms[pf.formula] = vec_json(pf.value);
      r["closed_forms"] = forms;
    }
    rows.push_back(r);
  }
  extra["samples"] = rows;

  std::vector<CheckResult> out;
  if (selected(s, "f_bi_relation")) out.push_back(relation_check(hs, s.tol.derivative));

  if (s.special && selected(s, "closed_forms")) {
    // Closed forms from the (possibly corrupted) warping against the true map.
    SpecialMapScenario printed = *s.special;
    if (s.lambda_exponent != 1.0)
      printed.warped = WarpedProduct::singly(printed.warped.base(), printed.warped.fiber(),
                                             pow(printed.warped.lambda(), s.lambda_exponent));
    std::map<std::string, std::pair<double, double>> delta;  // formula -> (clean, printed)
    std::map<std::string, std::string> quantity;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto clean = printed_forms(*s.special, pts[k]);
      const auto used = printed_forms(printed, pts[k]);
      for (std::size_t i = 0; i < clean.size(); ++i) {
        const auto g = generic_quantity(hs[k], clean[i].quantity);
        const double scale = 1.0 + max_abs(g);
        auto& d = delta[clean[i].formula];
        d.first = std::max(d.first, max_abs(difference(clean[i].value, g)) / scale);
        d.second = std::max(d.second, max_abs(difference(used[i].value, g)) / scale);
        quantity[clean[i].formula] = clean[i].quantity;
      }
    }
    const double tol = s.tol.derivative;
    for (const auto& [formula, d] : delta) {
      CheckResult c = threshold_check("closed_form_" + formula, formula, d.second, tol);
      // A printed form that already misses on the true warping is a finding;
      // one that only misses after corruption is a failure.
      if (d.first > tol) c.status = Status::finding;
      c.details["quantity"] = quantity[formula];
      out.push_back(c);
    }
    ordered_json conds = ordered_json::array();
    for (const auto& c : evaluate_conditions(*s.special, pts, tol))
      conds.push_back({{"formula", c.formula}, {"max_residual", c.max_residual}, {"satisfied", c.satisfied}});
    extra["conditions"] = conds;
  }

  if (s.conformal && selected(s, "conformal")) {
    ConformalMap cm(s.conformal->phi, s.conformal->dilation);
    double tau_d = 0.0, sff = 0.0, printed = 0.0, restored = 0.0, forms = 0.0, literal = 0.0, logv = 0.0;
    std::mt19937_64 vr(s.seed);
    std::normal_distribution<double> nd;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      tau_d = std::max(tau_d, max_abs(difference(conformal_tension(cm, pts[k]), hs[k].tau)));
      std::vector<double> x(cm.dim()), y(cm.dim());
      for (auto& v : x) v = nd(vr);
      for (auto& v : y) v = nd(vr);
      sff = std::max(sff, conformal_second_fundamental_form_residual(cm, pts[k], x, y));
      const auto b = bi_f_conformal_residual(cm, f, pts[k]);
      literal = std::max(literal, b.literal.delta);
      logv = std::max(logv, b.log_variant.delta);
      if (cm.dim() >= 3) {
        const auto r = f_bi_conformal_residual(cm, f, pts[k]);
        printed = std::max(printed, r.printed.delta);
        restored = std::max(restored, r.f_restored.delta);
        forms = std::max(forms, f_bi_conformal_residual(cm, Expr(1.0), pts[k], true).lambda_equals_f->forms_difference);
      }
    }
    const double tol = s.tol.derivative;
    out.push_back(threshold_check("conformal_tension", "conformal_tension_closed_form", tau_d, s.tol.closed_form));
    out.push_back(
        threshold_check("conformal_second_fundamental_form", "conformal_second_fundamental_form", sff, s.tol.closed_form));
    auto bi = threshold_check("conformal_bi_f_printed", "conformal_bi_f_criterion", std::min(literal, logv), tol);
    if (bi.status == Status::fail) bi.status = Status::finding;
    bi.details["literal_residual"] = literal;
    bi.details["log_variant_residual"] = logv;
    bi.details["closer"] = literal < logv ? "literal" : (logv < literal ? "log_variant" : "tie");
    out.push_back(bi);
    if (cm.dim() >= 3) {
      auto p = threshold_check("conformal_f_bi_printed", "conformal_f_bi_criterion_printed", printed, tol);
      if (p.status == Status::fail) p.status = Status::finding;
      out.push_back(p);
      out.push_back(threshold_check("conformal_f_bi_weight_restored", "conformal_f_bi_criterion_weight_restored",
                                    restored, tol));
      out.push_back(threshold_check("conformal_dilation_weight_forms_agree", "conformal_f_bi_dilation_weight_two_forms",
                                    forms, s.tol.closed_form));
    }
  }
  return out;
}

std::vector<CheckResult> run_variation_check(const Scenario& s, ordered_json& extra) {
  reject_unknown_checks(s, {"E_2f", "E_f2"}, "variation-check");
  const int res = s.resolution.value_or(64);
  std::optional<VariationTriple> tr;
  if (s.map) {
    GridMap phi = grid_map_of(s, res);
    const int m = phi.domain().dim(), n = phi.codomain().dim();
    ExprVec v = random_trig_field(m, n, s.seed, 2, 1.0);
    NodalField vn = sample_field(phi.domain(), v);
    tr = VariationTriple{std::move(phi), weight_of(s), std::move(v), std::move(vn)};
  } else {
    tr = seeded_variation_triple(s.seed, res);
  }
  const double h = 1e-3, tol = s.tol.variation;
  std::vector<CheckResult> out;
  ordered_json runs = ordered_json::object();
  for (Functional k : {Functional::E_2f, Functional::E_f2}) {
    const auto name = to_string(k);
    if (!selected(s, name)) continue;
    try {
      const auto r = first_variation_check(tr->phi, tr->f, tr->v, k, h, tol);
      auto c = threshold_check("first_variation_" + name, "first_variation_" + name, r.residual, tol);
      c.details["lhs"] = r.lhs;
      c.details["rhs"] = r.rhs;
      c.details["lhs_extrapolated"] = r.lhs_extrapolated;
      out.push_back(c);
      ordered_json readings = ordered_json::array();
      for (const auto& x : r.readings)
        readings.push_back({{"reading", x.reading}, {"rhs", x.rhs}, {"residual", x.residual}});
      runs[name] = {{"best_reading", r.best_reading}, {"readings", readings}};
      if (k == Functional::E_f2) {
        double next = INFINITY;
        for (const auto& x : r.readings)
          if (x.reading != "derived") next = std::min(next, x.residual);
        CheckResult sign;
        sign.name = "first_variation_E_f2_sign_reading";
        sign.formula = "first_variation_E_f2_curvature_sign";
        sign.max_residual = r.residual;
        sign.tolerance = tol;
        if (r.residual <= tol && next <= tol) {
          sign.status = Status::pass;
          sign.details["note"] = "readings indistinguishable for this triple";
        } else {
          sign.status = r.best_reading == "derived" && r.residual <= tol ? Status::finding : Status::fail;
        }
        sign.details["best_reading"] = r.best_reading;
        sign.details["closest_alternative_residual"] = next;
        out.push_back(sign);
      }
    } catch (const StepTooLarge& e) {
      auto c = threshold_check("first_variation_" + name, "first_variation_" + name, INFINITY, tol);
      c.details["error"] = e.what();
      out.push_back(c);
    }
  }
  extra["variation"] = runs;
  extra["resolution"] = res;
  extra["h"] = h;
  return out;
}

std::vector<CheckResult> run_flow(const Scenario& s, ordered_json& extra, std::vector<FlowStep>& trajectory) {
  reject_unknown_checks(s, {}, "flow");
  FlowPlan plan = s.map ? FlowPlan{grid_map_of(s, s.resolution.value_or(12)), weight_of(s), {}}
                        : circle_flow_plan(s.resolution.value_or(12));
  plan.options.steps = s.flow.steps;
  plan.options.eta0 = s.flow.eta0;
  plan.options.eta_min = s.flow.eta_min;
  plan.options.max_halvings = s.flow.max_halvings;
  plan.options.tol = s.tol.closed_form;
  try {
    const auto r = gradient_flow(plan.phi0, plan.f, plan.options);
    trajectory = r.trajectory;
    extra["accepted_steps"] = static_cast<int>(r.trajectory.size()) - 1;
    extra["converged"] = r.converged;
    return flow_checks(r);
  } catch (const NoDescent& e) {
    auto c = threshold_check("flow_descent", "flow_backtracking_descent", INFINITY, 0.0);
    c.details["error"] = e.what();
    return {c};
  }
}

}  // namespace fbh
