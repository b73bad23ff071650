// One line per acceptance criterion; exit status 1 if any criterion fails.
#include "fbh/checks.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace fbh;

namespace {

struct Outcome {
  bool ok = false;
  std::string summary;
};

std::string worst_of(const std::vector<CheckResult>& cs) {
  std::string s;
  for (const auto& c : cs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s=%.3g(%s)", s.empty() ? "" : " ", c.name.c_str(), c.max_residual,
                  to_string(c.status).c_str());
    s += buf;
  }
  return s;
}

bool all_pass(const std::vector<CheckResult>& cs) {
  for (const auto& c : cs)
    if (c.status != Status::pass) return false;
  return true;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"warped connection closed form vs oracle, 100 samples x 3 products, <= 1e-8, <= 5 s",
       [] {
         const auto t0 = std::chrono::steady_clock::now();
         std::vector<CheckResult> cs;
         for (const auto& w : warped_catalog()) cs.push_back(warped_connection_check(w, 100, 2024, 1e-8));
         const double t = seconds_since(t0);
         return Outcome{all_pass(cs) && t <= 5.0, worst_of(cs) + " time=" + std::to_string(t) + "s"};
       }},
      {"warped curvature closed forms vs oracle <= 1e-8, forms agree <= 1e-10",
       [] {
         std::vector<CheckResult> cs;
         for (const auto& w : warped_catalog())
           for (auto& c : warped_curvature_checks(w, 100, 77, 1e-8, 1e-10)) cs.push_back(c);
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"f-bi-tension direct vs relation on 100 seeded scenarios <= 1e-8",
       [] {
         const std::vector<CheckResult> cs = {f_bi_relation_check(100, 1, 1e-8)};
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"constant weight: tau_2f = c tau_2 and tau_f2 = c^2 tau_2 on 50 scenarios <= 1e-9",
       [] {
         const auto cs = constant_weight_checks(50, 7, 1e-9);
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"first variation of E_2f and E_f2 on 20 triples, resolution 64, h 1e-3, <= 1e-4; sign reading recorded",
       [] {
         const auto cs = variation_checks(20, 64, 1e-3, 1e-4);
         const bool ok = cs[0].status == Status::pass && cs[1].status == Status::pass &&
                         cs[2].status == Status::finding;
         return Outcome{ok, worst_of(cs) + " selected=" + cs[2].details["best_reading_counts"].dump()};
       }},
      {"special-map tension closed forms vs generic engine <= 1e-9",
       [] {
         const std::vector<CheckResult> cs = {special_tension_check(1e-9)};
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"sphere warped model: critical |grad lambda^2|^2 at pi/4, 3pi/4, harmonic equator <= 1e-9",
       [] {
         const auto cs = swpm_checks(1e-9);
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"Id x psi fiber block of tau_2f for 3 harmonic psi <= 1e-8",
       [] {
         const std::vector<CheckResult> cs = {block_structure_check(1e-8)};
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"conformal: second fundamental form identity, dilation-weight forms agree, n = 2 harmonic <= 1e-9",
       [] {
         const auto cs = conformal_checks(1e-9);
         return Outcome{all_pass(cs), worst_of(cs)};
       }},
      {"flow on the circle: monotone over >= 50 steps, sup residual down >= 10x, <= 60 s",
       [] {
         const auto t0 = std::chrono::steady_clock::now();
         const auto plan = circle_flow_plan();
         const auto cs = flow_checks(gradient_flow(plan.phi0, plan.f, plan.options));
         const double t = seconds_since(t0);
         const bool ok = all_pass(cs) && cs[0].details["accepted_steps"].get<int>() >= 50 && t <= 60.0;
         return Outcome{ok, worst_of(cs) + " steps=" + cs[0].details["accepted_steps"].dump() +
                                " reduction=" + cs[1].details["reduction"].dump() + " time=" + std::to_string(t) + "s"};
       }},
      {"negative controls: lambda -> lambda^1.01 flips passes to fails",
       [] {
         const auto c = negative_controls(1.01);
         return Outcome{c.status == Status::pass,
                        "flipped=" + c.details["flipped"].dump() + "/" + std::to_string(c.details["controls"].size())};
       }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.ok ? 0 : 1;
    std::printf("[%s] %2zu %s | %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.summary.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
