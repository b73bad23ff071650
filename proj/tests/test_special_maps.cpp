#include "fbh/errors.hpp"
#include "fbh/special_maps.hpp"
#include "fbh/standard_manifolds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fbh;
using std::numbers::pi;

namespace {

SpecialMapScenario find(const std::string& name) {
  for (auto& s : special_catalog())
    if (s.name == name) return s;
  throw std::runtime_error("no scenario " + name);
}

FormulaCheck check_named(const SpecialMapScenario& s, const std::string& formula, int count = 8) {
  for (auto& c : verify_printed_forms(s, special_samples(s, count, 11)))
    if (c.formula == formula) return c;
  throw std::runtime_error("no formula " + formula);
}

ConditionReport condition_named(const SpecialMapScenario& s, const std::string& formula, int count = 8) {
  for (auto& c : evaluate_conditions(s, special_samples(s, count, 11)))
    if (c.formula == formula) return c;
  throw std::runtime_error("no condition " + formula);
}

}  // namespace

TEST(SpecialMaps, KindRoundTrip) {
  for (auto& s : special_catalog()) EXPECT_EQ(special_kind_from_string(to_string(s.kind)), s.kind);
  EXPECT_THROW(special_kind_from_string("nope"), std::invalid_argument);
}

TEST(SpecialMaps, CatalogIsLargeAndNamed) {
  const auto cat = special_catalog();
  EXPECT_GE(cat.size(), 20u);
  EXPECT_NO_THROW(find("sphere_swpm_pi4"));
  EXPECT_NO_THROW(find("pi1_exp_warp_nontrivial_bif"));
}

TEST(SpecialMaps, TensionClosedFormsMatchGenericEngine) {
  for (auto& s : special_catalog()) {
    for (auto& c : verify_printed_forms(s, special_samples(s, 8, 5), 1e-9))
      if (c.quantity == "tau") EXPECT_TRUE(c.agrees) << s.name << " " << c.formula << " " << c.max_delta;
  }
}

TEST(SpecialMaps, FTensionClosedFormsMatchGenericEngine) {
  for (auto& s : special_catalog()) {
    for (auto& c : verify_printed_forms(s, special_samples(s, 8, 5), 1e-9))
      if (c.quantity == "tau_f") EXPECT_TRUE(c.agrees) << s.name << " " << c.formula << " " << c.max_delta;
  }
}

TEST(SpecialMaps, HarmonicSlicesHaveZeroTension) {
  for (auto& s : special_catalog()) {
    if (s.kind != SpecialKind::inclusion_iy0 && s.kind != SpecialKind::projection_pi2) continue;
    const auto phi = special_map(s);
    for (auto& p : special_samples(s, 8, 2)) EXPECT_LE(max_abs(tension(phi, p)), 1e-10) << s.name;
  }
}

TEST(SpecialMaps, Iy0IsTotallyGeodesic) {
  for (const char* name : {"iy0_line_exp_weight", "iy0_affine_weight", "iy0_sphere_base"}) {
    const auto r = condition_named(find(name), "iy0_totally_geodesic");
    EXPECT_LE(r.max_residual, 1e-10) << name;
  }
}

TEST(SpecialMaps, Iy0ConstantWeightIsTriviallyBiF) {
  const auto s = find("iy0_constant_weight");
  for (auto& p : special_samples(s, 6, 1)) EXPECT_LE(max_abs(iy0_bi_f_tension(s, p)), 1e-12);
}

TEST(SpecialMaps, Iy0CriterionTracksGenericBiFTension) {
  for (const char* name : {"iy0_line_exp_weight", "iy0_sphere_base"}) {
    const auto c = check_named(find(name), "iy0_bi_f_criterion_times_minus_half");
    EXPECT_LE(c.max_delta, 1e-8) << name;
  }
}

TEST(SpecialMaps, Iy0PrintedGradientSignDisagreesWithEngine) {
  const auto c = check_named(find("iy0_line_exp_weight"), "iy0_bi_f_tension_printed");
  EXPECT_FALSE(c.agrees);
  EXPECT_GT(c.max_delta, 1e-3);
}

TEST(SpecialMaps, Iy0AffineWeightIsNonTriviallyBiF) {
  const auto s = find("iy0_affine_weight");
  EXPECT_TRUE(condition_named(s, "iy0_bi_f_criterion").satisfied);
  EXPECT_LE(condition_named(s, "inclusion_iy0_generic_bi_f").max_residual, 1e-8);
}

TEST(SpecialMaps, Iy0EntryPointsRejectOtherKinds) {
  const auto s = find("ix0_exp_warp");
  EXPECT_THROW(iy0_bi_f_tension(s, Point{{0.1}}), WrongKind);
  EXPECT_THROW(iy0_condition(s, {}), WrongKind);
  EXPECT_THROW(ix0_conditions(find("iy0_affine_weight"), {}), WrongKind);
}

TEST(SpecialMaps, Ix0TensionOnSphereModel) {
  const auto s = find("sphere_swpm_pi3_unit_weight");
  const auto h = ix0_tension_chain(s, Point{{1.0}});
  EXPECT_NEAR(h.tau[0], -std::sin(pi / 3) * std::cos(pi / 3), 1e-8);
  EXPECT_NEAR(h.tau[1], 0.0, 1e-12);
}

TEST(SpecialMaps, Ix0ChainVanishesAtCriticalPointWithConstantWeight) {
  const auto s = find("sphere_swpm_pi2_unit_weight");
  for (auto& p : special_samples(s, 6, 4)) {
    const auto h = ix0_tension_chain(s, p);
    for (const auto* v : {&h.tau, &h.tau_f, &h.bi_f, &h.f_bi_direct}) EXPECT_LE(max_abs(*v), 1e-9);
  }
}

TEST(SpecialMaps, Ix0FBiClosedFormMatchesEngine) {
  for (auto& s : special_catalog())
    if (s.kind == SpecialKind::inclusion_ix0) EXPECT_TRUE(check_named(s, "ix0_f_bi_tension_printed").agrees) << s.name;
}

TEST(SpecialMaps, Ix0PrintedBiFDropsFiberTerms) {
  EXPECT_FALSE(check_named(find("sphere_swpm_pi4"), "ix0_bi_f_tension_printed").agrees);
  EXPECT_TRUE(check_named(find("sphere_swpm_pi4_unit_weight"), "ix0_bi_f_tension_printed").agrees);
}

TEST(SpecialMaps, SwpmCriticality) {
  const auto w = sphere_swpm();
  for (double t0 : {pi / 4, 3 * pi / 4}) {
    const auto c = swpm_criticality(w, t0);
    EXPECT_LE(std::abs(c.d_grad_lambda2_sq), 1e-9) << t0;
    EXPECT_TRUE(c.grad_sq_critical);
    EXPECT_FALSE(c.lambda2_critical);
    EXPECT_NEAR(std::abs(c.grad_lambda2), 1.0, 1e-12);
  }
  const auto eq = swpm_criticality(w, pi / 2);
  EXPECT_TRUE(eq.lambda2_critical);
  const auto third = swpm_criticality(w, pi / 3);
  EXPECT_FALSE(third.lambda2_critical);
  EXPECT_FALSE(third.grad_sq_critical);
}

TEST(SpecialMaps, EquatorInclusionIsHarmonic) {
  const auto s = find("sphere_swpm_pi2");
  const auto phi = special_map(s);
  for (auto& p : special_samples(s, 8, 9)) EXPECT_LE(max_abs(tension(phi, p)), 1e-9);
}

TEST(SpecialMaps, Ix0FBiSecondEquationFailsForNonConstantWeight) {
  const auto s = find("sphere_swpm_pi4");
  const auto r = ix0_conditions(s, special_samples(s, 8, 3));
  for (auto& c : r) {
    if (c.formula == "ix0_f_bi_system_second") EXPECT_FALSE(c.satisfied);
    if (c.formula == "inclusion_ix0_generic_f_bi") EXPECT_FALSE(c.satisfied);
    if (c.formula == "ix0_f_bi_second_forces_constant") EXPECT_TRUE(c.satisfied);
  }
}

TEST(SpecialMaps, Ix0ConstantWeightReducesToFirstEquation) {
  const auto s = find("sphere_swpm_pi3_unit_weight");
  for (auto& c : ix0_conditions(s, special_samples(s, 8, 3))) {
    if (c.formula == "ix0_f_bi_system_second" || c.formula == "ix0_bi_f_system_second") EXPECT_TRUE(c.satisfied);
    if (c.formula == "ix0_f_bi_system_first_printed") EXPECT_FALSE(c.satisfied);
    if (c.formula == "ix0_f_bi_second_forces_constant") EXPECT_TRUE(c.satisfied);
  }
}

TEST(SpecialMaps, Ix0CriticalWarpingKillsLambdaTerms) {
  const auto s = find("sphere_swpm_pi2");
  for (auto& c : ix0_conditions(s, special_samples(s, 8, 3)))
    if (c.formula.rfind("ix0_f_bi_system", 0) == 0 || c.formula == "ix0_bi_f_system_first")
      EXPECT_TRUE(c.satisfied) << c.formula;
}

TEST(SpecialMaps, Pi1ExpWarpIsNonTriviallyBiF) {
  const auto s = find("pi1_exp_warp_nontrivial_bif");
  EXPECT_TRUE(condition_named(s, "pi1_bi_f_hypothesis_grad_log_f_lambda_n").satisfied);
  EXPECT_LE(condition_named(s, "projection_pi1_generic_bi_f").max_residual, 1e-8);
  const auto phi = special_map(s);
  for (auto& p : special_samples(s, 4, 1)) EXPECT_GT(max_abs(tension(phi, p)), 0.5);
}

TEST(SpecialMaps, Pi1ClosedFormsWithBaseWeight) {
  for (const char* name : {"pi1_exp_warp_nontrivial_bif", "pi1_sphere_base_weight"}) {
    const auto s = find(name);
    EXPECT_TRUE(check_named(s, "pi1_bi_f_tension_printed").agrees) << name;
    EXPECT_TRUE(check_named(s, "pi1_f_bi_tension_printed").agrees) << name;
  }
}

TEST(SpecialMaps, Pi1PrintedBiFAssumesBaseOnlyWeight) {
  EXPECT_FALSE(check_named(find("pi1_sphere_product_weight"), "pi1_bi_f_tension_printed").agrees);
  EXPECT_TRUE(check_named(find("pi1_sphere_product_weight"), "pi1_f_bi_tension_printed").agrees);
}

TEST(SpecialMaps, Pi2ConstantWeightChainVanishes) {
  const auto s = find("pi2_constant_weight");
  const auto phi = special_map(s);
  for (auto& p : special_samples(s, 6, 8)) {
    const auto h = tension_hierarchy(phi, s.weight, p);
    EXPECT_LE(max_abs(h.tau_f), 1e-10);
    EXPECT_LE(max_abs(h.bi_f), 1e-10);
  }
}

// pi2 with a fiber-only weight, keeping the base variation of 1/lambda^2:
// -f((Delta_M l + n <grad log lambda, grad l>) grad f + l^2 (Tr Hess grad f + Ric grad f)) - l^2/2 grad|grad f|^2
// with l = 1/lambda^2.
TEST(SpecialMaps, Pi2BiFTensionWithBaseVariation) {
  const auto s = find("pi2_parallel_gradient");
  const auto& w = s.warped;
  const auto phi = special_map(s);
  const Expr inv_l2 = pow(w.lambda(), -2.0);
  for (auto& p : special_samples(s, 6, 8)) {
    const Point x = w.base_point(p), y = w.fiber_point(p);
    const double l = inv_l2.eval(x.coords);
    const auto gl = gradient(w.base(), log(w.lambda()), x);
    const auto gi = gradient(w.base(), inv_l2, x);
    const double coeff = laplacian(w.base(), inv_l2, x) + w.n() * inner(w.base(), x, gl, gi);
    const Expr f_fiber = s.weight.substitute(ExprVec{x[0], Expr::var(0), Expr::var(1)});
    const auto gf = gradient(w.fiber(), f_fiber, y);
    const double f = f_fiber.eval(y.coords);
    const auto bi = tension_hierarchy(phi, s.weight, p).bi_f;
    for (int a = 0; a < w.n(); ++a) EXPECT_NEAR(bi[a], -f * coeff * gf[a], 1e-9);
  }
}

TEST(SpecialMaps, Pi2PrintedBiFHoldsOnlyForUnitWarping) {
  auto s = find("pi2_parallel_gradient");
  EXPECT_FALSE(check_named(s, "pi2_bi_f_tension_printed").agrees);
  EXPECT_TRUE(condition_named(s, "pi2_bi_f_hypothesis_parallel_gradient").satisfied);
  EXPECT_FALSE(condition_named(s, "projection_pi2_generic_bi_f").satisfied);
  s.warped = WarpedProduct::singly(s.warped.base(), sphere_chart(0.3), Expr(1.0));
  s.weight = 2.0 + cos(Expr::var(1)) * sin(Expr::var(2));
  EXPECT_TRUE(check_named(s, "pi2_bi_f_tension_printed").agrees);
}

TEST(SpecialMaps, ProductIdPsiFiberBlockVanishes) {
  for (const char* name : {"product_id_psi_exp_warp", "product_id_psi_torus_shift", "product_id_psi_torus_linear"}) {
    const auto s = find(name);
    require_harmonic_factors(s);
    EXPECT_LE(condition_named(s, "product_id_psi_fiber_block").max_residual, 1e-8) << name;
    EXPECT_TRUE(check_named(s, "product_id_psi_block_structure").agrees) << name;
  }
}

TEST(SpecialMaps, ProductIdPsiPrintedGradientCoefficient) {
  EXPECT_TRUE(check_named(find("product_id_psi_exp_warp"), "product_id_psi_f_bi_tension_printed").agrees);
  EXPECT_FALSE(check_named(find("product_id_psi_torus_shift"), "product_id_psi_f_bi_tension_printed").agrees);
}

TEST(SpecialMaps, ProductPhiPhiBlocks) {
  EXPECT_TRUE(check_named(find("product_phi_phi_base_weight"), "product_phi_phi_bi_f_tension_blocks").agrees);
  EXPECT_FALSE(check_named(find("product_phi_phi_identity"), "product_phi_phi_bi_f_tension_blocks").agrees);
}

TEST(SpecialMaps, IsometryTypeProductHasZeroChain) {
  const auto w = WarpedProduct::singly(interval("t", -1.0, 1.0), interval("s", 0.0, 2 * pi, true), Expr(2.0));
  SpecialMapScenario s{"flat_id", w, SpecialKind::product_id_x_psi, Expr(1.5), {}, {Expr::var(0)}, {}};
  const auto phi = special_map(s);
  for (auto& p : special_samples(s, 4, 1)) {
    const auto h = tension_hierarchy(phi, s.weight, p);
    for (const auto* v : {&h.tau, &h.tau_f, &h.bi_f, &h.f_bi_direct}) EXPECT_LE(max_abs(*v), 1e-10);
  }
}

TEST(SpecialMaps, IntoWarpedUnitWeightMatches) {
  EXPECT_TRUE(check_named(find("product_into_warped_unit_weight"), "product_into_warped_f_bi_tension_printed").agrees);
  EXPECT_FALSE(check_named(find("product_into_warped_identity"), "product_into_warped_f_bi_tension_printed").agrees);
}

TEST(SpecialMaps, NonHarmonicFactorRejected) {
  auto s = find("product_id_psi_exp_warp");
  s.psi = {Expr::var(0) + 0.3 * sin(Expr::var(0))};
  EXPECT_THROW(require_harmonic_factors(s), NonHarmonicFactor);
}

TEST(SpecialMaps, WrongComponentCountRejected) {
  auto s = find("product_id_psi_torus_shift");
  s.psi.pop_back();
  EXPECT_THROW(special_map(s), ScenarioError);
}

TEST(SpecialMaps, SatisfiedCriteriaImplyVanishingGenericField) {
  for (auto& s : special_catalog()) {
    const auto reports = evaluate_conditions(s, special_samples(s, 8, 6));
    auto get = [&](const std::string& f) -> const ConditionReport* {
      for (auto& r : reports)
        if (r.formula == f) return &r;
      return nullptr;
    };
    const auto* g_bif = get(to_string(s.kind) + "_generic_bi_f");
    const auto* g_fbi = get(to_string(s.kind) + "_generic_f_bi");
    if (auto* c = get("iy0_bi_f_criterion"); c && c->satisfied) EXPECT_LE(g_bif->max_residual, 1e-7) << s.name;
    if (auto* c = get("pi1_bi_f_hypothesis_grad_log_f_lambda_n"); c && c->satisfied)
      EXPECT_LE(g_bif->max_residual, 1e-7) << s.name;
    if (auto* c = get("pi1_f_bi_criterion"); c && c->satisfied) EXPECT_LE(g_fbi->max_residual, 1e-7) << s.name;
    if (auto* c = get("product_id_psi_f_bi_criterion"); c && c->satisfied)
      EXPECT_LE(g_fbi->max_residual, 1e-7) << s.name;
  }
}

TEST(SpecialMaps, PerturbedWarpingBreaksNonTrivialSolution) {
  auto s = find("pi1_exp_warp_nontrivial_bif");
  s.warped = WarpedProduct::singly(s.warped.base(), s.warped.fiber(), pow(s.warped.lambda(), 1.01));
  EXPECT_FALSE(condition_named(s, "pi1_bi_f_hypothesis_grad_log_f_lambda_n").satisfied);
  EXPECT_FALSE(condition_named(s, "projection_pi1_generic_bi_f").satisfied);
}
