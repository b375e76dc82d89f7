#include "admgraph/fields.hpp"
#include "admgraph/mass.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace admgraph {
namespace {

TEST(DenseSolve, SolvesSmallSystemsExactly) {
  std::vector<std::vector<Rational>> a{{2, 1}, {1, 3}};
  auto x = detail::solve_dense<Rational>(a, {Rational(3), Rational(5)});
  ASSERT_TRUE(x);
  EXPECT_EQ((*x)[0], Rational(4, 5));
  EXPECT_EQ((*x)[1], Rational(7, 5));
  std::vector<std::vector<Rational>> singular{{1, 2}, {2, 4}};
  EXPECT_FALSE(detail::solve_dense<Rational>(singular, {Rational(1), Rational(1)}));
}

TEST(DecayFit, RecoversPowerLaw) {
  std::vector<int> radii;
  std::vector<double> values;
  for (int r = 1; r <= 30; ++r) {
    radii.push_back(r);
    values.push_back(3.0 * std::pow(r, -2.5));
  }
  auto fit = fit_decay(radii, values);
  EXPECT_FALSE(fit.identically_zero);
  EXPECT_NEAR(fit.exponent, 2.5, 1e-9);
  auto zero = fit_decay(radii, std::vector<double>(radii.size(), 0.0));
  EXPECT_TRUE(zero.identically_zero);
}

TEST(MassEstimate, UnitGridHasZeroMass) {
  GridWindow<Rational> gw(3, 8, WeightProvider<Rational>::constant(Rational(1)));
  auto est = mass_estimate(gw, 6, Rational(0));
  for (const auto& m : est.partials) EXPECT_EQ(m, Rational(0));
  EXPECT_TRUE(est.converged);
  EXPECT_EQ(*est.value, Rational(0));
}

TEST(MassEstimate, PartialMassIsNormalisedShellGap) {
  GridWindow<Rational> gw(2, 6, testing::random_grid_weights(2, 6, 4));
  auto est = mass_estimate(gw, 4, Rational(1, 1000));
  for (int r = 0; r <= 4; ++r) EXPECT_EQ(est.partials[r], shell_gap(gw, r) / Rational(8));
  EXPECT_THROW(mass_estimate(gw, 5, Rational(0)), OutOfWindow);
}

TEST(MassEstimate, ExactSchwarzschildGapsInThreeDimensions) {
  // With w = 1 + m/(r+1) on E_r, the gap is |E_r|·(m/(r+1) − m/(r+2)).
  const Rational m(1, 2);
  GridWindow<Rational> gw(3, 12, schwarzschild_field_exact3(m));
  auto est = mass_estimate(gw, 10, Rational(1, 100));
  for (int r = 0; r <= 10; ++r) {
    Rational expected = Rational(shell_edge_count(3, r)) * (m / Rational(r + 1) - m / Rational(r + 2)) / Rational(24);
    EXPECT_EQ(est.partials[r], expected);
  }
}

TEST(MassEstimate, SchwarzschildFloatReproducesMass) {
  GridWindow<double> gw(3, 42, schwarzschild_field(3, 1.0));
  auto est = mass_estimate(gw, 40, 0.05);
  EXPECT_NEAR(est.extrapolated, 1.0, 0.02);
  EXPECT_LT(est.last_partial, 1.0);
}

TEST(MassEstimate, LogModelGapFormula) {
  const double m = 0.02;
  GridWindow<double> gw(2, 40, log_model_field(m, 40));
  for (int r = 1; r <= 38; ++r) {
    double expected = 4.0 * (2 * r + 1) * m * std::log(1.0 + 1.0 / r);
    EXPECT_NEAR(shell_gap(gw, r), expected, 1e-9) << r;
  }
}

TEST(Flatness, UnitGridPassesTrivially) {
  GridWindow<double> gw(2, 12, WeightProvider<double>::constant(1.0));
  auto d = flatness_diagnostics(gw, 2.5);
  EXPECT_TRUE(d.verdict);
  EXPECT_TRUE(d.weight_all_fit.identically_zero);
  auto low = flatness_diagnostics(gw, 1.5);
  EXPECT_FALSE(low.exponent_admissible);
  EXPECT_FALSE(low.verdict);
}

TEST(Flatness, RadialPowerDecayExponent) {
  GridWindow<double> gw(3, 24, radial_power_field(0.5, 3.5));
  auto d = flatness_diagnostics(gw, 3.5, 0.5);
  EXPECT_FALSE(d.weight_all_fit.identically_zero);
  EXPECT_NEAR(d.weight_all_fit.exponent, 3.5, 0.5);
  EXPECT_TRUE(d.weights_tend_to_one);
}

TEST(StrongDecay, UnitGridMassIsZero) {
  GridWindow<double> gw(3, 10, WeightProvider<double>::constant(1.0));
  auto s = strong_decay_check(gw, 2.0);
  EXPECT_TRUE(s.hypotheses_hold);
  EXPECT_TRUE(s.mass_tends_to_zero);
}

TEST(LineConcavity, ConstantConcaveAndConvexProfiles) {
  GridWindow<Rational> flat(2, 5, WeightProvider<Rational>::constant(Rational(2)));
  auto c = line_concavity_check(flat, GridPoint{0, 1}, 0);
  EXPECT_TRUE(c.constant);
  EXPECT_TRUE(c.concave);
  EXPECT_FALSE(c.violation_right);

  // w = 5 − k/2 along the x-axis line: concave, non-constant, hits 0 at k = 10.
  auto tilted = WeightProvider<Rational>::procedural(
      [](const GridPoint& b, int axis) {
        if (axis == 0 && b[1] == 0) return Rational(Rational(5) - Rational(b[0], 2));
        return Rational(1);
      },
      std::nullopt, "tilted");
  GridWindow<Rational> gw(2, 5, tilted);
  auto t = line_concavity_check(gw, GridPoint{0, 0}, 0);
  EXPECT_TRUE(t.positive);
  EXPECT_TRUE(t.concave);
  EXPECT_FALSE(t.constant);
  ASSERT_TRUE(t.violation_right);
  EXPECT_EQ(*t.violation_right, 10);

  auto bump = WeightProvider<Rational>::procedural(
      [](const GridPoint& b, int axis) {
        if (axis == 0 && b[1] == 0 && b[0] == 0) return Rational(1, 2);
        return Rational(1);
      },
      std::nullopt, "dip");
  auto v = line_concavity_check(GridWindow<Rational>(2, 5, bump), GridPoint{0, 0}, 0);
  EXPECT_FALSE(v.concave);
}

TEST(WindowRigidity, UnitWindowSatisfiesPremisesAndConclusion) {
  GridWindow<Rational> gw(2, 6, WeightProvider<Rational>::constant(Rational(1)));
  auto rep = window_rigidity_check(gw, 3);
  EXPECT_TRUE(rep.premises);
  EXPECT_TRUE(rep.weights_trivial);
  EXPECT_TRUE(rep.conclusion_holds);
  EXPECT_TRUE(rep.partial_sums_monotone);
}

TEST(WindowRigidity, SingleHeavyEdgeBreaksNonNegativity) {
  for (Rational w : {Rational(1, 2), Rational(3, 2)}) {
    auto p = WeightProvider<Rational>::procedural(
        [w](const GridPoint& b, int axis) { return axis == 0 && b == GridPoint{0, 0} ? w : Rational(1); },
        std::nullopt, "one edge");
    auto rep = window_rigidity_check(GridWindow<Rational>(2, 6, p), 3);
    EXPECT_TRUE(rep.outer_trivial);
    EXPECT_FALSE(rep.scalar_nonnegative);
    EXPECT_TRUE(rep.conclusion_holds);
  }
}

}  // namespace
}  // namespace admgraph
