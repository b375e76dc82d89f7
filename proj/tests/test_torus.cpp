#include "admgraph/instances.hpp"
#include "admgraph/torus.hpp"

#include <gtest/gtest.h>

#include <random>

namespace admgraph {
namespace {

/// Counts residues p ∈ [0, q)^2 that lie in AZ^2: adj(A)·p ≡ 0 mod det.
long lattice_residues_2d(const std::vector<std::vector<long>>& A, long q) {
  long det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
  long count = 0;
  for (long x = 0; x < q; ++x) {
    for (long y = 0; y < q; ++y) {
      long u = A[1][1] * x - A[0][1] * y;
      long v = -A[1][0] * x + A[0][0] * y;
      if (u % det == 0 && v % det == 0) ++count;
    }
  }
  return count;
}

/// The distance condition for Z^n / LZ^n with unit steps, decided from the
/// closed-form torus distance Σ min(|d_i|, L − |d_i|).
bool identity_condition_oracle(int n, long L) {
  std::vector<GridPoint> ball;
  for_each_cube_point(n, 2, [&](const GridPoint& p) {
    if (p.l1() <= 2) ball.push_back(p);
  });
  for (const auto& a : ball) {
    for (const auto& b : ball) {
      int lattice = 0;
      long torus = 0;
      for (int i = 0; i < n; ++i) {
        long d = std::abs(a[i] - b[i]);
        lattice += static_cast<int>(d);
        long m = ((d % L) + L) % L;
        torus += std::min(m, L - m);
      }
      if (torus != lattice) return false;
    }
  }
  return true;
}

std::vector<TorusWeight<Rational>> random_weights(const TorusGraph<Rational>& t, std::mt19937_64& rng) {
  static const Rational choices[] = {Rational(1, 2), Rational(1), Rational(3, 2), Rational(2), Rational(3, 4)};
  std::uniform_int_distribution<int> pick(0, 4);
  std::vector<TorusWeight<Rational>> ws;
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    for (int d = 0; d < t.dimension(); ++d) ws.push_back({t.representative(v), d, choices[pick(rng)]});
  }
  return ws;
}

TEST(TorusSpec, DeterminantAndValidation) {
  EXPECT_EQ(det7_torus_spec().determinant(), 7);
  TorusSpec s{{{1, 2, 0}, {0, 1, 3}, {2, 0, 1}}, 1};
  EXPECT_EQ(s.determinant(), 13);
  EXPECT_THROW((TorusSpec{{{1, 2}, {2, 4}}, 1}.validate()), DomainError);
  EXPECT_THROW((TorusSpec{{{1, 0}, {0, 1}}, 0}.validate()), DomainError);
  EXPECT_THROW(build_torus<Rational>(TorusSpec{{{1, 2}, {2, 4}}, 1}), DomainError);
}

TEST(TorusConstruction, VertexCountMatchesLatticeResidues) {
  for (const auto& A : std::vector<std::vector<std::vector<long>>>{{{2, 1}, {-1, 3}}, {{1, 0}, {0, 1}}, {{3, 1}, {1, 2}}}) {
    for (long k : {1, 2, 3}) {
      TorusSpec spec{A, k};
      try {
        auto t = build_torus<Rational>(spec);
        EXPECT_EQ(static_cast<long>(t.graph().vertex_count()), lattice_residues_2d(A, t.modulus()));
        EXPECT_EQ(static_cast<long>(t.graph().vertex_count()), t.vertex_count_expected());
      } catch (const DegenerateQuotient&) {
      }
    }
  }
}

TEST(TorusConstruction, DetSevenAdjacency) {
  auto t = build_torus<Rational>(det7_torus_spec());
  ASSERT_EQ(t.graph().vertex_count(), 7u);
  EXPECT_EQ(t.modulus(), 7);
  auto name = [&](VertexId v) { return det7_torus_name(t.representative(v)); };
  VertexId a = t.vertex_of(GridPoint{0, 0});
  // Steps ±α_1 = ±(2, −1) and ±α_2 = ±(1, 3).
  EXPECT_EQ(name(t.step(a, 0, 1)), "C");
  EXPECT_EQ(name(t.step(a, 0, -1)), "F");
  EXPECT_EQ(name(t.step(a, 1, 1)), "B");
  EXPECT_EQ(name(t.step(a, 1, -1)), "G");
  for (VertexId v = 0; v < 7; ++v) EXPECT_EQ(t.graph().degree(v), 4u);
  EXPECT_EQ(distance(t.graph(), a, t.vertex_of(GridPoint{3, 2})), 2);  // D = A + α_1 + α_2
  EXPECT_EQ(t.graph().edge_count(), 14u);
}

TEST(TorusConstruction, DegenerateQuotientsAreRejected) {
  EXPECT_THROW(build_torus<Rational>(identity_torus_spec(2, 1)), DegenerateQuotient);
  EXPECT_THROW(build_torus<Rational>(identity_torus_spec(2, 2)), DegenerateQuotient);
  EXPECT_NO_THROW(build_torus<Rational>(identity_torus_spec(2, 3)));
}

TEST(TorusConstruction, InconsistentLiftsAreRejected) {
  auto spec = identity_torus_spec(2, 5);
  std::vector<TorusWeight<Rational>> ws{{GridPoint{0, 0}, 0, Rational(2)}, {GridPoint{5, 0}, 0, Rational(3)}};
  EXPECT_THROW(build_torus<Rational>(spec, ws), DomainError);
}

TEST(DistanceCondition, IdentityTorusAgreesWithClosedFormDistance) {
  for (int n : {1, 2, 3}) {
    for (long k = 3; k <= 10; ++k) {
      if (n == 3 && k > 9) continue;
      auto t = build_torus<Rational>(identity_torus_spec(n, k));
      EXPECT_EQ(distance_condition(t).holds, identity_condition_oracle(n, k)) << "n " << n << " k " << k;
    }
  }
}

TEST(DistanceCondition, MinimalMultipliers) {
  // Values derived from the closed-form oracle above and from BFS on the quotient.
  EXPECT_EQ(minimal_k_for_distance_condition(identity_torus_spec(2, 1).A, 12), 8);
  EXPECT_EQ(minimal_k_for_distance_condition(det7_torus_spec().A, 6), 3);
  auto t = build_torus<Rational>(identity_torus_spec(2, 5));
  auto dc = distance_condition(t);
  ASSERT_FALSE(dc.holds);
  ASSERT_TRUE(dc.violation);
  EXPECT_LT(dc.violation->torus_distance, dc.violation->lattice_distance);
}

TEST(TorusCurvature, ClosedFormMatchesExhaustiveSearch) {
  std::mt19937_64 rng(42);
  for (auto spec : {det7_torus_spec(3), identity_torus_spec(2, 9)}) {
    auto base = build_torus<Rational>(spec);
    auto t = build_torus<Rational>(spec, random_weights(base, rng));
    for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
      for (int d = 0; d < t.dimension(); ++d) {
        auto k = torus_kappa(t, v, d, 1);
        EXPECT_TRUE(k.closed_form);
        EXPECT_EQ(k.kappa, edge_kappa(t.graph(), v, t.step(v, d, 1)));
      }
    }
  }
}

TEST(TorusCurvature, TotalIsNonPositiveAndDecomposes) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    auto spec = trial % 2 ? det7_torus_spec(3) : identity_torus_spec(2, 9);
    auto t = build_torus<Rational>(spec, random_weights(build_torus<Rational>(spec), rng));
    auto tot = total_scalar_curvature(t);
    EXPECT_TRUE(tot.distance_condition);
    EXPECT_LE(tot.total, Rational(0));
    EXPECT_EQ(tot.total, tot.decomposed);
    for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
      for (int d = 0; d < t.dimension(); ++d) {
        auto c = cycle_sum(t, v, d);
        EXPECT_LE(c.sum, Rational(0));
        EXPECT_EQ(c.linear, Rational(0));
        EXPECT_EQ(c.sum, -c.abs_part);
      }
    }
  }
}

TEST(TorusCurvature, UnitWeightsAreFlat) {
  auto t = build_torus<Rational>(det7_torus_spec(3));
  auto tot = total_scalar_curvature(t);
  EXPECT_EQ(tot.total, Rational(0));
  for (const auto& r : tot.scalar) EXPECT_EQ(r, Rational(0));
}

TEST(TorusCurvature, SmallIdentityTorusIsPositivelyCurved) {
  // Z^2/5Z^2 violates the distance condition; exhaustive search finds κ = 1 on
  // every edge, so the total is positive.
  auto t = build_torus<Rational>(identity_torus_spec(2, 5));
  auto tot = total_scalar_curvature(t);
  EXPECT_FALSE(tot.distance_condition);
  EXPECT_FALSE(tot.all_closed_form);
  EXPECT_GT(tot.total, Rational(0));
  EXPECT_EQ(tot.total, tot.decomposed);
}

}  // namespace
}  // namespace admgraph
