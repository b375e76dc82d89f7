#include "admgraph/instances.hpp"
#include "admgraph/ollivier.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace admgraph {
namespace {

WeightedGraph<Rational> cycle(int n) {
  GraphBuilder<Rational> b;
  for (int i = 0; i < n; ++i) b.add_vertex(std::to_string(i));
  for (int i = 0; i < n; ++i) b.add_edge(i, (i + 1) % n, Rational(1));
  return std::move(b).build();
}

WeightedGraph<Rational> complete(int n) {
  GraphBuilder<Rational> b;
  for (int i = 0; i < n; ++i) b.add_vertex(std::to_string(i));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) b.add_edge(i, j, Rational(1));
  }
  return std::move(b).build();
}

TEST(EdgeCurvature, MatchesNaiveEnumerationOnRandomGraphs) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 60; ++trial) {
    auto g = testing::random_graph(rng, 7 + trial % 4, 4 + trial % 5, trial % 2 == 1);
    for (const auto& e : g.edges()) {
      Rational expected = testing::naive_kappa(g, e.u, e.v);
      EXPECT_EQ(edge_kappa(g, e.u, e.v), expected) << "trial " << trial << " edge " << e.u << "-" << e.v;
      EXPECT_EQ(edge_kappa(g, e.v, e.u), expected) << "symmetry, trial " << trial;
    }
  }
}

TEST(EdgeCurvature, PruningDoesNotChangeTheMinimum) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = testing::random_graph(rng, 10, 10, true);
    EnumerationOptions plain;
    plain.propagate = false;
    plain.bound = false;
    for (const auto& e : g.edges()) EXPECT_EQ(edge_kappa(g, e.u, e.v), edge_kappa(g, e.u, e.v, plain));
  }
}

TEST(EdgeCurvature, WitnessAttainsTheMinimum) {
  std::mt19937_64 rng(5);
  auto g = testing::random_graph(rng, 9, 8, true);
  for (const auto& e : g.edges()) {
    auto res = edge_curvature(g, e.u, e.v);
    PotentialFunction<Rational> f(g.vertex_count());
    for (VertexId v : res.domain) f.set(v, Rational(res.witness(v)));
    EXPECT_EQ(f(e.v) - f(e.u), Rational(1));
    EXPECT_EQ(laplacian(g, f, e.u) - laplacian(g, f, e.v), res.kappa);
    auto lip = is_lipschitz(g, f, Rational(1), std::span<const VertexId>(res.domain));
    EXPECT_TRUE(lip.holds);
  }
}

TEST(EdgeCurvature, KnownValues) {
  // Long unit cycles are flat.
  auto c = cycle(8);
  EXPECT_EQ(edge_kappa(c, 0, 1), Rational(0));
  // A unit triangle: f = (0, 1, 1) on (x, y, z) gives Δf(x) − Δf(y) = 2 + 1 = 3,
  // and f = (0, 1, 0) gives 1 + 2 = 3 as well.
  auto k3 = complete(3);
  EXPECT_EQ(edge_kappa(k3, 0, 1), Rational(3));
  // K4: every other vertex is adjacent to both ends.
  auto k4 = complete(4);
  EXPECT_EQ(edge_kappa(k4, 0, 1), testing::naive_kappa(k4, 0, 1));
  // A 4-cycle.
  auto c4 = cycle(4);
  EXPECT_EQ(edge_kappa(c4, 0, 1), Rational(2));
}

TEST(EdgeCurvature, SplitVertexExample) {
  auto g = split_vertex_graph<Rational>();
  auto a = g.at("a"), b = g.at("b");
  EXPECT_EQ(edge_kappa(g, a, b), Rational(5));
  EXPECT_EQ(testing::naive_kappa(g, a, b), Rational(5));
  for (const auto& e : g.edges()) {
    if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) continue;
    EXPECT_EQ(edge_kappa(g, e.u, e.v), Rational(0)) << g.label(e.u) << "-" << g.label(e.v);
  }
}

TEST(EdgeCurvature, SplitLineExampleIsFlat) {
  auto g = split_cycle_graph<Rational>();
  for (const auto& e : g.edges()) EXPECT_EQ(edge_kappa(g, e.u, e.v), Rational(0));
}

TEST(EdgeCurvature, FloatingPointAgreesWithExact) {
  std::mt19937_64 rng(11);
  auto g = testing::random_graph(rng, 9, 7, true);
  GraphBuilder<double> b;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    b.add_vertex(g.label(v));
    if (g.has_vertex_weights()) b.set_vertex_weight(v, g.vertex_weight(v).get_d());
  }
  for (const auto& e : g.edges()) b.add_edge(e.u, e.v, e.weight.get_d());
  auto gd = std::move(b).build();
  for (const auto& e : g.edges()) EXPECT_NEAR(edge_kappa(gd, e.u, e.v), edge_kappa(g, e.u, e.v).get_d(), 1e-12);
}

TEST(EdgeCurvature, BudgetIsEnforcedPerEdge) {
  auto g = complete(6);
  EnumerationOptions tight;
  tight.node_budget = 1;
  tight.bound = false;
  tight.propagate = false;
  EXPECT_THROW(edge_kappa(g, 0, 1, tight), BudgetExceeded);
  auto all = all_edge_curvatures(g, tight);
  for (const auto& o : all) {
    EXPECT_FALSE(o.kappa.has_value());
    EXPECT_FALSE(o.error.empty());
  }
}

TEST(ScalarCurvature, SumsIncidentEdgesAndIsOrderIndependent) {
  std::mt19937_64 rng(3);
  auto g = testing::random_graph(rng, 10, 8, false);
  auto serial = all_scalar_curvatures(g, {}, 1);
  auto parallel = all_scalar_curvatures(g, {}, 4);
  EXPECT_EQ(serial, parallel);
  for (VertexId v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(serial[v], scalar_curvature(g, v));
}

}  // namespace
}  // namespace admgraph
