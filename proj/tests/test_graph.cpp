#include "admgraph/graph.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace admgraph {
namespace {

WeightedGraph<Rational> path(int n) {
  GraphBuilder<Rational> b;
  for (int i = 0; i < n; ++i) b.add_vertex(std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) b.add_edge(i, i + 1, Rational(1));
  return std::move(b).build();
}

TEST(GraphBuilder, RejectsMalformedInput) {
  {
    GraphBuilder<Rational> b;
    b.add_vertex("a");
    EXPECT_THROW(b.add_vertex("a"), GraphError);
  }
  {
    GraphBuilder<Rational> b;
    auto a = b.add_vertex("a");
    b.add_edge(a, a, Rational(1));
    EXPECT_THROW(std::move(b).build(), GraphError);
  }
  {
    GraphBuilder<Rational> b;
    auto a = b.add_vertex("a"), c = b.add_vertex("c");
    b.add_edge(a, c, Rational(0));
    EXPECT_THROW(std::move(b).build(), GraphError);
  }
  {
    GraphBuilder<Rational> b;
    auto a = b.add_vertex("a"), c = b.add_vertex("c");
    b.add_edge(a, c, Rational(1));
    b.add_edge(c, a, Rational(2));
    EXPECT_THROW(std::move(b).build(), GraphError);
  }
  {
    GraphBuilder<Rational> b;
    b.add_vertex("a");
    b.add_vertex("c");
    EXPECT_THROW(std::move(b).build(true), GraphError);
  }
}

TEST(GraphBuilder, CanonicalEdgeOrder) {
  GraphBuilder<Rational> b;
  auto a = b.add_vertex("a"), c = b.add_vertex("c"), d = b.add_vertex("d");
  b.add_edge(d, a, Rational(1, 2));
  b.add_edge(c, a, Rational(1));
  auto g = std::move(b).build();
  ASSERT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.edges()[0].u, a);
  EXPECT_EQ(g.edges()[0].v, c);
  EXPECT_EQ(g.edges()[1].v, d);
  EXPECT_EQ(*g.weight(a, d), Rational(1, 2));
  EXPECT_FALSE(g.adjacent(c, d));
}

TEST(Distance, PathBallsAndDistances) {
  auto g = path(6);
  EXPECT_EQ(distance(g, 0, 5), 5);
  EXPECT_EQ(ball(g, 2, 1), (std::vector<VertexId>{1, 2, 3}));
  EXPECT_EQ(ball(g, 0, 0), (std::vector<VertexId>{0}));
  EXPECT_THROW(ball(g, 0, -1), DomainError);
}

TEST(Boundaries, EdgeAndVertexBoundary) {
  auto g = path(6);
  std::vector<VertexId> s{2, 3};
  auto b = boundaries(g, std::span<const VertexId>(s));
  EXPECT_EQ(b.edge_boundary.size(), 2u);
  EXPECT_EQ(b.vertex_boundary, (std::vector<VertexId>{1, 4}));
  EXPECT_EQ(b.closure, (std::vector<VertexId>{1, 2, 3, 4}));
}

TEST(Laplacian, UsesVertexMeasure) {
  GraphBuilder<Rational> b;
  auto x = b.add_vertex("x"), y = b.add_vertex("y"), z = b.add_vertex("z");
  b.add_edge(x, y, Rational(2));
  b.add_edge(x, z, Rational(1, 2));
  b.set_vertex_weight(x, Rational(1, 4));
  auto g = std::move(b).build();
  PotentialFunction<Rational> f(3);
  f.set(x, Rational(1));
  f.set(y, Rational(3));
  f.set(z, Rational(0));
  // (2·2 + ½·(−1)) / ¼ = 14
  EXPECT_EQ(laplacian(g, f, x), Rational(14));
  // m(y) = 1: 2·(1 − 3)
  EXPECT_EQ(laplacian(g, f, y), Rational(-4));
}

TEST(Lipschitz, SubsetCheckAgreesWithAllPairs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = testing::random_graph(rng, 9, 6, false);
    std::uniform_int_distribution<int> value(-3, 3);
    PotentialFunction<Rational> f(g.vertex_count());
    std::vector<VertexId> subset;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      f.set(v, Rational(value(rng)));
      if (v % 2 == 0) subset.push_back(v);
    }
    bool expected = true;
    for (VertexId u : subset) {
      auto d = bfs_distances(g, u);
      for (VertexId v : subset) expected = expected && abs(f(u) - f(v)) <= Rational(d[v]);
    }
    auto verdict = is_lipschitz(g, f, Rational(1), std::span<const VertexId>(subset));
    EXPECT_EQ(verdict.holds, expected) << "trial " << trial;
    if (!verdict.holds) {
      auto [u, v] = *verdict.violation;
      EXPECT_GT(abs(f(u) - f(v)), Rational(distance(g, u, v)));
    }
  }
}

TEST(PotentialFunction, UndefinedAccessThrows) {
  PotentialFunction<int> f(3);
  f.set(1, 5);
  EXPECT_TRUE(f.defined(1));
  EXPECT_FALSE(f.defined(0));
  EXPECT_THROW(f(0), DomainError);
  EXPECT_EQ(f.domain(), (std::vector<VertexId>{1}));
}

TEST(Scalars, ExactParsingAndFormatting) {
  EXPECT_EQ(parse_scalar<Rational>("3/4"), Rational(3, 4));
  EXPECT_EQ(parse_scalar<Rational>("6/8"), Rational(3, 4));
  EXPECT_EQ(parse_scalar<Rational>("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_scalar<Rational>("-1.5"), Rational(-3, 2));
  EXPECT_EQ(format_scalar(Rational(-3, 2)), "-3/2");
  EXPECT_EQ(format_scalar(Rational(4)), "4");
  EXPECT_EQ(ScalarTraits<Rational>::from_double(0.1), Rational(1, 10));
  EXPECT_THROW(parse_scalar<Rational>("1/0"), ParseError);
  EXPECT_THROW(parse_scalar<Rational>("abc"), ParseError);
  EXPECT_DOUBLE_EQ(parse_scalar<double>("1/4"), 0.25);
}

}  // namespace
}  // namespace admgraph
