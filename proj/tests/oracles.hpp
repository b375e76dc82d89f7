#pragma once

#include "admgraph/graph.hpp"
#include "admgraph/grid.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace admgraph::testing {

/// κ(x, y) by plain enumeration of every integer 1-Lipschitz f on
/// B1(x) ∪ B1(y) with f(x) = 0, f(y) = 1 and values in [−1, 2]. No pruning,
/// no bounds: the objective Δf(x) − Δf(y) is evaluated directly.
template <typename Scalar>
Scalar naive_kappa(const WeightedGraph<Scalar>& g, VertexId x, VertexId y) {
  std::vector<VertexId> dom{x, y};
  for (VertexId c : {x, y}) {
    for (const auto& nb : g.neighbors(c)) {
      if (std::find(dom.begin(), dom.end(), nb.vertex) == dom.end()) dom.push_back(nb.vertex);
    }
  }
  std::vector<std::vector<int>> d(dom.size());
  for (std::size_t i = 0; i < dom.size(); ++i) {
    auto all = bfs_distances(g, dom[i]);
    for (VertexId v : dom) d[i].push_back(all[v]);
  }
  PotentialFunction<Scalar> f(g.vertex_count());
  std::vector<int> val(dom.size(), -1);
  val[0] = 0;
  val[1] = 1;
  std::optional<Scalar> best;
  const std::size_t free = dom.size() - 2;
  std::size_t total = 1;
  for (std::size_t i = 0; i < free; ++i) total *= 4;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 2; i < dom.size(); ++i) {
      val[i] = static_cast<int>(c % 4) - 1;
      c /= 4;
    }
    bool lip = true;
    for (std::size_t i = 0; i < dom.size() && lip; ++i) {
      for (std::size_t j = i + 1; j < dom.size() && lip; ++j) lip = std::abs(val[i] - val[j]) <= d[i][j];
    }
    if (!lip) continue;
    for (std::size_t i = 0; i < dom.size(); ++i) f.set(dom[i], Scalar(val[i]));
    Scalar obj = laplacian(g, f, x) - laplacian(g, f, y);
    if (!best || obj < *best) best = obj;
  }
  return *best;
}

/// Connected random graph on `n` vertices: a random spanning tree plus extra
/// edges, weights drawn from {1/2, 1, 3/2, 2, 1/3}.
inline WeightedGraph<Rational> random_graph(std::mt19937_64& rng, int n, int extra, bool vertex_weights) {
  static const Rational choices[] = {Rational(1, 2), Rational(1), Rational(3, 2), Rational(2), Rational(1, 3)};
  std::uniform_int_distribution<int> pick(0, 4);
  GraphBuilder<Rational> b;
  for (int i = 0; i < n; ++i) b.add_vertex("v" + std::to_string(i));
  std::vector<std::pair<int, int>> used;
  auto has = [&](int u, int v) {
    return std::find(used.begin(), used.end(), std::pair{std::min(u, v), std::max(u, v)}) != used.end();
  };
  for (int i = 1; i < n; ++i) {
    int parent = std::uniform_int_distribution<int>(0, i - 1)(rng);
    b.add_edge(static_cast<VertexId>(i), static_cast<VertexId>(parent), choices[pick(rng)]);
    used.emplace_back(std::min(i, parent), std::max(i, parent));
  }
  std::uniform_int_distribution<int> any(0, n - 1);
  for (int k = 0; k < extra; ++k) {
    int u = any(rng), v = any(rng);
    if (u == v || has(u, v)) continue;
    b.add_edge(static_cast<VertexId>(u), static_cast<VertexId>(v), choices[pick(rng)]);
    used.emplace_back(std::min(u, v), std::max(u, v));
  }
  if (vertex_weights) {
    for (int i = 0; i < n; ++i) {
      if (pick(rng) < 2) b.set_vertex_weight(static_cast<VertexId>(i), choices[pick(rng)]);
    }
  }
  return std::move(b).build(true);
}

/// Random positive rational weights on a grid window.
inline WeightProvider<Rational> random_grid_weights(int n, int rho, std::uint64_t seed) {
  std::unordered_map<GridEdge, Rational, GridEdgeHash> table;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(1, 7), den(1, 4);
  for_each_cube_point(n, rho, [&](const GridPoint& p) {
    for (int i = 0; i < n; ++i) {
      if (p.shifted(i, 1).linf() > rho) continue;
      Rational w(num(rng), den(rng));
      w.canonicalize();
      table.emplace(GridEdge{p, i}, w);
    }
  });
  return WeightProvider<Rational>::table(std::move(table), Rational(1), rho);
}

}  // namespace admgraph::testing
