#pragma once

#include "admgraph/rigidity.hpp"
#include "admgraph/torus.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace admgraph {

namespace detail {

inline std::string torus_label(int x, int y) { return "(" + std::to_string(x) + "," + std::to_string(y) + ")"; }

}  // namespace detail

/// The split-vertex counterexample: a side×side unit grid torus whose vertex
/// at the centre is replaced by a and b (measure ½ each). Both are joined to
/// the four former neighbours W, E, S, N with weight ½ and to each other
/// with weight ¼.
template <typename Scalar>
WeightedGraph<Scalar> split_vertex_graph(int side = 8) {
  if (side < 6) throw DomainError("the split-vertex example needs a torus of side at least 6");
  const int c = side / 2;
  auto wrap = [side](int v) { return ((v % side) + side) % side; };
  GraphBuilder<Scalar> b;
  std::vector<VertexId> id(static_cast<std::size_t>(side) * side);
  for (int x = 0; x < side; ++x) {
    for (int y = 0; y < side; ++y) {
      if (x == c && y == c) continue;
      id[x * side + y] = b.add_vertex(detail::torus_label(x, y));
    }
  }
  VertexId a = b.add_vertex("a");
  VertexId bb = b.add_vertex("b");
  for (int x = 0; x < side; ++x) {
    for (int y = 0; y < side; ++y) {
      if (x == c && y == c) continue;
      for (auto [dx, dy] : {std::pair{1, 0}, std::pair{0, 1}}) {
        int nx = wrap(x + dx), ny = wrap(y + dy);
        if (nx == c && ny == c) continue;
        b.add_edge(id[x * side + y], id[nx * side + ny], Scalar(1));
      }
    }
  }
  const Scalar half = Scalar(1) / Scalar(2);
  for (auto [dx, dy] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
    VertexId nb = id[wrap(c + dx) * side + wrap(c + dy)];
    b.add_edge(a, nb, half);
    b.add_edge(bb, nb, half);
  }
  b.add_edge(a, bb, Scalar(1) / Scalar(4));
  b.set_vertex_weight(a, half);
  b.set_vertex_weight(bb, half);
  return std::move(b).build(true);
}

/// The one-dimensional counterexample closed up into a cycle: a unit cycle of
/// `length` positions where one position is split into t and b, each joined
/// to both neighbouring positions with weight ½.
template <typename Scalar>
WeightedGraph<Scalar> split_cycle_graph(int length = 12) {
  if (length < 8) throw DomainError("the split-cycle example needs a cycle of length at least 8");
  GraphBuilder<Scalar> b;
  std::vector<VertexId> id(length);
  for (int i = 1; i < length; ++i) id[i] = b.add_vertex(std::to_string(i));
  VertexId top = b.add_vertex("t");
  VertexId bottom = b.add_vertex("b");
  for (int i = 1; i + 1 < length; ++i) b.add_edge(id[i], id[i + 1], Scalar(1));
  const Scalar half = Scalar(1) / Scalar(2);
  for (VertexId s : {top, bottom}) {
    b.add_edge(s, id[1], half);
    b.add_edge(s, id[length - 1], half);
  }
  return std::move(b).build(true);
}

namespace detail {

/// Opaque labels for the points of Q_r, shuffled deterministically by seed.
inline std::map<GridPoint, std::string> shuffled_core_labels(int n, int r, std::uint64_t seed,
                                                             std::vector<GridPoint>& insertion_order) {
  std::vector<GridPoint> points;
  for_each_cube_point(n, r, [&](const GridPoint& p) { points.push_back(p); });
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> names(points.size());
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = i;
  std::shuffle(names.begin(), names.end(), rng);
  std::map<GridPoint, std::string> label;
  for (std::size_t i = 0; i < points.size(); ++i) label[points[i]] = "k" + std::to_string(names[i]);
  insertion_order = points;
  std::shuffle(insertion_order.begin(), insertion_order.end(), rng);
  return label;
}

}  // namespace detail

/// Z^n with Q_r cut out as the core, core vertices given opaque shuffled
/// labels and inserted in shuffled order. With `perturbed`, the core edge from
/// the origin along e_1 gets that weight instead of 1.
template <typename Scalar>
AsymptoticallyFlatGraph<Scalar> standard_afg(int n, int r, std::optional<int> rho = std::nullopt,
                                             std::uint64_t seed = 1,
                                             std::optional<Scalar> perturbed = std::nullopt) {
  if (perturbed && r < 1) throw DomainError("a perturbed core needs r >= 1");
  AsymptoticallyFlatGraph<Scalar> afg;
  afg.n = n;
  afg.r = r;
  afg.rho = rho.value_or(default_rigidity_radius(r));
  std::vector<GridPoint> order;
  auto label = detail::shuffled_core_labels(n, r, seed, order);
  GraphBuilder<Scalar> b;
  for (const auto& p : order) b.add_vertex(label[p]);
  const GridPoint origin(n);
  for (const auto& [p, name] : label) {
    for (int i = 0; i < n; ++i) {
      GridPoint q = p.shifted(i, 1);
      if (q.linf() > r) continue;
      bool hit = perturbed && i == 0 && p == origin;
      b.add_edge(*b.find(name), *b.find(label[q]), hit ? *perturbed : Scalar(1));
    }
  }
  afg.core = std::move(b).build(true);
  for (const auto& [p, name] : label) {
    if (p.linf() != r) continue;
    for (int i = 0; i < n; ++i) {
      for (int s : {1, -1}) {
        GridPoint q = p.shifted(i, s);
        if (q.linf() == r + 1) afg.interface.push_back({name, q, Scalar(1)});
      }
    }
  }
  return afg;
}

/// The split-vertex example as the core of an asymptotically flat graph: n = 2, r = 0 and
/// K = {a, b} in place of the origin. With `unit_measure` the vertex weights
/// of a and b are dropped, which leaves an m ≡ 1 graph with two vertices
/// forced onto one coordinate tuple.
template <typename Scalar>
AsymptoticallyFlatGraph<Scalar> split_vertex_afg(std::optional<int> rho = std::nullopt, bool unit_measure = false) {
  AsymptoticallyFlatGraph<Scalar> afg;
  afg.n = 2;
  afg.r = 0;
  afg.rho = rho.value_or(default_rigidity_radius(0));
  GraphBuilder<Scalar> b;
  VertexId a = b.add_vertex("a");
  VertexId bb = b.add_vertex("b");
  b.add_edge(a, bb, Scalar(1) / Scalar(4));
  if (!unit_measure) {
    b.set_vertex_weight(a, Scalar(1) / Scalar(2));
    b.set_vertex_weight(bb, Scalar(1) / Scalar(2));
  }
  afg.core = std::move(b).build(true);
  const Scalar half = Scalar(1) / Scalar(2);
  for (const GridPoint& q : {GridPoint{-1, 0}, GridPoint{1, 0}, GridPoint{0, -1}, GridPoint{0, 1}}) {
    afg.interface.push_back({"a", q, half});
    afg.interface.push_back({"b", q, half});
  }
  return afg;
}

/// The two-dimensional torus with A = [[2, 1], [−1, 3]] (det 7).
inline TorusSpec det7_torus_spec(long k = 1) {
  TorusSpec spec;
  spec.A = {{2, 1}, {-1, 3}};
  spec.k = k;
  return spec;
}

inline TorusSpec identity_torus_spec(int n, long k) {
  TorusSpec spec;
  spec.A.assign(n, std::vector<long>(n, 0));
  for (int i = 0; i < n; ++i) spec.A[i][i] = 1;
  spec.k = k;
  return spec;
}

/// Vertex names A..G of the det-7 torus, keyed by representative.
inline std::string det7_torus_name(const GridPoint& rep) {
  static const std::vector<std::pair<GridPoint, std::string>> names = {
      {GridPoint{0, 0}, "A"}, {GridPoint{1, 3}, "B"}, {GridPoint{2, 6}, "C"}, {GridPoint{3, 2}, "D"},
      {GridPoint{4, 5}, "E"}, {GridPoint{5, 1}, "F"}, {GridPoint{6, 4}, "G"}};
  for (const auto& [p, name] : names) {
    if (p == rep) return name;
  }
  throw DomainError("point " + rep.to_string() + " is not a vertex of the det-7 torus");
}

}  // namespace admgraph
