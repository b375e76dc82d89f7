#pragma once

#include "admgraph/graph.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace admgraph {

/// V = X ⊔ Y ⊔ K with no edge between X and Y.
struct SalamiPartition {
  std::vector<VertexId> X;
  std::vector<VertexId> Y;
  std::vector<VertexId> K;
};

namespace detail {

enum class Side : char { none = 0, x = 1, y = 2, k = 3 };

template <typename Scalar>
std::vector<Side> partition_sides(const WeightedGraph<Scalar>& g, const SalamiPartition& p,
                                  const std::vector<char>* mask) {
  std::vector<Side> side(g.vertex_count(), Side::none);
  auto assign = [&](const std::vector<VertexId>& part, Side s) {
    for (VertexId v : part) {
      if (v >= g.vertex_count()) throw DomainError("partition refers to a missing vertex");
      if (side[v] != Side::none) throw DomainError("partition parts overlap at '" + g.label(v) + "'");
      side[v] = s;
    }
  };
  assign(p.X, Side::x);
  assign(p.Y, Side::y);
  assign(p.K, Side::k);
  if (p.K.empty()) throw DomainError("the separating set K is empty");
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    bool active = !mask || (*mask)[v];
    if (active && side[v] == Side::none) throw DomainError("vertex '" + g.label(v) + "' is in no part");
    if (!active && side[v] != Side::none) throw DomainError("partition uses a vertex outside the subgraph");
  }
  for (const auto& e : g.edges()) {
    if (mask && (!(*mask)[e.u] || !(*mask)[e.v])) continue;
    if ((side[e.u] == Side::x && side[e.v] == Side::y) || (side[e.u] == Side::y && side[e.v] == Side::x)) {
      throw DomainError("edge " + g.label(e.u) + "-" + g.label(e.v) + " joins X and Y");
    }
  }
  return side;
}

}  // namespace detail

/// Checks the partition invariants; throws DomainError on failure.
template <typename Scalar>
void validate_partition(const WeightedGraph<Scalar>& g, const SalamiPartition& p,
                        const std::vector<char>* mask = nullptr) {
  (void)detail::partition_sides(g, p, mask);
}

/// The extremal 1-Lipschitz extension Sf: f on K, the smallest extension
/// sup_{w∈K} f(w) − d(v,w) on X and the largest inf_{w∈K} f(w) + d(v,w) on Y.
/// Distances are taken in the (optionally masked) graph. f must be
/// 1-Lipschitz on K for those distances.
template <typename Scalar, typename V>
PotentialFunction<V> extremal_extension(const WeightedGraph<Scalar>& g, const SalamiPartition& p,
                                        const PotentialFunction<V>& f, const std::vector<char>* mask = nullptr) {
  auto side = detail::partition_sides(g, p, mask);
  for (VertexId v : p.K) {
    if (!f.defined(v)) throw DomainError("f is undefined at '" + g.label(v) + "' in K");
  }
  // Group K by value: sup_w f(w) − d(v,w) = max_c (c − d(v, K_c)).
  std::map<V, std::vector<VertexId>> levels;
  for (VertexId v : p.K) levels[f(v)].push_back(v);
  std::vector<std::pair<V, std::vector<int>>> dist;
  for (const auto& [value, verts] : levels) {
    dist.emplace_back(value, multi_source_distances(g, std::span<const VertexId>(verts), mask));
  }
  for (std::size_t a = 0; a < dist.size(); ++a) {
    for (VertexId u : levels[dist[a].first]) {
      for (std::size_t b = a + 1; b < dist.size(); ++b) {
        int d = dist[b].second[u];
        if (d == kUnreached) continue;
        if (V(dist[b].first - dist[a].first) > V(d)) {
          throw DomainError("f is not 1-Lipschitz on K near '" + g.label(u) + "'");
        }
      }
    }
  }
  PotentialFunction<V> out(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (side[v] == detail::Side::none) continue;
    if (side[v] == detail::Side::k) {
      out.set(v, f(v));
      continue;
    }
    std::optional<V> best;
    for (const auto& [value, d] : dist) {
      if (d[v] == kUnreached) continue;
      V candidate = side[v] == detail::Side::x ? V(value - V(d[v])) : V(value + V(d[v]));
      if (!best || (side[v] == detail::Side::x ? *best < candidate : candidate < *best)) best = candidate;
    }
    if (!best) throw DomainError("vertex '" + g.label(v) + "' cannot reach K");
    out.set(v, *best);
  }
  return out;
}

struct PropagationReport {
  bool harmonic_on_core = true;   ///< Δ(Sf) = 0 on K
  bool propagation_holds = true;  ///< no violation away from the truncation boundary
  std::vector<VertexId> violations;
  std::vector<VertexId> truncation_artifacts;
  std::vector<VertexId> pinned;
};

/// Whether harmonicity on K propagates to every vertex. Vertices closer than
/// `pin_width` to the truncation `boundary` are pinned and skipped; failures
/// within two further steps of it are classed as truncation artifacts.
template <typename Scalar, typename V>
PropagationReport harmonicity_propagation_check(const WeightedGraph<Scalar>& g, const SalamiPartition& p,
                                                const PotentialFunction<V>& sf,
                                                const std::vector<VertexId>& boundary, int pin_width = 2,
                                                double epsilon = 1e-9) {
  PropagationReport rep;
  auto side = detail::partition_sides(g, p, nullptr);
  auto to_boundary = multi_source_distances(g, std::span<const VertexId>(boundary));
  auto pinned = [&](VertexId v) { return to_boundary[v] != kUnreached && to_boundary[v] < pin_width; };
  for (VertexId v : p.K) {
    if (pinned(v)) continue;
    if (sign_of(laplacian(g, sf, v), epsilon) != 0) rep.harmonic_on_core = false;
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (pinned(v)) {
      rep.pinned.push_back(v);
      continue;
    }
    if (side[v] == detail::Side::k) continue;
    if (sign_of(laplacian(g, sf, v), epsilon) == 0) continue;
    if (to_boundary[v] != kUnreached && to_boundary[v] <= pin_width + 1) {
      rep.truncation_artifacts.push_back(v);
    } else {
      rep.violations.push_back(v);
    }
  }
  rep.propagation_holds = !rep.harmonic_on_core || rep.violations.empty();
  return rep;
}

}  // namespace admgraph
