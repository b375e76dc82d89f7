#pragma once

#include "admgraph/numeric.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace admgraph {

using VertexId = std::uint32_t;

class GraphError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

template <typename Scalar>
class GraphBuilder;

/// Undirected, simple, locally finite graph with positive edge weights and an
/// optional vertex measure. Vertices are dense indices carrying opaque labels.
template <typename Scalar>
class WeightedGraph {
 public:
  struct Neighbor {
    VertexId vertex;
    Scalar weight;
  };

  struct Edge {
    VertexId u;
    VertexId v;
    Scalar weight;
  };

  WeightedGraph() = default;

  std::size_t vertex_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::string& label(VertexId v) const { return labels_.at(v); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<VertexId> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  VertexId at(std::string_view label) const {
    auto v = find(label);
    if (!v) throw GraphError("unknown vertex '" + std::string(label) + "'");
    return *v;
  }

  std::span<const Neighbor> neighbors(VertexId v) const {
    return {adjacency_.data() + offsets_.at(v), adjacency_.data() + offsets_.at(v + 1)};
  }

  std::size_t degree(VertexId v) const { return offsets_.at(v + 1) - offsets_.at(v); }

  /// Canonical edge list: u < v, sorted lexicographically.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  const Scalar& vertex_weight(VertexId v) const { return vertex_weights_.at(v); }
  bool has_vertex_weights() const noexcept { return has_vertex_weights_; }

  std::optional<Scalar> weight(VertexId u, VertexId v) const {
    auto row = neighbors(u);
    auto it = std::lower_bound(row.begin(), row.end(), v,
                               [](const Neighbor& n, VertexId target) { return n.vertex < target; });
    if (it == row.end() || it->vertex != v) return std::nullopt;
    return it->weight;
  }

  bool adjacent(VertexId u, VertexId v) const { return weight(u, v).has_value(); }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.labels_ != b.labels_ || a.edges_.size() != b.edges_.size()) return false;
    if (a.has_vertex_weights_ != b.has_vertex_weights_) return false;
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
      const auto& e = a.edges_[i];
      const auto& f = b.edges_[i];
      if (e.u != f.u || e.v != f.v || !(e.weight == f.weight)) return false;
    }
    for (std::size_t i = 0; i < a.vertex_weights_.size(); ++i) {
      if (!(a.vertex_weights_[i] == b.vertex_weights_[i])) return false;
    }
    return true;
  }

 private:
  friend class GraphBuilder<Scalar>;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<Edge> edges_;
  std::vector<Scalar> vertex_weights_;
  bool has_vertex_weights_ = false;
};

template <typename Scalar>
class GraphBuilder {
 public:
  VertexId add_vertex(std::string label) {
    if (index_.count(label)) throw GraphError("duplicate vertex '" + label + "'");
    auto id = static_cast<VertexId>(labels_.size());
    index_.emplace(label, id);
    labels_.push_back(std::move(label));
    vertex_weights_.push_back(Scalar(1));
    return id;
  }

  VertexId ensure_vertex(const std::string& label) {
    auto it = index_.find(label);
    if (it != index_.end()) return it->second;
    return add_vertex(label);
  }

  std::optional<VertexId> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t vertex_count() const noexcept { return labels_.size(); }

  void add_edge(VertexId u, VertexId v, Scalar weight) {
    pending_.push_back({u, v, std::move(weight)});
  }

  void set_vertex_weight(VertexId v, Scalar m) {
    vertex_weights_.at(v) = std::move(m);
    has_vertex_weights_ = true;
  }

  /// Validates and freezes the graph. Loops, repeated edges, non-positive
  /// weights and (when requested) disconnected inputs are rejected.
  WeightedGraph<Scalar> build(bool require_connected = true) && {
    WeightedGraph<Scalar> g;
    const std::size_t n = labels_.size();
    std::vector<typename WeightedGraph<Scalar>::Edge> edges;
    edges.reserve(pending_.size());
    for (auto& e : pending_) {
      if (e.u >= n || e.v >= n) throw GraphError("edge refers to a missing vertex");
      if (e.u == e.v) throw GraphError("self-loop at '" + labels_[e.u] + "'");
      if (!(e.weight > 0)) {
        throw GraphError("non-positive weight on edge " + labels_[e.u] + "-" + labels_[e.v]);
      }
      if (e.u > e.v) std::swap(e.u, e.v);
      edges.push_back(std::move(e));
    }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
        throw GraphError("repeated edge " + labels_[edges[i].u] + "-" + labels_[edges[i].v]);
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (!(vertex_weights_[v] > 0)) throw GraphError("non-positive vertex weight at '" + labels_[v] + "'");
    }

    std::vector<std::size_t> degree(n, 0);
    for (const auto& e : edges) {
      ++degree[e.u];
      ++degree[e.v];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
    g.adjacency_.resize(g.offsets_[n], {0, Scalar(0)});
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& e : edges) {
      g.adjacency_[fill[e.u]++] = {e.v, e.weight};
      g.adjacency_[fill[e.v]++] = {e.u, e.weight};
    }
    for (std::size_t v = 0; v < n; ++v) {
      std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
                g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]),
                [](const auto& a, const auto& b) { return a.vertex < b.vertex; });
    }
    g.labels_ = std::move(labels_);
    g.index_ = std::move(index_);
    g.edges_ = std::move(edges);
    g.vertex_weights_ = std::move(vertex_weights_);
    g.has_vertex_weights_ = has_vertex_weights_;

    if (require_connected && n > 0) {
      std::vector<char> seen(n, 0);
      std::vector<VertexId> stack{0};
      seen[0] = 1;
      std::size_t reached = 1;
      while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (const auto& nb : g.neighbors(v)) {
          if (!seen[nb.vertex]) {
            seen[nb.vertex] = 1;
            ++reached;
            stack.push_back(nb.vertex);
          }
        }
      }
      if (reached != n) throw GraphError("graph is disconnected");
    }
    return g;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<typename WeightedGraph<Scalar>::Edge> pending_;
  std::vector<Scalar> vertex_weights_;
  bool has_vertex_weights_ = false;
};

inline constexpr int kUnreached = -1;

/// Multi-source BFS. `mask`, when given, restricts the search to the induced
/// subgraph on vertices with a non-zero mask entry. Depth < 0 means unbounded.
template <typename Scalar>
std::vector<int> multi_source_distances(const WeightedGraph<Scalar>& g, std::span<const VertexId> sources,
                                        const std::vector<char>* mask = nullptr, int max_depth = -1) {
  std::vector<int> dist(g.vertex_count(), kUnreached);
  std::deque<VertexId> queue;
  for (VertexId s : sources) {
    if (mask && !(*mask)[s]) continue;
    if (dist[s] == 0) continue;
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    if (max_depth >= 0 && dist[v] >= max_depth) continue;
    for (const auto& nb : g.neighbors(v)) {
      if (dist[nb.vertex] != kUnreached) continue;
      if (mask && !(*mask)[nb.vertex]) continue;
      dist[nb.vertex] = dist[v] + 1;
      queue.push_back(nb.vertex);
    }
  }
  return dist;
}

template <typename Scalar>
std::vector<int> bfs_distances(const WeightedGraph<Scalar>& g, VertexId source, int max_depth = -1) {
  VertexId sources[1] = {source};
  return multi_source_distances(g, std::span<const VertexId>(sources, 1), nullptr, max_depth);
}

template <typename Scalar>
int distance(const WeightedGraph<Scalar>& g, VertexId x, VertexId y) {
  int d = bfs_distances(g, x)[y];
  if (d == kUnreached) throw GraphError("vertices are not connected");
  return d;
}

/// Closed combinatorial ball, sorted by vertex id.
template <typename Scalar>
std::vector<VertexId> ball(const WeightedGraph<Scalar>& g, VertexId x, int radius) {
  if (radius < 0) throw DomainError("negative ball radius");
  auto dist = bfs_distances(g, x, radius);
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (dist[v] != kUnreached) out.push_back(v);
  }
  return out;
}

struct Boundaries {
  std::vector<std::pair<VertexId, VertexId>> edge_boundary;  ///< (inside, outside)
  std::vector<VertexId> vertex_boundary;
  std::vector<VertexId> closure;
};

template <typename Scalar>
Boundaries boundaries(const WeightedGraph<Scalar>& g, std::span<const VertexId> set) {
  std::vector<char> inside(g.vertex_count(), 0);
  for (VertexId v : set) inside.at(v) = 1;
  Boundaries b;
  std::vector<char> outer(g.vertex_count(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!inside[v]) continue;
    for (const auto& nb : g.neighbors(v)) {
      if (inside[nb.vertex]) continue;
      b.edge_boundary.emplace_back(v, nb.vertex);
      outer[nb.vertex] = 1;
    }
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (outer[v]) b.vertex_boundary.push_back(v);
    if (outer[v] || inside[v]) b.closure.push_back(v);
  }
  return b;
}

/// A function defined on a subset of the vertices.
template <typename V>
class PotentialFunction {
 public:
  PotentialFunction() = default;
  explicit PotentialFunction(std::size_t vertex_count) : values_(vertex_count) {}

  void set(VertexId v, V value) { values_.at(v) = std::move(value); }
  bool defined(VertexId v) const { return v < values_.size() && values_[v].has_value(); }

  const V& operator()(VertexId v) const {
    if (!defined(v)) throw DomainError("function undefined at vertex " + std::to_string(v));
    return *values_[v];
  }

  std::vector<VertexId> domain() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < values_.size(); ++v) {
      if (values_[v]) out.push_back(v);
    }
    return out;
  }

  std::size_t capacity() const noexcept { return values_.size(); }

 private:
  std::vector<std::optional<V>> values_;
};

/// Δf(x) = (1/m(x)) Σ_y w(x,y)(f(y) − f(x)).
template <typename Scalar, typename V>
Scalar laplacian(const WeightedGraph<Scalar>& g, const PotentialFunction<V>& f, VertexId x) {
  Scalar fx = Scalar(f(x));
  Scalar sum(0);
  for (const auto& nb : g.neighbors(x)) {
    Scalar diff = Scalar(f(nb.vertex)) - fx;
    sum += nb.weight * diff;
  }
  if (g.has_vertex_weights()) sum /= g.vertex_weight(x);
  return sum;
}

struct LipschitzVerdict {
  bool holds = true;
  std::optional<std::pair<VertexId, VertexId>> violation;
};

/// Checks |f(u) − f(v)| ≤ k·d(u,v) for u, v in `set`, with d the distance of the
/// whole graph. When `set` covers every vertex, checking edges suffices.
template <typename Scalar, typename V>
LipschitzVerdict is_lipschitz(const WeightedGraph<Scalar>& g, const PotentialFunction<V>& f, const V& k,
                              std::span<const VertexId> set) {
  LipschitzVerdict verdict;
  for (VertexId v : set) (void)f(v);
  if (set.size() == g.vertex_count()) {
    for (const auto& e : g.edges()) {
      V diff = f(e.u) > f(e.v) ? V(f(e.u) - f(e.v)) : V(f(e.v) - f(e.u));
      if (diff > k) {
        verdict.holds = false;
        verdict.violation = std::make_pair(e.u, e.v);
        return verdict;
      }
    }
    return verdict;
  }
  if (set.empty()) return verdict;
  V lo = f(set.front());
  V hi = lo;
  for (VertexId v : set) {
    if (f(v) < lo) lo = f(v);
    if (hi < f(v)) hi = f(v);
  }
  std::vector<char> member(g.vertex_count(), 0);
  for (VertexId v : set) member[v] = 1;
  // Pairs further apart than span/k cannot violate the bound.
  int depth = -1;
  if (k > 0) {
    double span = to_double_value(V(hi - lo)) / to_double_value(k);
    depth = static_cast<int>(span) + 1;
  }
  for (VertexId u : set) {
    auto dist = bfs_distances(g, u, depth);
    for (VertexId v : set) {
      if (v <= u) continue;
      V diff = f(u) > f(v) ? V(f(u) - f(v)) : V(f(v) - f(u));
      if (dist[v] == kUnreached) continue;
      if (diff > V(k * V(dist[v]))) {
        verdict.holds = false;
        verdict.violation = std::make_pair(u, v);
        return verdict;
      }
    }
  }
  return verdict;
}

}  // namespace admgraph
