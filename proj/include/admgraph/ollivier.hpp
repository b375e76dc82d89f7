#pragma once

#include "admgraph/graph.hpp"
#include "admgraph/parallel.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace admgraph {

/// Search controls for the exact curvature enumeration.
struct EnumerationOptions {
  bool propagate = true;  ///< narrow value ranges of unassigned vertices
  bool bound = true;      ///< branch-and-bound on the linear objective
  std::uint64_t node_budget = 20'000'000;
};

template <typename Scalar>
struct CurvatureResult {
  VertexId x = 0;
  VertexId y = 0;
  Scalar kappa{};
  std::vector<VertexId> domain;    ///< B1(x) ∪ B1(y), sorted
  PotentialFunction<int> witness;  ///< minimizer over the domain
  std::uint64_t nodes = 0;
};

namespace detail {

inline constexpr int kMinValue = -1;
inline constexpr int kMaxValue = 2;

struct CurvatureProblem {
  std::vector<VertexId> domain;
  std::vector<VertexId> free;  ///< domain without x and y, ascending
  std::vector<int> lo;
  std::vector<int> hi;
  /// For each free index a: (b, d(a,b)) for b > a with d ≤ 2.
  std::vector<std::vector<std::pair<int, int>>> forward;
  /// For each free index b: (a, d(a,b)) for a < b with d ≤ 2.
  std::vector<std::vector<std::pair<int, int>>> backward;
};

template <typename Scalar>
CurvatureProblem make_problem(const WeightedGraph<Scalar>& g, VertexId x, VertexId y) {
  CurvatureProblem p;
  std::vector<char> in(g.vertex_count(), 0);
  auto add = [&](VertexId v) {
    if (!in[v]) {
      in[v] = 1;
      p.domain.push_back(v);
    }
  };
  add(x);
  add(y);
  for (const auto& nb : g.neighbors(x)) add(nb.vertex);
  for (const auto& nb : g.neighbors(y)) add(nb.vertex);
  std::sort(p.domain.begin(), p.domain.end());
  for (VertexId v : p.domain) {
    if (v != x && v != y) p.free.push_back(v);
  }
  const std::size_t k = p.free.size();
  p.lo.resize(k);
  p.hi.resize(k);
  p.forward.resize(k);
  p.backward.resize(k);
  std::vector<int> slot(g.vertex_count(), -1);
  for (std::size_t i = 0; i < k; ++i) slot[p.free[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < k; ++i) {
    VertexId v = p.free[i];
    int dx = g.adjacent(v, x) ? 1 : 2;
    int dy = g.adjacent(v, y) ? 1 : 2;
    p.lo[i] = std::max({kMinValue, -dx, 1 - dy});
    p.hi[i] = std::min({kMaxValue, dx, 1 + dy});
    // Values span at most 3, so only pairs at distance ≤ 2 constrain anything.
    auto dist = bfs_distances(g, v, 2);
    for (std::size_t j = i + 1; j < k; ++j) {
      int d = dist[p.free[j]];
      if (d != kUnreached) {
        p.forward[i].emplace_back(static_cast<int>(j), d);
        p.backward[j].emplace_back(static_cast<int>(i), d);
      }
    }
  }
  return p;
}

/// Depth-first minimisation of Σ c_i f_i over the 1-Lipschitz assignments.
/// Values are tried in ascending order and only strict improvements replace
/// the incumbent, so the lexicographically smallest minimiser is returned.
template <typename Obj>
class LinearMinimizer {
 public:
  LinearMinimizer(const CurvatureProblem& p, std::vector<Obj> coeffs, const EnumerationOptions& opts)
      : p_(p), c_(std::move(coeffs)), opts_(opts), lo_(p.lo), hi_(p.hi), value_(p.free.size(), 0) {}

  bool run() {
    for (std::size_t i = 0; i < lo_.size(); ++i) {
      if (lo_[i] > hi_[i]) return false;
    }
    dfs(0, Obj(0));
    return found_;
  }

  const Obj& best() const { return best_; }
  const std::vector<int>& best_assignment() const { return best_assignment_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  Obj lower_bound_from(std::size_t k) const {
    Obj lb(0);
    for (std::size_t j = k; j < c_.size(); ++j) {
      lb += c_[j] > Obj(0) ? Obj(c_[j] * Obj(lo_[j])) : Obj(c_[j] * Obj(hi_[j]));
    }
    return lb;
  }

  void dfs(std::size_t k, const Obj& partial) {
    if (++nodes_ > opts_.node_budget) {
      throw BudgetExceeded("curvature enumeration exceeded " + std::to_string(opts_.node_budget) + " nodes");
    }
    if (k == c_.size()) {
      if (!found_ || partial < best_) {
        found_ = true;
        best_ = partial;
        best_assignment_ = value_;
      }
      return;
    }
    for (int val = lo_[k]; val <= hi_[k]; ++val) {
      if (!opts_.propagate) {
        bool ok = true;
        for (const auto& [a, d] : p_.backward[k]) {
          int diff = value_[a] - val;
          if (diff > d || -diff > d) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
      }
      value_[k] = val;
      std::vector<std::array<int, 3>> undo;
      bool feasible = true;
      if (opts_.propagate) {
        for (const auto& [b, d] : p_.forward[k]) {
          int nlo = std::max(lo_[b], val - d);
          int nhi = std::min(hi_[b], val + d);
          if (nlo != lo_[b] || nhi != hi_[b]) {
            undo.push_back({b, lo_[b], hi_[b]});
            lo_[b] = nlo;
            hi_[b] = nhi;
          }
          if (nlo > nhi) {
            feasible = false;
            break;
          }
        }
      }
      if (feasible) {
        Obj next = partial + Obj(c_[k] * Obj(val));
        bool prune = false;
        if (opts_.bound && found_) {
          Obj lb = next + lower_bound_from(k + 1);
          prune = best_ < lb;
        }
        if (!prune) dfs(k + 1, next);
      }
      for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
        lo_[(*it)[0]] = (*it)[1];
        hi_[(*it)[0]] = (*it)[2];
      }
    }
  }

  const CurvatureProblem& p_;
  std::vector<Obj> c_;
  EnumerationOptions opts_;
  std::vector<int> lo_;
  std::vector<int> hi_;
  std::vector<int> value_;
  bool found_ = false;
  Obj best_{};
  std::vector<int> best_assignment_;
  std::uint64_t nodes_ = 0;
};

template <typename Obj>
std::pair<std::vector<int>, std::uint64_t> minimise(const CurvatureProblem& p, std::vector<Obj> coeffs,
                                                    const EnumerationOptions& opts) {
  LinearMinimizer<Obj> m(p, std::move(coeffs), opts);
  if (!m.run()) throw Error("no admissible test function (internal inconsistency)");
  return {m.best_assignment(), m.nodes()};
}

}  // namespace detail

/// ∇_{xy}Δf = Δf(x) − Δf(y).
template <typename Scalar, typename V>
Scalar gradient_of_laplacian(const WeightedGraph<Scalar>& g, const PotentialFunction<V>& f, VertexId x,
                             VertexId y) {
  return laplacian(g, f, x) - laplacian(g, f, y);
}

/// Exact Ollivier curvature of the edge {x, y} in its limit-free form: the
/// minimum of ∇_{xy}Δf over integer f on B1(x) ∪ B1(y) with f(x) = 0,
/// f(y) = 1 and f 1-Lipschitz for the distance of the whole graph.
template <typename Scalar>
CurvatureResult<Scalar> edge_curvature(const WeightedGraph<Scalar>& g, VertexId x, VertexId y,
                                       const EnumerationOptions& opts = {}) {
  if (!g.adjacent(x, y)) {
    throw DomainError("not an edge: " + g.label(x) + "-" + g.label(y));
  }
  auto p = detail::make_problem(g, x, y);
  const std::size_t k = p.free.size();

  // Δf(x) − Δf(y) = constant + Σ_v c_v f(v) once f(x) = 0 and f(y) = 1.
  Scalar inv_mx = g.has_vertex_weights() ? Scalar(Scalar(1) / g.vertex_weight(x)) : Scalar(1);
  Scalar inv_my = g.has_vertex_weights() ? Scalar(Scalar(1) / g.vertex_weight(y)) : Scalar(1);
  std::vector<Scalar> coeffs(k, Scalar(0));
  std::vector<int> slot(g.vertex_count(), -1);
  for (std::size_t i = 0; i < k; ++i) slot[p.free[i]] = static_cast<int>(i);
  Scalar constant(0);
  for (const auto& nb : g.neighbors(x)) {
    if (nb.vertex == y) {
      constant += nb.weight * inv_mx;
    } else {
      coeffs[slot[nb.vertex]] += nb.weight * inv_mx;
    }
  }
  for (const auto& nb : g.neighbors(y)) {
    constant += nb.weight * inv_my;
    if (nb.vertex != x) coeffs[slot[nb.vertex]] -= nb.weight * inv_my;
  }

  std::vector<int> assignment;
  std::uint64_t nodes = 0;
  if constexpr (is_exact_v<Scalar>) {
    // Integer search after clearing denominators, when the scale is modest.
    mpz_class scale = 1;
    for (const auto& c : coeffs) mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), c.get_den_mpz_t());
    std::vector<std::int64_t> ints(k);
    bool fits = true;
    mpz_class total = 0;
    for (std::size_t i = 0; i < k && fits; ++i) {
      Rational scaled = coeffs[i] * Rational(scale);
      mpz_class v = scaled.get_num();
      total += abs(v);
      if (!v.fits_slong_p()) fits = false;
      else ints[i] = v.get_si();
    }
    if (fits && total < mpz_class(std::numeric_limits<std::int64_t>::max() / 8)) {
      std::tie(assignment, nodes) = detail::minimise<std::int64_t>(p, std::move(ints), opts);
    } else {
      std::tie(assignment, nodes) = detail::minimise<Scalar>(p, coeffs, opts);
    }
  } else {
    std::tie(assignment, nodes) = detail::minimise<Scalar>(p, coeffs, opts);
  }

  CurvatureResult<Scalar> result;
  result.x = x;
  result.y = y;
  result.domain = p.domain;
  result.witness = PotentialFunction<int>(g.vertex_count());
  result.witness.set(x, 0);
  result.witness.set(y, 1);
  Scalar kappa = constant;
  for (std::size_t i = 0; i < k; ++i) {
    result.witness.set(p.free[i], assignment[i]);
    kappa += coeffs[i] * Scalar(assignment[i]);
  }
  result.kappa = kappa;
  result.nodes = nodes;
  return result;
}

template <typename Scalar>
Scalar edge_kappa(const WeightedGraph<Scalar>& g, VertexId x, VertexId y, const EnumerationOptions& opts = {}) {
  return edge_curvature(g, x, y, opts).kappa;
}

/// R(x) = Σ_{y~x} κ(x,y).
template <typename Scalar>
Scalar scalar_curvature(const WeightedGraph<Scalar>& g, VertexId x, const EnumerationOptions& opts = {}) {
  Scalar sum(0);
  for (const auto& nb : g.neighbors(x)) sum += edge_kappa(g, x, nb.vertex, opts);
  return sum;
}

template <typename Scalar>
struct EdgeCurvatureOutcome {
  VertexId u = 0;
  VertexId v = 0;
  std::optional<Scalar> kappa;
  std::string error;  ///< set when the edge could not be evaluated
};

/// Curvature of every edge in canonical order. Edges whose search exceeds the
/// budget are reported individually and do not abort the others.
template <typename Scalar>
std::vector<EdgeCurvatureOutcome<Scalar>> all_edge_curvatures(const WeightedGraph<Scalar>& g,
                                                              const EnumerationOptions& opts = {},
                                                              unsigned jobs = 1) {
  const auto& edges = g.edges();
  std::vector<EdgeCurvatureOutcome<Scalar>> out(edges.size());
  parallel_for(edges.size(), jobs, [&](std::size_t i) {
    out[i].u = edges[i].u;
    out[i].v = edges[i].v;
    try {
      out[i].kappa = edge_kappa(g, edges[i].u, edges[i].v, opts);
    } catch (const BudgetExceeded& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

/// Scalar curvature at every vertex from one pass over the edges.
template <typename Scalar>
std::vector<Scalar> all_scalar_curvatures(const WeightedGraph<Scalar>& g, const EnumerationOptions& opts = {},
                                          unsigned jobs = 1) {
  auto kappas = all_edge_curvatures(g, opts, jobs);
  std::vector<Scalar> r(g.vertex_count(), Scalar(0));
  for (const auto& o : kappas) {
    if (!o.kappa) throw BudgetExceeded(o.error);
    r[o.u] += *o.kappa;
    r[o.v] += *o.kappa;
  }
  return r;
}

}  // namespace admgraph
