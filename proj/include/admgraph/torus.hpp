#pragma once

#include "admgraph/grid.hpp"
#include "admgraph/ollivier.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace admgraph {

class DegenerateQuotient : public Error {
 public:
  using Error::Error;
};

/// T_A = AZ^n / qZ^n with q = k·|det A|; the columns α_i of A are the steps.
struct TorusSpec {
  std::vector<std::vector<long>> A;  ///< row-major n×n
  long k = 1;

  int dimension() const { return static_cast<int>(A.size()); }

  long determinant() const {
    const int n = dimension();
    // Bareiss elimination keeps every intermediate integral.
    std::vector<std::vector<long long>> m(n, std::vector<long long>(n));
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(A[i].size()) != n) throw DomainError("matrix A must be square");
      for (int j = 0; j < n; ++j) m[i][j] = A[i][j];
    }
    long long sign = 1, prev = 1;
    for (int c = 0; c < n; ++c) {
      int pivot = c;
      while (pivot < n && m[pivot][c] == 0) ++pivot;
      if (pivot == n) return 0;
      if (pivot != c) {
        std::swap(m[pivot], m[c]);
        sign = -sign;
      }
      for (int i = c + 1; i < n; ++i) {
        for (int j = c + 1; j < n; ++j) m[i][j] = (m[i][j] * m[c][c] - m[i][c] * m[c][j]) / prev;
      }
      prev = m[c][c];
    }
    return static_cast<long>(sign * m[n - 1][n - 1]);
  }

  long modulus() const {
    long d = determinant();
    return k * (d < 0 ? -d : d);
  }

  /// Column α_i of A.
  GridPoint column(int i) const {
    GridPoint p(dimension());
    for (int r = 0; r < dimension(); ++r) p[r] = static_cast<int>(A[r][i]);
    return p;
  }

  void validate() const {
    const int n = dimension();
    if (n < 1 || n > kMaxDimension) throw DomainError("unsupported torus dimension");
    for (const auto& row : A) {
      if (static_cast<int>(row.size()) != n) throw DomainError("matrix A must be square");
    }
    if (k < 1) throw DomainError("k must be a positive integer");
    if (determinant() == 0) throw DomainError("matrix A is singular");
  }
};

/// Torus weight entry: the edge [x] ~ [x + α_dir], x given by any lift.
template <typename Scalar>
struct TorusWeight {
  GridPoint x;
  int dir = 0;
  Scalar w;
};

template <typename Scalar>
class TorusGraph;

template <typename Scalar>
TorusGraph<Scalar> build_torus(const TorusSpec& spec, const std::vector<TorusWeight<Scalar>>& weights = {});

template <typename Scalar>
class TorusGraph {
 public:
  const TorusSpec& spec() const noexcept { return spec_; }
  const WeightedGraph<Scalar>& graph() const noexcept { return graph_; }
  long modulus() const noexcept { return q_; }
  int dimension() const noexcept { return spec_.dimension(); }

  /// Canonical representative of vertex v, coordinates in [0, q).
  const GridPoint& representative(VertexId v) const { return reps_.at(v); }

  GridPoint reduce(GridPoint p) const {
    for (int i = 0; i < p.dim; ++i) {
      long c = p[i] % q_;
      if (c < 0) c += q_;
      p[i] = static_cast<int>(c);
    }
    return p;
  }

  std::optional<VertexId> find(const GridPoint& lift) const {
    auto it = index_.find(reduce(lift));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  VertexId vertex_of(const GridPoint& lift) const {
    auto v = find(lift);
    if (!v) throw DomainError("point " + lift.to_string() + " is not in the lattice AZ^n");
    return *v;
  }

  /// Vertex [x + sign·α_dir].
  VertexId step(VertexId v, int dir, int sign) const {
    return steps_[v][2 * dir + (sign > 0 ? 0 : 1)];
  }

  /// Weight of {[x], [x + sign·α_dir]}.
  const Scalar& step_weight(VertexId v, int dir, int sign) const {
    return sign > 0 ? forward_[v][dir] : forward_[step(v, dir, -1)][dir];
  }

  /// q^n / |det A|.
  long vertex_count_expected() const {
    long c = 1;
    for (int i = 0; i < dimension(); ++i) c *= q_;
    long d = spec_.determinant();
    return c / (d < 0 ? -d : d);
  }

  /// k^n |det A|, the count quoted alongside the construction.
  long vertex_count_quoted() const {
    long c = 1;
    for (int i = 0; i < dimension(); ++i) c *= spec_.k;
    long d = spec_.determinant();
    return c * (d < 0 ? -d : d);
  }

  template <typename S>
  friend TorusGraph<S> build_torus(const TorusSpec& spec, const std::vector<TorusWeight<S>>& weights);

 private:
  TorusSpec spec_;
  long q_ = 0;
  std::vector<GridPoint> reps_;
  std::unordered_map<GridPoint, VertexId, GridPointHash> index_;
  std::vector<std::vector<VertexId>> steps_;
  std::vector<std::vector<Scalar>> forward_;
  WeightedGraph<Scalar> graph_;
};

/// Builds the quotient graph. Quotients where some step closes a loop or two
/// steps from one vertex land on the same class are rejected; weights given
/// for the same edge through different lifts must agree; unlisted edges get 1.
template <typename Scalar>
TorusGraph<Scalar> build_torus(const TorusSpec& spec, const std::vector<TorusWeight<Scalar>>& weights) {
  spec.validate();
  TorusGraph<Scalar> t;
  t.spec_ = spec;
  t.q_ = spec.modulus();
  const int n = spec.dimension();
  std::vector<GridPoint> alpha;
  for (int i = 0; i < n; ++i) alpha.push_back(spec.column(i));

  // The lattice is generated by the columns, so their orbit is every class.
  std::vector<GridPoint> found{t.reduce(GridPoint(n))};
  std::unordered_map<GridPoint, char, GridPointHash> seen{{found.front(), 1}};
  for (std::size_t head = 0; head < found.size(); ++head) {
    for (int i = 0; i < n; ++i) {
      for (int s : {1, -1}) {
        GridPoint p = found[head];
        for (int c = 0; c < n; ++c) p[c] += s * alpha[i][c];
        p = t.reduce(p);
        if (seen.emplace(p, 1).second) found.push_back(p);
      }
    }
  }
  std::sort(found.begin(), found.end());
  if (static_cast<long>(found.size()) != t.vertex_count_expected()) {
    throw Error("internal: torus vertex count mismatch");
  }
  t.reps_ = found;
  for (VertexId v = 0; v < found.size(); ++v) t.index_.emplace(found[v], v);

  t.steps_.assign(found.size(), std::vector<VertexId>(2 * n));
  for (VertexId v = 0; v < found.size(); ++v) {
    for (int i = 0; i < n; ++i) {
      for (int s : {1, -1}) {
        GridPoint p = found[v];
        for (int c = 0; c < n; ++c) p[c] += s * alpha[i][c];
        t.steps_[v][2 * i + (s > 0 ? 0 : 1)] = t.index_.at(t.reduce(p));
      }
    }
    std::vector<VertexId> nb = t.steps_[v];
    for (VertexId u : nb) {
      if (u == v) throw DegenerateQuotient("a step closes a loop at " + found[v].to_string());
    }
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end()) {
      throw DegenerateQuotient("two steps from " + found[v].to_string() + " reach the same vertex");
    }
  }

  t.forward_.assign(found.size(), std::vector<Scalar>(n, Scalar(1)));
  std::map<std::pair<VertexId, int>, Scalar> assigned;
  for (const auto& entry : weights) {
    if (entry.x.dim != n || entry.dir < 0 || entry.dir >= n) throw DomainError("malformed torus weight entry");
    VertexId v = t.vertex_of(entry.x);
    auto key = std::make_pair(v, entry.dir);
    auto [it, inserted] = assigned.emplace(key, entry.w);
    if (!inserted && !(it->second == entry.w)) {
      throw DomainError("weight assignment inconsistent across lifts at " + found[v].to_string());
    }
    t.forward_[v][entry.dir] = entry.w;
  }

  GraphBuilder<Scalar> b;
  for (const auto& p : found) b.add_vertex(p.to_string());
  for (VertexId v = 0; v < found.size(); ++v) {
    for (int i = 0; i < n; ++i) b.add_edge(v, t.steps_[v][2 * i], t.forward_[v][i]);
  }
  t.graph_ = std::move(b).build();
  return t;
}

struct DistanceViolation {
  VertexId center = 0;
  GridPoint u;  ///< lattice offsets (coefficients in the basis α)
  GridPoint v;
  int lattice_distance = 0;
  int torus_distance = 0;
};

struct DistanceConditionResult {
  bool holds = true;
  std::optional<DistanceViolation> violation;
};

namespace detail {

/// Coefficient vectors z with ‖z‖₁ ≤ radius.
inline std::vector<GridPoint> l1_ball(int n, int radius) {
  std::vector<GridPoint> out;
  for_each_cube_point(n, radius, [&](const GridPoint& z) {
    if (z.l1() <= radius) out.push_back(z);
  });
  return out;
}

template <typename Scalar>
VertexId offset_vertex(const TorusGraph<Scalar>& t, VertexId base, const GridPoint& z) {
  VertexId v = base;
  for (int i = 0; i < z.dim; ++i) {
    for (int c = 0; c < std::abs(z[i]); ++c) v = t.step(v, i, z[i] > 0 ? 1 : -1);
  }
  return v;
}

/// Compares lattice and torus distances for all pairs of a set of offsets.
/// z ↦ Az is an isomorphism from Z^n onto the lattice graph, so lattice
/// distances are ℓ¹ distances of coefficient vectors.
template <typename Scalar>
std::optional<DistanceViolation> compare_distances(const TorusGraph<Scalar>& t, VertexId base,
                                                   const std::vector<GridPoint>& offsets) {
  std::vector<VertexId> verts;
  for (const auto& z : offsets) verts.push_back(offset_vertex(t, base, z));
  int depth = 0;
  for (const auto& a : offsets) {
    for (const auto& b : offsets) {
      int d = 0;
      for (int i = 0; i < a.dim; ++i) d += std::abs(a[i] - b[i]);
      depth = std::max(depth, d);
    }
  }
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    auto dist = bfs_distances(t.graph(), verts[i], depth);
    for (std::size_t j = i + 1; j < offsets.size(); ++j) {
      int lattice = 0;
      for (int c = 0; c < offsets[i].dim; ++c) lattice += std::abs(offsets[i][c] - offsets[j][c]);
      int torus = dist[verts[j]] == kUnreached ? depth + 1 : dist[verts[j]];
      if (torus != lattice) return DistanceViolation{base, offsets[i], offsets[j], lattice, torus};
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// d_{T_A}([u],[v]) = d_{AZ^n}(u,v) for all u, v in B_2(x) and every x.
template <typename Scalar>
DistanceConditionResult distance_condition(const TorusGraph<Scalar>& t) {
  DistanceConditionResult r;
  auto offsets = detail::l1_ball(t.dimension(), 2);
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    if (auto bad = detail::compare_distances(t, v, offsets)) {
      r.holds = false;
      r.violation = bad;
      return r;
    }
  }
  return r;
}

/// The edge-local form: lattice and torus distances agree on B_1(x) ∪ B_1(y)
/// for the edge y = x + sign·α_dir. This is what the closed form needs.
template <typename Scalar>
DistanceConditionResult edge_distance_condition(const TorusGraph<Scalar>& t, VertexId x, int dir, int sign) {
  const int n = t.dimension();
  std::vector<GridPoint> offsets;
  GridPoint y(n);
  y[dir] = sign;
  offsets.push_back(GridPoint(n));
  offsets.push_back(y);
  for (const GridPoint& c : {GridPoint(n), y}) {
    for (int i = 0; i < n; ++i) {
      for (int s : {1, -1}) {
        GridPoint p = c.shifted(i, s);
        if (std::find(offsets.begin(), offsets.end(), p) == offsets.end()) offsets.push_back(p);
      }
    }
  }
  DistanceConditionResult r;
  if (auto bad = detail::compare_distances(t, x, offsets)) {
    r.holds = false;
    r.violation = bad;
  }
  return r;
}

template <typename Scalar>
struct TorusKappa {
  Scalar kappa{};
  bool closed_form = true;  ///< false when the brute-force fallback was used
  Scalar linear{};          ///< 2w(x,y) − w(x, x−α) − w(y, y+α), closed form only
  Scalar abs_part{};        ///< the sum of |parallel differences|, closed form only
};

/// κ([x],[x + sign·α_dir]). Uses the lattice closed form when the edge-local
/// distance condition holds, and exhaustive search otherwise.
template <typename Scalar>
TorusKappa<Scalar> torus_kappa(const TorusGraph<Scalar>& t, VertexId x, int dir, int sign,
                               const EnumerationOptions& opts = {}) {
  TorusKappa<Scalar> out;
  VertexId y = t.step(x, dir, sign);
  if (!edge_distance_condition(t, x, dir, sign).holds) {
    out.closed_form = false;
    out.kappa = edge_kappa(t.graph(), x, y, opts);
    return out;
  }
  out.linear = Scalar(2) * t.step_weight(x, dir, sign) - t.step_weight(x, dir, -sign) - t.step_weight(y, dir, sign);
  out.abs_part = Scalar(0);
  for (int j = 0; j < t.dimension(); ++j) {
    if (j == dir) continue;
    for (int s : {1, -1}) out.abs_part += abs_value(Scalar(t.step_weight(x, j, s) - t.step_weight(y, j, s)));
  }
  out.kappa = out.linear - out.abs_part;
  return out;
}

template <typename Scalar>
struct CycleSum {
  Scalar sum{};
  Scalar linear{};    ///< telescopes to zero when every edge used the closed form
  Scalar abs_part{};  ///< sum ≡ linear − abs_part
  bool closed_form = true;
  long length = 0;         ///< q
  long minimal_period = 0; ///< r_i
};

/// S_i([x]) = Σ_{j=0}^{q−1} κ([x + jα_i], [x + (j+1)α_i]).
template <typename Scalar>
CycleSum<Scalar> cycle_sum(const TorusGraph<Scalar>& t, VertexId x, int dir, const EnumerationOptions& opts = {}) {
  CycleSum<Scalar> c;
  c.length = t.modulus();
  c.sum = c.linear = c.abs_part = Scalar(0);
  VertexId v = x;
  for (long j = 0; j < c.length; ++j) {
    auto k = torus_kappa(t, v, dir, 1, opts);
    c.sum += k.kappa;
    if (k.closed_form) {
      c.linear += k.linear;
      c.abs_part += k.abs_part;
    } else {
      c.closed_form = false;
    }
    v = t.step(v, dir, 1);
    if (c.minimal_period == 0 && v == x) c.minimal_period = j + 1;
  }
  if (v != x) throw Error("internal: cycle does not close after q steps");
  return c;
}

template <typename Scalar>
struct TorusTotal {
  std::vector<Scalar> scalar;  ///< R([x]) per vertex
  Scalar total{};              ///< Σ R
  std::vector<Scalar> direction_totals;  ///< Σ_{[x]} S_i([x]) per direction i
  Scalar decomposed{};         ///< 2 Σ_i Σ_{[x]} S_i([x]) / q
  bool all_closed_form = true;
  bool distance_condition = false;
};

/// Total scalar curvature and its decomposition into cycle sums.
template <typename Scalar>
TorusTotal<Scalar> total_scalar_curvature(const TorusGraph<Scalar>& t, const EnumerationOptions& opts = {}) {
  const auto& g = t.graph();
  const int n = t.dimension();
  TorusTotal<Scalar> out;
  out.distance_condition = distance_condition(t).holds;
  out.scalar.assign(g.vertex_count(), Scalar(0));
  // κ of the edge [x] → [x + α_i], indexed by (x, i).
  std::vector<std::vector<Scalar>> kappa(g.vertex_count(), std::vector<Scalar>(n));
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    for (int i = 0; i < n; ++i) {
      auto k = torus_kappa(t, v, i, 1, opts);
      if (!k.closed_form) out.all_closed_form = false;
      kappa[v][i] = k.kappa;
      out.scalar[v] += k.kappa;
      out.scalar[t.step(v, i, 1)] += k.kappa;
    }
  }
  out.total = Scalar(0);
  for (const auto& r : out.scalar) out.total += r;
  out.direction_totals.assign(n, Scalar(0));
  for (int i = 0; i < n; ++i) {
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      // S_i([x]) summed over x: every edge of direction i appears q times.
      Scalar s(0);
      VertexId u = v;
      for (long j = 0; j < t.modulus(); ++j) {
        s += kappa[u][i];
        u = t.step(u, i, 1);
      }
      out.direction_totals[i] += s;
    }
  }
  Scalar sum(0);
  for (const auto& d : out.direction_totals) sum += d;
  out.decomposed = Scalar(2) * sum / Scalar(t.modulus());
  return out;
}

/// Smallest k ≥ 1 for which the distance condition holds, up to k_max.
inline std::optional<long> minimal_k_for_distance_condition(std::vector<std::vector<long>> A, long k_max) {
  for (long k = 1; k <= k_max; ++k) {
    TorusSpec spec{A, k};
    try {
      auto t = build_torus<Rational>(spec);
      if (distance_condition(t).holds) return k;
    } catch (const DegenerateQuotient&) {
    }
  }
  return std::nullopt;
}

}  // namespace admgraph
