#pragma once

#include "admgraph/grid.hpp"
#include "admgraph/ollivier.hpp"
#include "admgraph/salami.hpp"

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace admgraph {

template <typename Scalar>
struct InterfaceEdge {
  std::string core_vertex;
  GridPoint grid_vertex;
  Scalar w = Scalar(1);
};

/// A finite core K glued to Z^n \ Q_r through edges into S_{r+1}, truncated
/// to the window Q_ρ. Weights outside K default to 1.
template <typename Scalar>
struct AsymptoticallyFlatGraph {
  int n = 2;
  int r = 0;
  int rho = 0;
  WeightedGraph<Scalar> core;
  std::vector<InterfaceEdge<Scalar>> interface;
  std::optional<WeightProvider<Scalar>> outer_weights;
};

/// Window radius large enough for every salami the pipeline builds at level r.
inline int default_rigidity_radius(int r) { return std::max(4 * (r + 1), 5 * r + 3) + 3; }

/// Core, interface and outer grid assembled into one graph. Core vertices come
/// first, then the grid points of Q_ρ \ Q_r in lexicographic order.
template <typename Scalar>
struct AssembledGraph {
  int n = 0;
  int r = 0;
  int rho = 0;
  WeightedGraph<Scalar> graph;
  std::vector<char> in_core;
  std::vector<std::optional<GridPoint>> phi;
  std::unordered_map<GridPoint, VertexId, GridPointHash> grid_index;
  std::vector<VertexId> interface_vertices;  ///< δK
};

template <typename Scalar>
AssembledGraph<Scalar> assemble(const AsymptoticallyFlatGraph<Scalar>& afg) {
  if (afg.n < 2 || afg.n > kMaxDimension) throw DomainError("asymptotically flat graphs need 2 <= n <= 8");
  if (afg.r < 0) throw DomainError("core radius must be non-negative");
  if (afg.rho < afg.r + 3) throw DomainError("window radius must be at least r + 3");
  AssembledGraph<Scalar> out;
  out.n = afg.n;
  out.r = afg.r;
  out.rho = afg.rho;
  GraphBuilder<Scalar> b;
  const auto& core = afg.core;
  for (VertexId v = 0; v < core.vertex_count(); ++v) {
    VertexId id = b.add_vertex(core.label(v));
    if (core.has_vertex_weights()) b.set_vertex_weight(id, core.vertex_weight(v));
  }
  for (const auto& e : core.edges()) b.add_edge(e.u, e.v, e.weight);
  std::vector<GridPoint> points;
  for_each_cube_point(afg.n, afg.rho, [&](const GridPoint& p) {
    if (p.linf() <= afg.r) return;
    if (core.find(p.to_string())) throw DomainError("core label '" + p.to_string() + "' clashes with a grid label");
    out.grid_index.emplace(p, b.add_vertex(p.to_string()));
    points.push_back(p);
  });
  GridWindow<Scalar> outer(afg.n, afg.rho,
                           afg.outer_weights ? *afg.outer_weights : WeightProvider<Scalar>::constant(Scalar(1)));
  for (const auto& p : points) {
    for (int i = 0; i < afg.n; ++i) {
      GridPoint q = p.shifted(i, 1);
      if (q.linf() > afg.rho || q.linf() <= afg.r) continue;
      b.add_edge(out.grid_index.at(p), out.grid_index.at(q), outer.weight(p, i));
    }
  }
  std::set<VertexId> boundary;
  for (const auto& ie : afg.interface) {
    if (ie.grid_vertex.dim != afg.n || ie.grid_vertex.linf() != afg.r + 1) {
      throw DomainError("interface vertex " + ie.grid_vertex.to_string() + " is not on S_{r+1}");
    }
    auto cv = core.find(ie.core_vertex);
    if (!cv) throw DomainError("interface refers to unknown core vertex '" + ie.core_vertex + "'");
    VertexId gv = out.grid_index.at(ie.grid_vertex);
    b.add_edge(*cv, gv, ie.w);
    boundary.insert(gv);
  }
  out.graph = std::move(b).build(true);
  out.in_core.assign(out.graph.vertex_count(), 0);
  out.phi.assign(out.graph.vertex_count(), std::nullopt);
  for (VertexId v = 0; v < core.vertex_count(); ++v) out.in_core[v] = 1;
  for (const auto& [p, v] : out.grid_index) out.phi[v] = p;
  out.interface_vertices.assign(boundary.begin(), boundary.end());
  return out;
}

/// Working state of the downward induction: the current core K and the
/// labelling Φ of everything outside it.
template <typename Scalar>
struct CoordinateFrame {
  const AssembledGraph<Scalar>* assembled = nullptr;
  std::vector<char> in_core;
  std::vector<std::optional<GridPoint>> phi;
  int r = 0;

  const WeightedGraph<Scalar>& graph() const { return assembled->graph; }
  int n() const { return assembled->n; }
  int rho() const { return assembled->rho; }

  static CoordinateFrame initial(const AssembledGraph<Scalar>& a) {
    CoordinateFrame f;
    f.assembled = &a;
    f.in_core = a.in_core;
    f.phi = a.phi;
    f.r = a.r;
    return f;
  }

  std::vector<VertexId> core() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < in_core.size(); ++v) {
      if (in_core[v]) out.push_back(v);
    }
    return out;
  }

  /// K together with its outer vertex boundary.
  std::vector<VertexId> closure() const {
    std::vector<char> mark(in_core.size(), 0);
    for (VertexId v = 0; v < in_core.size(); ++v) {
      if (!in_core[v]) continue;
      mark[v] = 1;
      for (const auto& nb : graph().neighbors(v)) mark[nb.vertex] = 1;
    }
    std::vector<VertexId> out;
    for (VertexId v = 0; v < mark.size(); ++v) {
      if (mark[v]) out.push_back(v);
    }
    return out;
  }

  /// Within one step of the window's outer shell, where truncation is felt.
  bool pinned(VertexId v) const { return phi[v] && phi[v]->linf() >= rho() - 1; }
};

struct AxisCoordinate {
  int axis = 0;
  int R = 0;
  bool ends_agree = true;  ///< extensions from L_R and L_{−R} coincide
  std::optional<VertexId> disagreement;
  bool matches_outside = true;  ///< equals Φ_i on the salami outside K
  std::optional<VertexId> mismatch;
  bool harmonic = true;  ///< Δh_i = 0 on K and its vertex boundary
  std::vector<VertexId> non_harmonic;
  bool bounded = true;  ///< |h_i| ≤ r on K
  std::vector<int> dist_plus;   ///< distance to L_R inside the salami
  std::vector<int> dist_minus;  ///< distance to L_{−R} inside the salami
  std::vector<char> slab;
};

template <typename Scalar>
struct CoordinateReport {
  std::vector<AxisCoordinate> axes;
  std::vector<std::optional<GridPoint>> h_hat;
  bool ok = true;
  std::string failure;
};

/// ĥ = (h_1, …, h_n): each h_i is the extremal extension of R·1 on
/// L_R = {Φ_i = R} in the salami C_R^i = K ∪ {|Φ_j| ≤ R for j ≠ i}, R = 4(r+1).
template <typename Scalar>
CoordinateReport<Scalar> build_coordinates(const CoordinateFrame<Scalar>& fr, double epsilon = 1e-9) {
  const auto& g = fr.graph();
  const int n = fr.n();
  const int R = 4 * (fr.r + 1);
  if (fr.rho() < R + 2) throw DomainError("window radius must be at least 4(r+1) + 2 for the coordinate salamis");
  CoordinateReport<Scalar> rep;
  rep.h_hat = fr.phi;
  auto core = fr.core();
  for (VertexId v : core) rep.h_hat[v] = GridPoint(n);
  auto closure = fr.closure();

  for (int i = 0; i < n; ++i) {
    AxisCoordinate ax;
    ax.axis = i;
    ax.R = R;
    ax.slab.assign(g.vertex_count(), 0);
    std::vector<VertexId> top, bottom;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (fr.in_core[v]) {
        ax.slab[v] = 1;
        continue;
      }
      const GridPoint& p = *fr.phi[v];
      bool inside = true;
      for (int j = 0; j < n; ++j) {
        if (j != i && std::abs(p[j]) > R) inside = false;
      }
      if (!inside) continue;
      ax.slab[v] = 1;
      if (p[i] == R) top.push_back(v);
      if (p[i] == -R) bottom.push_back(v);
    }
    ax.dist_plus = multi_source_distances(g, std::span<const VertexId>(top), &ax.slab);
    ax.dist_minus = multi_source_distances(g, std::span<const VertexId>(bottom), &ax.slab);
    std::vector<int> h(g.vertex_count(), 0);
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (!ax.slab[v]) {
        h[v] = (*fr.phi[v])[i];
        continue;
      }
      if (ax.dist_plus[v] == kUnreached || ax.dist_minus[v] == kUnreached) {
        throw DomainError("salami is disconnected at '" + g.label(v) + "'");
      }
      bool above = !fr.in_core[v] && (*fr.phi[v])[i] > R;
      bool below = !fr.in_core[v] && (*fr.phi[v])[i] < -R;
      int plus = above ? R + ax.dist_plus[v] : R - ax.dist_plus[v];
      int minus = below ? -R - ax.dist_minus[v] : -R + ax.dist_minus[v];
      h[v] = plus;
      if (fr.pinned(v)) continue;
      if (plus != minus && ax.ends_agree) {
        ax.ends_agree = false;
        ax.disagreement = v;
      }
      if (!fr.in_core[v] && plus != (*fr.phi[v])[i] && ax.matches_outside) {
        ax.matches_outside = false;
        ax.mismatch = v;
      }
    }
    PotentialFunction<int> hf(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) hf.set(v, h[v]);
    for (VertexId v : closure) {
      if (sign_of(laplacian(g, hf, v), epsilon) != 0) {
        ax.harmonic = false;
        ax.non_harmonic.push_back(v);
      }
    }
    for (VertexId v : core) {
      if (std::abs(h[v]) > fr.r) ax.bounded = false;
      (*rep.h_hat[v])[i] = h[v];
    }
    if (rep.ok) {
      if (!ax.ends_agree) {
        rep.ok = false;
        rep.failure = "extensions from the two ends disagree at '" + g.label(*ax.disagreement) + "' (axis " +
                      std::to_string(i + 1) + ")";
      } else if (!ax.matches_outside) {
        rep.ok = false;
        rep.failure = "extension differs from the grid coordinate at '" + g.label(*ax.mismatch) + "'";
      } else if (!ax.harmonic) {
        rep.ok = false;
        rep.failure = "non-harmonic extension on K at '" + g.label(ax.non_harmonic.front()) + "' (axis " +
                      std::to_string(i + 1) + ")";
      } else if (!ax.bounded) {
        rep.ok = false;
        rep.failure = "coordinate leaves [-r, r] on K (axis " + std::to_string(i + 1) + ")";
      }
    }
    rep.axes.push_back(std::move(ax));
  }
  return rep;
}

struct DiagonalEdge {
  VertexId u = 0;
  VertexId v = 0;
  GridPoint hu;
  GridPoint hv;
  int i = -1;      ///< first axis along which the coordinates jump
  int j = -1;      ///< second axis
  int sigma = 1;   ///< h_i + σh_j jumps by 2 across the edge
  std::optional<int> rotated_jump;  ///< jump of the rotated extension across the edge
};

struct RotatedCheck {
  int i = 0;
  int j = 0;
  int sigma = 1;
  int R_prime = 0;
  int t = 0;
  bool ends_agree = true;
  bool matches_outside = true;
  bool equals_sum_on_core = true;
  bool harmonic_on_core = true;
  std::optional<VertexId> witness;
  std::vector<int> values;  ///< the rotated extension h'
};

struct DiagonalReport {
  std::vector<DiagonalEdge> diagonals;
  std::vector<RotatedCheck> rotated;
  bool ok = true;
  std::string failure;
};

/// Extension of Φ_i + σΦ_j from the thick diagonal L'_{±t}, t = 2r+3, inside the
/// rotated salami K ∪ {|Φ_i − σΦ_j| ≤ R', |Φ_k| ≤ R' for k ≠ i, j}, R' = 8r+2.
template <typename Scalar>
RotatedCheck rotated_extension(const CoordinateFrame<Scalar>& fr, const CoordinateReport<Scalar>& coords, int i,
                               int j, int sigma, double epsilon = 1e-9) {
  const auto& g = fr.graph();
  const int n = fr.n();
  RotatedCheck rc;
  rc.i = i;
  rc.j = j;
  rc.sigma = sigma;
  rc.R_prime = 8 * fr.r + 2;
  rc.t = 2 * fr.r + 3;
  std::vector<char> tube(g.vertex_count(), 0);
  std::map<int, std::vector<VertexId>> top, bottom;
  auto sum_of = [&](const GridPoint& p) { return p[i] + sigma * p[j]; };
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (fr.in_core[v]) {
      tube[v] = 1;
      continue;
    }
    const GridPoint& p = *fr.phi[v];
    bool inside = std::abs(p[i] - sigma * p[j]) <= rc.R_prime;
    for (int k = 0; k < n; ++k) {
      if (k != i && k != j && std::abs(p[k]) > rc.R_prime) inside = false;
    }
    if (!inside) continue;
    tube[v] = 1;
    int s = sum_of(p);
    if (std::abs(s - rc.t) <= 1) top[s].push_back(v);
    if (std::abs(s + rc.t) <= 1) bottom[s].push_back(v);
  }
  auto level_distances = [&](const std::map<int, std::vector<VertexId>>& levels) {
    std::vector<std::pair<int, std::vector<int>>> out;
    for (const auto& [value, verts] : levels) {
      out.emplace_back(value, multi_source_distances(g, std::span<const VertexId>(verts), &tube));
    }
    return out;
  };
  auto dtop = level_distances(top);
  auto dbottom = level_distances(bottom);
  auto extend = [&](const std::vector<std::pair<int, std::vector<int>>>& levels, VertexId v, bool upper) {
    std::optional<int> best;
    for (const auto& [value, d] : levels) {
      if (d[v] == kUnreached) continue;
      int c = upper ? value + d[v] : value - d[v];
      if (!best || (upper ? c < *best : c > *best)) best = c;
    }
    if (!best) throw DomainError("rotated salami is disconnected at '" + g.label(v) + "'");
    return *best;
  };
  rc.values.assign(g.vertex_count(), 0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!tube[v]) continue;
    bool core = fr.in_core[v];
    int s = core ? 0 : sum_of(*fr.phi[v]);
    // From the upper diagonal: inf-extension beyond it, sup-extension elsewhere.
    int plus = (!core && s > rc.t + 1) ? extend(dtop, v, true) : extend(dtop, v, false);
    if (!core && std::abs(s - rc.t) <= 1) plus = s;
    int minus = (!core && s < -rc.t - 1) ? extend(dbottom, v, false) : extend(dbottom, v, true);
    if (!core && std::abs(s + rc.t) <= 1) minus = s;
    rc.values[v] = plus;
    if (fr.pinned(v)) continue;
    if (plus != minus && rc.ends_agree) {
      rc.ends_agree = false;
      rc.witness = v;
    }
    if (!core && plus != s && rc.matches_outside) {
      rc.matches_outside = false;
      if (!rc.witness) rc.witness = v;
    }
    if (core) {
      const GridPoint& h = *coords.h_hat[v];
      if (plus != h[i] + sigma * h[j] && rc.equals_sum_on_core) {
        rc.equals_sum_on_core = false;
        if (!rc.witness) rc.witness = v;
      }
    }
  }
  PotentialFunction<int> hf(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (tube[v]) {
      hf.set(v, rc.values[v]);
    } else {
      hf.set(v, sum_of(*fr.phi[v]));
    }
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (fr.in_core[v] && sign_of(laplacian(g, hf, v), epsilon) != 0) rc.harmonic_on_core = false;
  }
  return rc;
}

/// Edges of K̄ whose endpoints' coordinates differ in more than one place,
/// together with the rotated-salami comparison that rules them out.
template <typename Scalar>
DiagonalReport diagonal_edge_report(const CoordinateFrame<Scalar>& fr, const CoordinateReport<Scalar>& coords,
                                    double epsilon = 1e-9) {
  const auto& g = fr.graph();
  const int n = fr.n();
  DiagonalReport rep;
  for (const auto& e : g.edges()) {
    if (!fr.in_core[e.u] && !fr.in_core[e.v]) continue;
    const GridPoint& a = *coords.h_hat[e.u];
    const GridPoint& b = *coords.h_hat[e.v];
    GridPoint diff(n);
    for (int c = 0; c < n; ++c) diff[c] = b[c] - a[c];
    if (diff.l1() <= 1) continue;
    DiagonalEdge d;
    d.u = e.u;
    d.v = e.v;
    d.hu = a;
    d.hv = b;
    for (int c = 0; c < n; ++c) {
      if (diff[c] == 0) continue;
      if (d.i < 0) {
        d.i = c;
      } else if (d.j < 0) {
        d.j = c;
      }
    }
    if (d.j >= 0) d.sigma = diff[d.i] * diff[d.j];
    rep.diagonals.push_back(d);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int sigma : {1, -1}) {
        auto rc = rotated_extension(fr, coords, i, j, sigma, epsilon);
        for (auto& d : rep.diagonals) {
          if (d.i == i && d.j == j && d.sigma == sigma) d.rotated_jump = rc.values[d.v] - rc.values[d.u];
        }
        if (rep.ok && !(rc.ends_agree && rc.matches_outside && rc.equals_sum_on_core)) {
          rep.ok = false;
          rep.failure = "rotated extension (axes " + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                        ") disagrees with the coordinates";
          if (rc.witness) rep.failure += " at '" + g.label(*rc.witness) + "'";
        }
        rc.values.clear();
        rep.rotated.push_back(std::move(rc));
      }
    }
  }
  if (!rep.diagonals.empty()) {
    rep.ok = false;
    const auto& d = rep.diagonals.front();
    rep.failure = "diagonal edge " + g.label(d.u) + "-" + g.label(d.v) + " between " + d.hu.to_string() + " and " +
                  d.hv.to_string();
  }
  return rep;
}

template <typename Scalar>
struct TestFunctionBound {
  GridPoint tuple;
  VertexId u_j = 0;
  VertexId v_s = 0;
  int j = 0;
  std::vector<int> sigma;
  bool constructed = false;
  bool lipschitz = false;
  Scalar bound{};    ///< ∇_{u_j v_s}Δf with the graph's own Laplacian
  Scalar formula{};  ///< Σ_{i≠j} 2(w(v_s,u_i) − 1), the value when m ≡ 1
  std::optional<Scalar> kappa;
};

struct CrossFailure {
  VertexId x = 0;
  int axis = 0;
  int sign = 0;
  std::string reason;
};

template <typename Scalar>
struct MultiplicityReport {
  std::map<GridPoint, std::vector<VertexId>> preimages;  ///< over S_r
  std::vector<GridPoint> missing;
  std::vector<GridPoint> multiple;
  std::vector<CrossFailure> cross_failures;
  std::vector<TestFunctionBound<Scalar>> bounds;
  bool ok = true;
  std::string failure;
};

namespace detail {

template <typename Scalar>
std::map<GridPoint, std::vector<VertexId>> tuple_index(const CoordinateFrame<Scalar>&,
                                                       const CoordinateReport<Scalar>& coords) {
  std::map<GridPoint, std::vector<VertexId>> out;
  for (VertexId v = 0; v < coords.h_hat.size(); ++v) out[*coords.h_hat[v]].push_back(v);
  return out;
}

/// The test function around a tuple p with several preimages: 1 on ĥ⁻¹(p),
/// 0 on u_i = ĥ⁻¹(p − σ_i e_i), 2 on ĥ⁻¹(p + σ_j e_j), 0 on ĥ⁻¹(p + σ_i e_i)
/// for i ≠ j and −1 on the remaining neighbours of u_j.
template <typename Scalar>
TestFunctionBound<Scalar> test_function_bound(const CoordinateFrame<Scalar>& fr,
                                              const std::map<GridPoint, std::vector<VertexId>>& index,
                                              const GridPoint& p, const EnumerationOptions& opts) {
  const auto& g = fr.graph();
  const int n = fr.n();
  TestFunctionBound<Scalar> out;
  out.tuple = p;
  auto lookup = [&](const GridPoint& q) -> const std::vector<VertexId>* {
    auto it = index.find(q);
    return it == index.end() ? nullptr : &it->second;
  };
  const auto* centre = lookup(p);
  if (!centre || centre->size() < 2) return out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> sigma(n);
    std::vector<VertexId> u(n);
    bool unique = true;
    for (int i = 0; i < n; ++i) {
      sigma[i] = (mask >> i) & 1 ? -1 : 1;
      const auto* pre = lookup(p.shifted(i, -sigma[i]));
      if (!pre || pre->size() != 1) {
        unique = false;
        break;
      }
      u[i] = pre->front();
    }
    if (!unique) continue;
    const int j = 0;
    out.sigma = sigma;
    out.j = j;
    out.u_j = u[j];
    out.v_s = centre->front();
    PotentialFunction<int> f(g.vertex_count());
    for (VertexId v : *centre) f.set(v, 1);
    for (int i = 0; i < n; ++i) f.set(u[i], 0);
    for (int i = 0; i < n; ++i) {
      if (const auto* pre = lookup(p.shifted(i, sigma[i]))) {
        for (VertexId v : *pre) f.set(v, i == j ? 2 : 0);
      }
    }
    for (const auto& nb : g.neighbors(u[j])) {
      if (!f.defined(nb.vertex)) f.set(nb.vertex, -1);
    }
    bool complete = true;
    for (const auto& nb : g.neighbors(out.v_s)) {
      if (!f.defined(nb.vertex)) complete = false;
    }
    if (!complete) return out;
    out.constructed = true;
    std::vector<VertexId> domain = f.domain();
    out.lipschitz = is_lipschitz(g, f, 1, std::span<const VertexId>(domain)).holds;
    out.bound = laplacian(g, f, out.u_j) - laplacian(g, f, out.v_s);
    out.formula = Scalar(0);
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      auto w = g.weight(out.v_s, u[i]);
      out.formula += Scalar(2) * (Scalar(w ? *w : Scalar(0)) - Scalar(1));
    }
    if (g.adjacent(out.u_j, out.v_s)) out.kappa = edge_kappa(g, out.u_j, out.v_s, opts);
    return out;
  }
  return out;
}

}  // namespace detail

/// Every vertex of K̄ has neighbours at ĥ ± e_i reached by descending towards
/// L_{∓R}, and every tuple of S_r has exactly one preimage in K. Tuples with
/// several preimages come with the test-function bound on κ(u_j, v_s).
template <typename Scalar>
MultiplicityReport<Scalar> multiplicity_and_cross_check(const CoordinateFrame<Scalar>& fr,
                                                        const CoordinateReport<Scalar>& coords,
                                                        const EnumerationOptions& opts = {}) {
  const auto& g = fr.graph();
  const int n = fr.n();
  MultiplicityReport<Scalar> rep;
  auto index = detail::tuple_index(fr, coords);
  for (VertexId x : fr.closure()) {
    for (int i = 0; i < n; ++i) {
      const auto& ax = coords.axes[i];
      for (int s : {1, -1}) {
        const auto& dist = s > 0 ? ax.dist_plus : ax.dist_minus;
        if (!ax.slab[x] || dist[x] <= 0) continue;
        GridPoint want = coords.h_hat[x]->shifted(i, s);
        bool found = false;
        for (const auto& nb : g.neighbors(x)) {
          if (!ax.slab[nb.vertex] || dist[nb.vertex] != dist[x] - 1) continue;
          if (*coords.h_hat[nb.vertex] == want) {
            found = true;
          } else {
            rep.cross_failures.push_back(
                {x, i, s, "descent neighbour '" + g.label(nb.vertex) + "' has coordinates " +
                              coords.h_hat[nb.vertex]->to_string() + ", expected " + want.to_string()});
          }
        }
        if (!found) rep.cross_failures.push_back({x, i, s, "no neighbour at " + want.to_string()});
      }
    }
  }
  for_each_shell_point(n, fr.r, [&](const GridPoint& p) {
    std::vector<VertexId> pre;
    if (auto it = index.find(p); it != index.end()) {
      for (VertexId v : it->second) {
        if (fr.in_core[v]) pre.push_back(v);
      }
    }
    if (pre.empty()) rep.missing.push_back(p);
    if (pre.size() > 1) {
      rep.multiple.push_back(p);
      rep.bounds.push_back(detail::test_function_bound(fr, index, p, opts));
    }
    rep.preimages.emplace(p, std::move(pre));
  });
  if (!rep.multiple.empty()) {
    rep.ok = false;
    rep.failure = "tuple " + rep.multiple.front().to_string() + " has " +
                  std::to_string(rep.preimages.at(rep.multiple.front()).size()) + " preimages in K";
  } else if (!rep.missing.empty()) {
    rep.ok = false;
    rep.failure = "tuple " + rep.missing.front().to_string() + " has no preimage in K";
  } else if (!rep.cross_failures.empty()) {
    rep.ok = false;
    const auto& c = rep.cross_failures.front();
    rep.failure = "cross structure fails at '" + g.label(c.x) + "': " + c.reason;
  }
  return rep;
}

struct StageReport {
  std::string name;
  int level = -1;
  bool passed = false;
  std::string detail;
};

template <typename Scalar>
struct RigidityReport {
  bool verdict = false;
  std::optional<std::string> failed_stage;
  int failed_level = -1;
  std::vector<StageReport> stages;
  std::vector<TestFunctionBound<Scalar>> bounds;
  std::vector<DiagonalEdge> diagonals;
  std::optional<Scalar> min_kappa;
  std::size_t edges_certified = 0;
  std::size_t edges_skipped = 0;  ///< near the window boundary
  std::vector<std::string> labels;  ///< vertex labels of the assembled graph
};

struct RigidityOptions {
  EnumerationOptions enumeration;
  unsigned jobs = 1;
  double epsilon = 1e-9;
};

/// κ ≥ 0 on every edge within reach of the core (exhaustive search) and on the
/// outer grid edges (closed form); edges whose stencil leaves the window are skipped.
template <typename Scalar>
StageReport curvature_certificate(const AssembledGraph<Scalar>& a, const AsymptoticallyFlatGraph<Scalar>& afg,
                                  const RigidityOptions& opts, RigidityReport<Scalar>& rep) {
  const auto& g = a.graph;
  StageReport st{"curvature_certificate", a.r, true, ""};
  const int near = a.r + 3;
  std::vector<std::size_t> brute;
  std::vector<std::size_t> closed;
  for (std::size_t idx = 0; idx < g.edges().size(); ++idx) {
    const auto& e = g.edges()[idx];
    auto radius = [&](VertexId v) { return a.in_core[v] ? 0 : a.phi[v]->linf(); };
    int lo = std::min(radius(e.u), radius(e.v));
    int hi = std::max(radius(e.u), radius(e.v));
    if (lo <= near) {
      if (hi + 2 > a.rho) {
        ++rep.edges_skipped;
      } else {
        brute.push_back(idx);
      }
    } else if (hi + 1 > a.rho) {
      ++rep.edges_skipped;
    } else {
      closed.push_back(idx);
    }
  }
  std::vector<std::optional<Scalar>> kappas(g.edges().size());
  parallel_for(brute.size(), opts.jobs, [&](std::size_t k) {
    const auto& e = g.edges()[brute[k]];
    kappas[brute[k]] = edge_kappa(g, e.u, e.v, opts.enumeration);
  });
  GridWindow<Scalar> outer(a.n, a.rho,
                           afg.outer_weights ? *afg.outer_weights : WeightProvider<Scalar>::constant(Scalar(1)));
  for (std::size_t idx : closed) {
    const auto& e = g.edges()[idx];
    GridPoint p = *a.phi[e.u];
    GridPoint q = *a.phi[e.v];
    int axis = 0;
    while (p[axis] == q[axis]) ++axis;
    kappas[idx] = kappa_grid(outer, p, axis, q[axis] - p[axis]);
  }
  for (std::size_t idx = 0; idx < kappas.size(); ++idx) {
    if (!kappas[idx]) continue;
    ++rep.edges_certified;
    if (!rep.min_kappa || *kappas[idx] < *rep.min_kappa) rep.min_kappa = *kappas[idx];
    if (st.passed && sign_of(*kappas[idx], opts.epsilon) < 0) {
      st.passed = false;
      const auto& e = g.edges()[idx];
      st.detail = "kappa(" + g.label(e.u) + "," + g.label(e.v) + ") = " + format_scalar(*kappas[idx]) + " < 0";
    }
  }
  if (st.passed) {
    st.detail = std::to_string(rep.edges_certified) + " edges certified, " + std::to_string(rep.edges_skipped) +
                " skipped at the window boundary";
  }
  return st;
}

namespace detail {

/// The layer ĥ⁻¹(S_r) together with everything outside K must look exactly
/// like Z^n \ Q_{r−1}: unit weights, unit vertex measure, grid adjacency.
template <typename Scalar>
StageReport layer_isomorphism(const CoordinateFrame<Scalar>& fr, const CoordinateReport<Scalar>& coords,
                              double epsilon) {
  const auto& g = fr.graph();
  const int n = fr.n();
  StageReport st{"weights", fr.r, true, ""};
  auto fail = [&](const std::string& why) {
    if (st.passed) {
      st.passed = false;
      st.detail = why;
    }
  };
  auto index = tuple_index(fr, coords);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!fr.in_core[v]) continue;
    const GridPoint& p = *coords.h_hat[v];
    bool layer = p.linf() == fr.r;
    for (const auto& nb : g.neighbors(v)) {
      const GridPoint& q = *coords.h_hat[nb.vertex];
      int l1 = 0;
      for (int c = 0; c < n; ++c) l1 += std::abs(q[c] - p[c]);
      if (!layer) {
        if (!fr.in_core[nb.vertex]) fail("vertex '" + g.label(v) + "' inside Q_{r-1} touches the outside of K");
        continue;
      }
      if (l1 != 1) {
        fail("edge " + g.label(v) + "-" + g.label(nb.vertex) + " is not a grid edge");
        continue;
      }
      bool inner = fr.in_core[nb.vertex] && q.linf() < fr.r;
      if (!inner && !approx_equal(nb.weight, Scalar(1), epsilon)) {
        fail("edge " + g.label(v) + "-" + g.label(nb.vertex) + " has weight " + format_scalar(nb.weight));
      }
    }
    if (!layer) continue;
    if (!approx_equal(g.vertex_weight(v), Scalar(1), epsilon)) {
      fail("vertex '" + g.label(v) + "' carries measure " + format_scalar(g.vertex_weight(v)));
    }
    for (int i = 0; i < n; ++i) {
      for (int s : {1, -1}) {
        GridPoint q = p.shifted(i, s);
        if (q.linf() < fr.r || q.linf() > fr.rho()) continue;
        auto it = index.find(q);
        if (it == index.end() || it->second.size() != 1 || !g.adjacent(v, it->second.front())) {
          fail("vertex '" + g.label(v) + "' lacks its grid neighbour at " + q.to_string());
        }
      }
    }
  }
  if (st.passed) st.detail = "layer at radius " + std::to_string(fr.r) + " is a unit-weight grid shell";
  return st;
}

}  // namespace detail

/// The full rigidity pipeline: curvature certificate, trivial outer weights,
/// then for r, r−1, …, 0 the coordinates, diagonal, multiplicity/cross and
/// weight stages, peeling one shell of K per level.
template <typename Scalar>
RigidityReport<Scalar> rigidity_check(const AsymptoticallyFlatGraph<Scalar>& afg, const RigidityOptions& opts = {}) {
  RigidityReport<Scalar> rep;
  auto fail = [&](StageReport st) {
    rep.failed_stage = st.name;
    rep.failed_level = st.level;
    rep.stages.push_back(std::move(st));
    return rep;
  };
  AssembledGraph<Scalar> a;
  try {
    a = assemble(afg);
  } catch (const Error& e) {
    return fail({"well_formed", afg.r, false, e.what()});
  }
  if (afg.rho < default_rigidity_radius(afg.r)) {
    return fail({"well_formed", afg.r, false,
                 "window radius must be at least " + std::to_string(default_rigidity_radius(afg.r))});
  }
  rep.stages.push_back({"well_formed", afg.r, true, ""});
  for (VertexId v = 0; v < a.graph.vertex_count(); ++v) rep.labels.push_back(a.graph.label(v));

  auto cert = curvature_certificate(a, afg, opts, rep);
  if (!cert.passed) return fail(cert);
  rep.stages.push_back(cert);

  StageReport trivial{"trivial_outer_weights", afg.r, true, "all weights outside K equal 1"};
  for (const auto& e : a.graph.edges()) {
    if (a.in_core[e.u] || a.in_core[e.v]) continue;
    if (!approx_equal(e.weight, Scalar(1), opts.epsilon)) {
      trivial.passed = false;
      trivial.detail = "edge " + a.graph.label(e.u) + "-" + a.graph.label(e.v) + " has weight " +
                       format_scalar(e.weight);
      break;
    }
  }
  if (!trivial.passed) return fail(trivial);
  rep.stages.push_back(trivial);

  auto fr = CoordinateFrame<Scalar>::initial(a);
  for (; fr.r >= 0; --fr.r) {
    auto coords = build_coordinates(fr, opts.epsilon);
    StageReport cst{"coordinates", fr.r, coords.ok, coords.ok ? "harmonic coordinates agree" : coords.failure};
    if (!coords.ok) return fail(cst);
    rep.stages.push_back(cst);

    auto diag = diagonal_edge_report(fr, coords, opts.epsilon);
    rep.diagonals = diag.diagonals;
    StageReport dst{"diagonals", fr.r, diag.ok, diag.ok ? "no diagonal edges" : diag.failure};
    if (!diag.ok) return fail(dst);
    rep.stages.push_back(dst);

    auto mult = multiplicity_and_cross_check(fr, coords, opts.enumeration);
    rep.bounds = mult.bounds;
    StageReport mst{"multiplicity", fr.r, mult.ok, mult.ok ? "every tuple of S_r has one preimage" : mult.failure};
    if (!mult.ok) return fail(mst);
    rep.stages.push_back(mst);

    auto wst = detail::layer_isomorphism(fr, coords, opts.epsilon);
    if (!wst.passed) return fail(wst);
    rep.stages.push_back(wst);

    for (VertexId v = 0; v < fr.in_core.size(); ++v) {
      if (fr.in_core[v] && coords.h_hat[v]->linf() == fr.r) {
        fr.in_core[v] = 0;
        fr.phi[v] = coords.h_hat[v];
      }
    }
  }

  StageReport fin{"standard_grid", -1, true, ""};
  std::set<GridPoint> seen;
  for (VertexId v = 0; v < fr.in_core.size(); ++v) {
    if (fr.in_core[v] || !fr.phi[v]) {
      fin.passed = false;
      fin.detail = "vertex '" + a.graph.label(v) + "' was never placed";
      break;
    }
    if (!seen.insert(*fr.phi[v]).second) {
      fin.passed = false;
      fin.detail = "two vertices share " + fr.phi[v]->to_string();
      break;
    }
    if (!approx_equal(a.graph.vertex_weight(v), Scalar(1), opts.epsilon)) {
      fin.passed = false;
      fin.detail = "vertex '" + a.graph.label(v) + "' has non-unit measure";
      break;
    }
  }
  if (fin.passed) {
    for (const auto& e : a.graph.edges()) {
      const GridPoint& p = *fr.phi[e.u];
      const GridPoint& q = *fr.phi[e.v];
      int l1 = 0;
      for (int c = 0; c < a.n; ++c) l1 += std::abs(p[c] - q[c]);
      if (l1 != 1 || !approx_equal(e.weight, Scalar(1), opts.epsilon)) {
        fin.passed = false;
        fin.detail = "edge " + a.graph.label(e.u) + "-" + a.graph.label(e.v) + " is not a unit grid edge";
        break;
      }
    }
  }
  if (fin.passed) {
    long expected = 1;
    for (int c = 0; c < a.n; ++c) expected *= 2L * a.rho + 1;
    if (static_cast<long>(seen.size()) != expected) {
      fin.passed = false;
      fin.detail = "placed " + std::to_string(seen.size()) + " vertices, expected " + std::to_string(expected);
    } else {
      fin.detail = "isomorphic to the standard grid with unit weights";
    }
  }
  if (!fin.passed) return fail(fin);
  rep.stages.push_back(fin);
  rep.verdict = true;
  return rep;
}

}  // namespace admgraph
