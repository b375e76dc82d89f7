#pragma once

#include "admgraph/graph.hpp"

#include <array>
#include <compare>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace admgraph {

inline constexpr int kMaxDimension = 8;

class OutOfWindow : public Error {
 public:
  using Error::Error;
};

/// A point of the integer lattice Z^n, n ≤ kMaxDimension.
struct GridPoint {
  std::array<int, kMaxDimension> coords{};
  int dim = 0;

  GridPoint() = default;
  explicit GridPoint(int n) : dim(n) {
    if (n < 1 || n > kMaxDimension) throw DomainError("unsupported dimension " + std::to_string(n));
  }
  GridPoint(std::initializer_list<int> values) : GridPoint(static_cast<int>(values.size())) {
    int i = 0;
    for (int v : values) coords[i++] = v;
  }

  static GridPoint from_vector(const std::vector<int>& values) {
    GridPoint p(static_cast<int>(values.size()));
    for (int i = 0; i < p.dim; ++i) p.coords[i] = values[i];
    return p;
  }

  int& operator[](int i) { return coords[i]; }
  int operator[](int i) const { return coords[i]; }

  int linf() const {
    int m = 0;
    for (int i = 0; i < dim; ++i) m = std::max(m, coords[i] < 0 ? -coords[i] : coords[i]);
    return m;
  }

  int l1() const {
    int s = 0;
    for (int i = 0; i < dim; ++i) s += coords[i] < 0 ? -coords[i] : coords[i];
    return s;
  }

  GridPoint shifted(int axis, int delta) const {
    GridPoint p = *this;
    p.coords[axis] += delta;
    return p;
  }

  std::vector<int> to_vector() const { return std::vector<int>(coords.begin(), coords.begin() + dim); }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < dim; ++i) {
      if (i) s += ",";
      s += std::to_string(coords[i]);
    }
    return s + ")";
  }

  friend bool operator==(const GridPoint& a, const GridPoint& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i) {
      if (a.coords[i] != b.coords[i]) return false;
    }
    return true;
  }

  friend std::strong_ordering operator<=>(const GridPoint& a, const GridPoint& b) {
    if (auto c = a.dim <=> b.dim; c != 0) return c;
    for (int i = 0; i < a.dim; ++i) {
      if (auto c = a.coords[i] <=> b.coords[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
  }
};

struct GridPointHash {
  std::size_t operator()(const GridPoint& p) const noexcept {
    std::size_t h = static_cast<std::size_t>(p.dim);
    for (int i = 0; i < p.dim; ++i) h = h * 1000003u ^ static_cast<std::size_t>(p.coords[i] + 0x9e3779b9);
    return h;
  }
};

/// The edge {base, base + e_axis}.
struct GridEdge {
  GridPoint base;
  int axis = 0;

  GridPoint head() const { return base.shifted(axis, 1); }

  friend bool operator==(const GridEdge& a, const GridEdge& b) { return a.axis == b.axis && a.base == b.base; }
};

struct GridEdgeHash {
  std::size_t operator()(const GridEdge& e) const noexcept {
    return GridPointHash{}(e.base) * 31u + static_cast<std::size_t>(e.axis);
  }
};

/// Calls fn(p) for every p in Q_r = [-r, r]^n in lexicographic order.
template <typename Fn>
void for_each_cube_point(int n, int r, Fn&& fn) {
  if (r < 0) return;
  GridPoint p(n);
  for (int i = 0; i < n; ++i) p[i] = -r;
  while (true) {
    fn(static_cast<const GridPoint&>(p));
    int i = n - 1;
    while (i >= 0 && p[i] == r) {
      p[i] = -r;
      --i;
    }
    if (i < 0) return;
    ++p[i];
  }
}

/// Calls fn(p) for every p with lo ≤ p_j ≤ hi_j in lexicographic order.
template <typename Fn>
void for_each_box_point(const GridPoint& lo, const GridPoint& hi, Fn&& fn) {
  const int n = lo.dim;
  for (int i = 0; i < n; ++i) {
    if (lo[i] > hi[i]) return;
  }
  GridPoint p = lo;
  while (true) {
    fn(static_cast<const GridPoint&>(p));
    int i = n - 1;
    while (i >= 0 && p[i] == hi[i]) {
      p[i] = lo[i];
      --i;
    }
    if (i < 0) return;
    ++p[i];
  }
}

/// Calls fn(p) for every p on the sphere S_r = {‖p‖∞ = r}, each point once.
template <typename Fn>
void for_each_shell_point(int n, int r, Fn&& fn) {
  if (r == 0) {
    fn(static_cast<const GridPoint&>(GridPoint(n)));
    return;
  }
  // Points whose first coordinate of modulus r sits at index i.
  for (int i = 0; i < n; ++i) {
    for (int s : {-r, r}) {
      GridPoint lo(n), hi(n);
      for (int j = 0; j < n; ++j) {
        if (j < i) {
          lo[j] = -(r - 1);
          hi[j] = r - 1;
        } else if (j == i) {
          lo[j] = hi[j] = s;
        } else {
          lo[j] = -r;
          hi[j] = r;
        }
      }
      for_each_box_point(lo, hi, fn);
    }
  }
}

/// Edge weights of Z^n, queried lazily. Either a finite table with a default
/// value or a procedural field with an optional radius of validity.
template <typename Scalar>
class WeightProvider {
 public:
  using Function = std::function<Scalar(const GridPoint& base, int axis)>;

  static WeightProvider constant(Scalar c, std::string description = "constant") {
    WeightProvider p;
    p.fn_ = [c](const GridPoint&, int) { return c; };
    p.description_ = std::move(description);
    return p;
  }

  static WeightProvider table(std::unordered_map<GridEdge, Scalar, GridEdgeHash> entries, Scalar fallback,
                              std::optional<int> validity_radius, std::string description = "table") {
    WeightProvider p;
    auto shared = std::make_shared<const std::unordered_map<GridEdge, Scalar, GridEdgeHash>>(std::move(entries));
    p.fn_ = [shared, fallback](const GridPoint& base, int axis) {
      auto it = shared->find(GridEdge{base, axis});
      return it == shared->end() ? fallback : it->second;
    };
    p.radius_ = validity_radius;
    p.description_ = std::move(description);
    return p;
  }

  static WeightProvider procedural(Function fn, std::optional<int> validity_radius, std::string description) {
    WeightProvider p;
    p.fn_ = std::move(fn);
    p.radius_ = validity_radius;
    p.description_ = std::move(description);
    return p;
  }

  Scalar operator()(const GridPoint& base, int axis) const { return fn_(base, axis); }

  std::optional<int> validity_radius() const noexcept { return radius_; }
  const std::string& description() const noexcept { return description_; }

 private:
  Function fn_;
  std::optional<int> radius_;
  std::string description_;
};

/// A weighted Z^n restricted to the cube Q_ρ. Closed-form quantities refuse to
/// read weights outside the cube.
template <typename Scalar>
class GridWindow {
 public:
  GridWindow(int dimension, int radius, WeightProvider<Scalar> weights)
      : n_(dimension), rho_(radius), weights_(std::move(weights)) {
    if (n_ < 1 || n_ > kMaxDimension) throw DomainError("unsupported dimension " + std::to_string(n_));
    if (rho_ < 0) throw DomainError("negative window radius");
    if (auto r = weights_.validity_radius(); r && *r < rho_) {
      throw DomainError("weight field is only valid up to radius " + std::to_string(*r));
    }
  }

  int dimension() const noexcept { return n_; }
  int radius() const noexcept { return rho_; }
  const WeightProvider<Scalar>& provider() const noexcept { return weights_; }

  bool contains(const GridPoint& p) const { return p.dim == n_ && p.linf() <= rho_; }

  /// Weight of {base, base + e_axis}.
  Scalar weight(const GridPoint& base, int axis) const {
    if (!contains(base) || !contains(base.shifted(axis, 1))) {
      throw OutOfWindow("edge " + base.to_string() + "+e" + std::to_string(axis + 1) + " leaves the window");
    }
    Scalar w = weights_(base, axis);
    if (!(w > 0)) throw DomainError("non-positive weight at " + base.to_string());
    return w;
  }

  /// Weight of {x, x + sign·e_axis}.
  Scalar weight_step(const GridPoint& x, int axis, int sign) const {
    return sign > 0 ? weight(x, axis) : weight(x.shifted(axis, -1), axis);
  }

  GridWindow with_radius(int rho) const { return GridWindow(n_, rho, weights_); }

 private:
  int n_;
  int rho_;
  WeightProvider<Scalar> weights_;
};

template <typename Scalar>
struct MaterializedGrid {
  WeightedGraph<Scalar> graph;
  std::vector<GridPoint> points;
  std::unordered_map<GridPoint, VertexId, GridPointHash> index;

  VertexId at(const GridPoint& p) const {
    auto it = index.find(p);
    if (it == index.end()) throw OutOfWindow("point " + p.to_string() + " not in window");
    return it->second;
  }
};

/// The window as an explicit graph; vertices in lexicographic order.
template <typename Scalar>
MaterializedGrid<Scalar> materialize(const GridWindow<Scalar>& gw) {
  MaterializedGrid<Scalar> out;
  GraphBuilder<Scalar> b;
  for_each_cube_point(gw.dimension(), gw.radius(), [&](const GridPoint& p) {
    out.index.emplace(p, b.add_vertex(p.to_string()));
    out.points.push_back(p);
  });
  for (const auto& p : out.points) {
    for (int i = 0; i < gw.dimension(); ++i) {
      GridPoint q = p.shifted(i, 1);
      if (!gw.contains(q)) continue;
      b.add_edge(out.index.at(p), out.index.at(q), gw.weight(p, i));
    }
  }
  out.graph = std::move(b).build();
  return out;
}

/// Closed-form curvature of the edge {x, x + sign·e_axis} of weighted Z^n.
template <typename Scalar>
Scalar kappa_grid(const GridWindow<Scalar>& gw, const GridPoint& x, int axis, int sign) {
  const GridPoint y = x.shifted(axis, sign);
  Scalar k = Scalar(2) * gw.weight_step(x, axis, sign);
  k -= gw.weight_step(x, axis, -sign);
  k -= gw.weight_step(y, axis, sign);
  for (int j = 0; j < gw.dimension(); ++j) {
    if (j == axis) continue;
    for (int s : {1, -1}) {
      Scalar d = gw.weight_step(x, j, s) - gw.weight_step(y, j, s);
      k -= abs_value(d);
    }
  }
  return k;
}

/// Abs(x): Σ_i Σ_{j≠i} Σ_{s,t=±} |w(x, x+s e_i) − w(x+t e_j, x+t e_j+s e_i)|.
template <typename Scalar>
Scalar abs_term(const GridWindow<Scalar>& gw, const GridPoint& x) {
  Scalar total(0);
  const int n = gw.dimension();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int s : {1, -1}) {
        for (int t : {1, -1}) {
          Scalar d = gw.weight_step(x, i, s) - gw.weight_step(x.shifted(j, t), i, s);
          total += abs_value(d);
        }
      }
    }
  }
  return total;
}

/// The part of R(x) that is linear in the weights:
/// Σ_i w(x,x+e_i) + w(x,x−e_i) − w(x+e_i,x+2e_i) − w(x−e_i,x−2e_i).
template <typename Scalar>
Scalar linear_term(const GridWindow<Scalar>& gw, const GridPoint& x) {
  Scalar total(0);
  for (int i = 0; i < gw.dimension(); ++i) {
    total += gw.weight_step(x, i, 1);
    total += gw.weight_step(x, i, -1);
    total -= gw.weight_step(x.shifted(i, 1), i, 1);
    total -= gw.weight_step(x.shifted(i, -1), i, -1);
  }
  return total;
}

/// Closed-form scalar curvature R(x) = linear_term(x) − Abs(x).
template <typename Scalar>
Scalar scalar_grid(const GridWindow<Scalar>& gw, const GridPoint& x) {
  return linear_term(gw, x) - abs_term(gw, x);
}

/// E_r: edges from S_r to S_{r+1}. Ẽ_r: from every vertex of the vertex
/// boundary of Q_r (one coordinate of modulus r+1, the rest ≤ r) the unique
/// edge that moves that coordinate outwards. Both have 2n(2r+1)^{n-1} edges.
struct ShellEdges {
  std::vector<GridEdge> outer;        ///< E_r
  std::vector<GridEdge> outer_tilde;  ///< Ẽ_r
};

/// Edges stepping coordinate `axis` from magnitude `from` to `from + 1`
/// (both signs) while every other coordinate stays in [−r, r].
inline std::vector<GridEdge> radial_edges(int n, int r, int from) {
  std::vector<GridEdge> out;
  for (int i = 0; i < n; ++i) {
    GridPoint lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
      lo[j] = -r;
      hi[j] = r;
    }
    for (int s : {1, -1}) {
      // Edge {x, x + e_i} with x_i = from (outward +), or x_i = −from−1 (outward −).
      lo[i] = hi[i] = s > 0 ? from : -from - 1;
      for_each_box_point(lo, hi, [&](const GridPoint& p) { out.push_back(GridEdge{p, i}); });
    }
  }
  return out;
}

inline ShellEdges shell_edges(int n, int r) {
  if (r < 0) throw DomainError("negative shell index");
  return ShellEdges{radial_edges(n, r, r), radial_edges(n, r, r + 1)};
}

/// F_r: edges stepping a coordinate from magnitude r−1 to r inside the
/// lines of Q_r (for r = 0 this is E_0).
inline std::vector<GridEdge> inner_face_edges(int n, int r) {
  if (r == 0) return radial_edges(n, 0, 0);
  return radial_edges(n, r, r - 1);
}

template <typename Scalar>
Scalar sum_weights(const GridWindow<Scalar>& gw, const std::vector<GridEdge>& edges) {
  Scalar s(0);
  for (const auto& e : edges) s += gw.weight(e.base, e.axis);
  return s;
}

/// Σ_{E_r} w − Σ_{Ẽ_r} w.
template <typename Scalar>
Scalar shell_gap(const GridWindow<Scalar>& gw, int r) {
  auto se = shell_edges(gw.dimension(), r);
  return sum_weights(gw, se.outer) - sum_weights(gw, se.outer_tilde);
}

template <typename Scalar>
struct ShellSums {
  int r = 0;
  Scalar sum_outer{};        ///< Σ_{E_r} w
  Scalar sum_outer_tilde{};  ///< Σ_{Ẽ_r} w
  Scalar sum_inner_face{};   ///< Σ_{F_r} w
  Scalar sum_abs{};          ///< Σ_{Q_r} Abs
  Scalar sum_scalar{};       ///< Σ_{Q_r} R

  /// Σ R − (Σ_{E_r} w − Σ_{Ẽ_r} w − Σ Abs): the shell-gap form of the cube sum.
  Scalar gap_residual() const { return sum_scalar - (sum_outer - sum_outer_tilde - sum_abs); }

  /// Σ R − (Σ_{F_r} w − Σ_{Ẽ_r} w − Σ Abs): the line-by-line telescoped form,
  /// which holds for every weighting.
  Scalar telescoped_residual() const { return sum_scalar - (sum_inner_face - sum_outer_tilde - sum_abs); }
};

template <typename Scalar>
ShellSums<Scalar> shell_sums(const GridWindow<Scalar>& gw, int r) {
  if (r + 2 > gw.radius()) throw OutOfWindow("shell sums at r need the window radius to be at least r + 2");
  const int n = gw.dimension();
  ShellSums<Scalar> s;
  s.r = r;
  auto se = shell_edges(n, r);
  s.sum_outer = sum_weights(gw, se.outer);
  s.sum_outer_tilde = sum_weights(gw, se.outer_tilde);
  s.sum_inner_face = sum_weights(gw, inner_face_edges(n, r));
  s.sum_abs = Scalar(0);
  s.sum_scalar = Scalar(0);
  for_each_cube_point(n, r, [&](const GridPoint& x) {
    Scalar a = abs_term(gw, x);
    s.sum_abs += a;
    s.sum_scalar += linear_term(gw, x) - a;
  });
  return s;
}

/// |E_r| = 2n(2r+1)^{n−1}.
inline long shell_edge_count(int n, int r) {
  long c = 2L * n;
  for (int i = 1; i < n; ++i) c *= (2L * r + 1);
  return c;
}

}  // namespace admgraph
