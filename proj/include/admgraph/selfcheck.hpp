#pragma once

#include "admgraph/fields.hpp"
#include "admgraph/grid.hpp"
#include "admgraph/instances.hpp"
#include "admgraph/mass.hpp"
#include "admgraph/ollivier.hpp"
#include "admgraph/rigidity.hpp"
#include "admgraph/salami.hpp"
#include "admgraph/torus.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace admgraph::selfcheck {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
  std::optional<double> budget_seconds;
};

struct Options {
  std::uint64_t seed = 20240611;
  unsigned jobs = 1;
};

inline constexpr int kCriterionCount = 10;

// Pinned tolerances and sample sizes.
inline constexpr int kOracleWindows = 200;
inline constexpr int kIdentityMaxShell = 4;
inline constexpr double kSchwarzschildRelativeError = 0.02;
inline constexpr double kSchwarzschildStability = 0.01;  ///< relative spread allowed over the last partials
inline constexpr double kAbsZero = 1e-12;
inline constexpr double kLogGapTolerance = 1e-9;
inline constexpr double kLogMassRelativeError = 0.01;
inline constexpr int kMonotonicityWindows = 50;
inline constexpr int kTorusSamples = 100;
inline constexpr int kExtensionSamples = 100;
inline constexpr double kArtifactFraction = 0.05;

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A weight in (0, 4] with denominator in {1, 2, 3, 4, 6}; a third of all
/// draws are exactly 1 so that ties between parallel edges are common.
inline Rational rational_from_hash(std::uint64_t h) {
  static constexpr long kDenominators[] = {1, 2, 3, 4, 6};
  if (h % 3 == 0) return Rational(1);
  long q = kDenominators[(h >> 8) % 5];
  long p = 1 + static_cast<long>((h >> 16) % static_cast<std::uint64_t>(4 * q));
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline std::string seconds_text(double s) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << s << "s";
  return out.str();
}

inline std::string fraction(long a, long b) { return std::to_string(a) + "/" + std::to_string(b); }

}  // namespace detail

/// Deterministic random rational weight field on all of Z^n: the weight of an
/// edge depends only on (seed, edge), so every window radius sees the same field.
inline WeightProvider<Rational> random_rational_field(int n, std::uint64_t seed) {
  return WeightProvider<Rational>::procedural(
      [n, seed](const GridPoint& base, int axis) {
        std::uint64_t h = detail::splitmix(seed);
        for (int i = 0; i < n; ++i) h = detail::splitmix(h ^ static_cast<std::uint64_t>(base[i] + 4096));
        h = detail::splitmix(h ^ static_cast<std::uint64_t>(axis + 1));
        return detail::rational_from_hash(h);
      },
      std::nullopt, "random-rational");
}

inline std::uint64_t window_seed(const Options& o, int i) { return detail::splitmix(o.seed ^ (0x1000ULL + i)); }

/// Dimension used for randomized window i: half the windows are planar.
inline int window_dimension(int i) { return i < kOracleWindows / 2 ? 2 : 3; }

/// Brute-force κ of every edge inside Q_{ρ−1} and R on Q_{ρ−2}, both compared
/// with the closed forms. Returns the number of mismatches and fills `first`.
struct OracleComparison {
  long edges = 0;
  long vertices = 0;
  long mismatches = 0;
  std::string first;
};

template <typename Scalar>
OracleComparison compare_with_brute_force(const GridWindow<Scalar>& gw, const EnumerationOptions& opts = {}) {
  OracleComparison out;
  const int n = gw.dimension();
  const int rho = gw.radius();
  auto m = materialize(gw);
  std::map<std::pair<GridPoint, int>, Scalar> kappa;  // edge {x, x + e_i}
  for_each_cube_point(n, rho - 1, [&](const GridPoint& x) {
    for (int i = 0; i < n; ++i) {
      GridPoint y = x.shifted(i, 1);
      if (y.linf() > rho - 1) continue;
      Scalar brute = edge_kappa(m.graph, m.at(x), m.at(y), opts);
      Scalar forward = kappa_grid(gw, x, i, 1);
      Scalar backward = kappa_grid(gw, y, i, -1);
      ++out.edges;
      if (!(brute == forward) || !(brute == backward)) {
        if (out.mismatches++ == 0) {
          out.first = "edge " + x.to_string() + "-" + y.to_string() + ": brute " + format_scalar(brute) +
                      ", closed form " + format_scalar(forward);
        }
      }
      kappa.emplace(std::make_pair(x, i), brute);
    }
  });
  for_each_cube_point(n, rho - 2, [&](const GridPoint& x) {
    Scalar brute(0);
    for (int i = 0; i < n; ++i) {
      brute += kappa.at({x, i});
      brute += kappa.at({x.shifted(i, -1), i});
    }
    Scalar closed = scalar_grid(gw, x);
    ++out.vertices;
    if (!(brute == closed)) {
      if (out.mismatches++ == 0) {
        out.first = "vertex " + x.to_string() + ": brute R " + format_scalar(brute) + ", closed form " +
                    format_scalar(closed);
      }
    }
  });
  return out;
}

inline CriterionResult criterion_1(const Options&) {
  CriterionResult res{1, "flat-grid zero curvature", true, "", 0, 10.0};
  std::ostringstream detail;
  for (int n : {2, 3}) {
    GridWindow<Rational> gw(n, 4, WeightProvider<Rational>::constant(Rational(1)));
    auto cmp = compare_with_brute_force(gw);
    long nonzero = 0;
    for_each_cube_point(n, 3, [&](const GridPoint& x) {
      for (int i = 0; i < n; ++i) {
        if (x.shifted(i, 1).linf() <= 3 && kappa_grid(gw, x, i, 1) != 0) ++nonzero;
      }
    });
    for_each_cube_point(n, 2, [&](const GridPoint& x) {
      if (scalar_grid(gw, x) != 0) ++nonzero;
    });
    if (cmp.mismatches || nonzero) res.passed = false;
    detail << "n=" << n << ": " << cmp.edges << " edges, " << cmp.vertices << " vertices, " << nonzero
           << " non-zero, " << cmp.mismatches << " brute/closed mismatches; ";
  }
  res.detail = detail.str();
  return res;
}

inline CriterionResult criterion_2(const Options& o) {
  CriterionResult res{2, "closed form equals exhaustive search", true, "", 0, 120.0};
  std::vector<OracleComparison> results(kOracleWindows);
  parallel_for(kOracleWindows, o.jobs, [&](std::size_t i) {
    int n = window_dimension(static_cast<int>(i));
    GridWindow<Rational> gw(n, 3, random_rational_field(n, window_seed(o, static_cast<int>(i))));
    results[i] = compare_with_brute_force(gw);
  });
  long edges = 0, vertices = 0, bad_windows = 0;
  std::string first;
  for (std::size_t i = 0; i < results.size(); ++i) {
    edges += results[i].edges;
    vertices += results[i].vertices;
    if (results[i].mismatches) {
      if (bad_windows++ == 0) first = " first: window " + std::to_string(i) + " " + results[i].first;
    }
  }
  res.passed = bad_windows == 0;
  res.detail = std::to_string(kOracleWindows) + " windows, " + std::to_string(edges) + " edges, " +
               std::to_string(vertices) + " vertices, " + std::to_string(bad_windows) + " windows with mismatches" +
               first;
  return res;
}

inline CriterionResult criterion_3(const Options& o) {
  CriterionResult res{3, "cube-sum identity with E_r and E~_r", true, "", 0, std::nullopt};
  struct Row {
    int failures = 0;
    int telescoped_failures = 0;
    std::string first;
  };
  std::vector<Row> rows(kOracleWindows);
  parallel_for(kOracleWindows, o.jobs, [&](std::size_t i) {
    int n = window_dimension(static_cast<int>(i));
    GridWindow<Rational> gw(n, kIdentityMaxShell + 2, random_rational_field(n, window_seed(o, static_cast<int>(i))));
    for (int r = 0; r <= kIdentityMaxShell; ++r) {
      auto s = shell_sums(gw, r);
      if (s.gap_residual() != 0) {
        if (rows[i].failures++ == 0) {
          rows[i].first = "window " + std::to_string(i) + " (n=" + std::to_string(n) + "), r=" + std::to_string(r) +
                          ": sum R = " + format_scalar(s.sum_scalar) + ", right side = " +
                          format_scalar(Rational(s.sum_outer - s.sum_outer_tilde - s.sum_abs));
        }
      }
      if (s.telescoped_residual() != 0) ++rows[i].telescoped_failures;
    }
  });
  long failures = 0, windows_failing = 0, telescoped = 0;
  std::string first;
  for (const auto& row : rows) {
    failures += row.failures;
    telescoped += row.telescoped_failures;
    if (row.failures && windows_failing++ == 0) first = row.first;
  }
  const long checks = static_cast<long>(kOracleWindows) * (kIdentityMaxShell + 1);
  res.passed = failures == 0;
  res.detail = "identity fails in " + detail::fraction(failures, checks) + " (window, r) pairs over " +
               std::to_string(windows_failing) + " windows";
  if (!first.empty()) res.detail += "; first: " + first;
  res.detail += "; the form with the inner face F_r in place of E_r fails in " + detail::fraction(telescoped, checks);
  return res;
}

inline CriterionResult criterion_4(const Options&) {
  CriterionResult res{4, "split-vertex and split-cycle examples", true, "", 0, std::nullopt};
  std::ostringstream detail;
  auto g1 = split_vertex_graph<Rational>();
  VertexId a = g1.at("a"), b = g1.at("b");
  long other_nonzero = 0;
  std::optional<Rational> kab;
  for (const auto& out : all_edge_curvatures(g1, {}, 1)) {
    if (!out.kappa) throw Error("edge evaluation failed: " + out.error);
    bool is_ab = (out.u == a && out.v == b) || (out.u == b && out.v == a);
    if (is_ab) {
      kab = *out.kappa;
    } else if (*out.kappa != 0) {
      ++other_nonzero;
    }
  }
  // The same graph read with m ≡ 1 gives a different κ(a,b): the vertex
  // measure really enters the computation.
  GraphBuilder<Rational> plain;
  for (VertexId v = 0; v < g1.vertex_count(); ++v) plain.add_vertex(g1.label(v));
  for (const auto& e : g1.edges()) plain.add_edge(e.u, e.v, e.weight);
  auto g1_unit = std::move(plain).build();
  Rational kab_unit = edge_kappa(g1_unit, a, b);
  bool ok1 = kab && *kab == 5 && other_nonzero == 0 && g1.has_vertex_weights() && kab_unit != 5;
  detail << "split-vertex: kappa(a,b) = " << (kab ? format_scalar(*kab) : "?") << ", " << other_nonzero << " of "
         << g1.edges().size() - 1 << " other edges non-zero, kappa(a,b) with m=1 would be "
         << format_scalar(kab_unit) << "; ";
  auto g2 = split_cycle_graph<Rational>();
  long nonzero2 = 0;
  for (const auto& out : all_edge_curvatures(g2, {}, 1)) {
    if (!out.kappa) throw Error("edge evaluation failed: " + out.error);
    if (*out.kappa != 0) ++nonzero2;
  }
  detail << "split-cycle: " << nonzero2 << " of " << g2.edges().size() << " edges non-zero";
  res.passed = ok1 && nonzero2 == 0;
  res.detail = detail.str();
  return res;
}

inline CriterionResult criterion_5(const Options& o) {
  CriterionResult res{5, "Schwarzschild mass reproduction", true, "", 0, 60.0};
  std::ostringstream detail;
  std::mt19937_64 rng(o.seed ^ 0x5c4a);
  for (double m : {0.5, 1.0, 2.0}) {
    GridWindow<double> gw(3, 52, schwarzschild_field(3, m));
    auto est = mass_estimate(gw, 50, kSchwarzschildStability * m);
    double value = est.value.value_or(est.extrapolated);
    double rel = std::fabs(value - m) / m;
    bool mass_ok = est.converged && rel <= kSchwarzschildRelativeError;
    std::uniform_int_distribution<int> any(-50, 50), far(10, 50);
    int abs_bad = 0, scalar_bad = 0;
    for (int s = 0; s < 100; ++s) {
      GridPoint x{any(rng), any(rng), any(rng)};
      if (std::fabs(abs_term(gw, x)) > kAbsZero) ++abs_bad;
    }
    for (int s = 0; s < 20; ++s) {
      GridPoint x{far(rng), far(rng), far(rng)};
      if (!(scalar_grid(gw, x) < 0)) ++scalar_bad;
    }
    if (!mass_ok || abs_bad || scalar_bad) res.passed = false;
    detail << "m=" << m << ": estimate " << value << " (M_50 " << est.last_partial << ", rel. error " << rel
           << (est.converged ? "" : ", not converged") << "), Abs!=0 at " << abs_bad << "/100, R>=0 at "
           << scalar_bad << "/20; ";
  }
  res.detail = detail.str();
  return res;
}

inline CriterionResult criterion_6(const Options&) {
  CriterionResult res{6, "two-dimensional log model", true, "", 0, std::nullopt};
  std::ostringstream detail;
  for (double m : {0.01, 0.05, 0.1}) {
    GridWindow<double> gw(2, 102, log_model_field(m, 102));
    double worst = 0;
    for (int r = 1; r <= 100; ++r) {
      double expected = 4.0 * (2 * r + 1) * m * std::log1p(1.0 / r);
      worst = std::max(worst, std::fabs(shell_gap(gw, r) - expected));
    }
    double m100 = shell_gap(gw, 100) / 8.0;
    double rel = std::fabs(m100 - m) / m;
    if (worst > kLogGapTolerance || rel > kLogMassRelativeError) res.passed = false;
    detail << "m=" << m << ": max gap deviation " << worst << ", M_100 = " << m100 << " (rel. error " << rel
           << "); ";
  }
  res.detail = detail.str();
  return res;
}

namespace detail {

using EdgeTable = std::unordered_map<GridEdge, Rational, GridEdgeHash>;

inline GridWindow<Rational> table_window(int n, int rho, const EdgeTable& table) {
  return GridWindow<Rational>(n, rho, WeightProvider<Rational>::table(table, Rational(1), std::nullopt));
}

template <typename Fn>
void for_each_window_edge(int n, int rho, Fn&& fn) {
  for_each_cube_point(n, rho, [&](const GridPoint& x) {
    for (int i = 0; i < n; ++i) {
      if (x.shifted(i, 1).linf() <= rho) fn(GridEdge{x, i});
    }
  });
}

/// Concave axial profiles: the weight of {x, x + e_i} depends on x_i alone
/// and has non-increasing increments, so Abs ≡ 0 and R ≥ 0 everywhere.
inline EdgeTable concave_axial_window(int n, int rho, std::mt19937_64& rng) {
  std::vector<std::vector<Rational>> profile(n);
  std::uniform_int_distribution<int> slope(0, 8);
  for (int i = 0; i < n; ++i) {
    std::vector<int> inc(2 * rho);
    for (auto& d : inc) d = slope(rng) - 4;
    std::sort(inc.begin(), inc.end(), std::greater<>());
    std::vector<Rational> a(2 * rho);
    Rational value(0);
    for (int k = 0; k < 2 * rho; ++k) {
      a[k] = value;
      if (k + 1 < 2 * rho) value += Rational(inc[k], 8);
    }
    Rational lo = *std::min_element(a.begin(), a.end());
    for (auto& v : a) v += Rational(1) - lo;
    profile[i] = std::move(a);
  }
  EdgeTable t;
  for_each_window_edge(n, rho, [&](const GridEdge& e) { t[e] = profile[e.axis][e.base[e.axis] + rho]; });
  return t;
}

inline bool scalar_nonnegative(const GridWindow<Rational>& gw, int r_max) {
  bool ok = true;
  for_each_cube_point(gw.dimension(), r_max, [&](const GridPoint& x) {
    if (ok && scalar_grid(gw, x) < 0) ok = false;
  });
  return ok;
}

}  // namespace detail

inline CriterionResult criterion_7(const Options& o) {
  CriterionResult res{7, "monotone partial sums and window rigidity", true, "", 0, std::nullopt};
  std::mt19937_64 rng(o.seed ^ 0x7e57);
  int monotone = 0, perturbed = 0, rejected_draws = 0;
  for (int w = 0; w < kMonotonicityWindows; ++w) {
    const int n = w % 2 == 0 ? 2 : 3;
    const int rho = n == 2 ? 6 : 5;
    const int r_max = rho - 2;
    auto table = detail::concave_axial_window(n, rho, rng);
    std::vector<GridEdge> edges;
    detail::for_each_window_edge(n, rho, [&](const GridEdge& e) { edges.push_back(e); });
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    std::uniform_int_distribution<int> delta(-2, 2), count(1, 4);
    for (int attempt = 0; attempt < 20; ++attempt) {
      auto candidate = table;
      for (int c = count(rng); c > 0; --c) {
        auto& v = candidate[edges[pick(rng)]];
        Rational shifted = v + Rational(delta(rng), 32);
        if (shifted > 0) v = shifted;
      }
      if (detail::scalar_nonnegative(detail::table_window(n, rho, candidate), r_max)) {
        table = std::move(candidate);
        ++perturbed;
        break;
      }
      ++rejected_draws;
    }
    auto gw = detail::table_window(n, rho, table);
    auto rep = window_rigidity_check(gw, r_max);
    if (rep.scalar_nonnegative && rep.partial_sums_monotone) ++monotone;
  }

  // Rigidity: candidates with trivial weights from shell r_max outwards.
  int candidates = 0, premises = 0, violations = 0, trivial_premises = 0;
  auto examine = [&](int n, int rho, int r_max, const detail::EdgeTable& table) {
    auto rep = window_rigidity_check(detail::table_window(n, rho, table), r_max);
    ++candidates;
    if (!rep.outer_trivial || rep.outer_gap != 0) throw Error("internal: rigidity candidate has non-trivial outer weights");
    if (rep.premises) {
      ++premises;
      if (rep.weights_trivial) ++trivial_premises;
    }
    if (!rep.conclusion_holds) ++violations;
  };
  for (int n : {2, 3}) {
    const int r_max = n == 2 ? 3 : 2;
    const int rho = r_max + 2;
    std::vector<GridEdge> inner;
    detail::for_each_window_edge(n, rho, [&](const GridEdge& e) {
      if (std::max(e.base.linf(), e.base.shifted(e.axis, 1).linf()) < r_max) inner.push_back(e);
    });
    examine(n, rho, r_max, {});
    for (const auto& e : inner) {
      for (Rational w : {Rational(1, 2), Rational(3, 2)}) examine(n, rho, r_max, {{e, w}});
    }
    std::uniform_int_distribution<std::size_t> pick(0, inner.size() - 1);
    std::uniform_int_distribution<int> count(2, 5);
    for (int s = 0; s < 40; ++s) {
      detail::EdgeTable t;
      for (int c = count(rng); c > 0; --c) t[inner[pick(rng)]] = detail::rational_from_hash(rng());
      examine(n, rho, r_max, t);
    }
  }
  res.passed = monotone == kMonotonicityWindows && violations == 0 && premises >= 2;
  res.detail = "partial sums non-decreasing with R>=0 on " + detail::fraction(monotone, kMonotonicityWindows) +
               " windows (" + std::to_string(perturbed) + " perturbed, " + std::to_string(rejected_draws) +
               " perturbations rejected); rigidity: " + std::to_string(candidates) + " candidates with M=0 and w=1 outside, " +
               std::to_string(premises) + " with R>=0, of which " + std::to_string(trivial_premises) +
               " have w=1 everywhere, " + std::to_string(violations) + " counterexamples";
  return res;
}

struct TorusSample {
  std::string family;
  long k = 0;
  bool distance_condition = false;
  bool total_nonpositive = true;
  bool decomposition = true;
  bool cycles_nonpositive = true;
  bool nonnegative_scalar = false;
  bool flat_if_nonnegative = true;
  Rational total;
};

template <typename Scalar>
TorusSample evaluate_torus(const TorusSpec& spec, const std::vector<TorusWeight<Scalar>>& weights,
                           const std::string& family) {
  auto t = build_torus<Scalar>(spec, weights);
  auto tot = total_scalar_curvature(t);
  TorusSample s;
  s.family = family;
  s.k = spec.k;
  s.distance_condition = tot.distance_condition;
  s.total = tot.total;
  s.total_nonpositive = !(tot.total > 0);
  s.decomposition = tot.total == tot.decomposed;
  for (int i = 0; i < t.dimension(); ++i) {
    for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
      if (cycle_sum(t, v, i).sum > 0) s.cycles_nonpositive = false;
    }
  }
  s.nonnegative_scalar = true;
  bool all_zero = true;
  for (const auto& r : tot.scalar) {
    if (r < 0) s.nonnegative_scalar = false;
    if (r != 0) all_zero = false;
  }
  s.flat_if_nonnegative = !s.nonnegative_scalar || all_zero;
  return s;
}

inline std::vector<TorusWeight<Rational>> random_torus_weights(const TorusSpec& spec, std::mt19937_64& rng) {
  auto t = build_torus<Rational>(spec);
  std::vector<TorusWeight<Rational>> w;
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    for (int d = 0; d < spec.dimension(); ++d) w.push_back({t.representative(v), d, detail::rational_from_hash(rng())});
  }
  return w;
}

inline std::vector<TorusWeight<Rational>> direction_constant_weights(const TorusSpec& spec, std::mt19937_64& rng) {
  auto t = build_torus<Rational>(spec);
  std::vector<Rational> c(spec.dimension());
  for (auto& v : c) v = detail::rational_from_hash(rng() | 1);
  std::vector<TorusWeight<Rational>> w;
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    for (int d = 0; d < spec.dimension(); ++d) w.push_back({t.representative(v), d, c[d]});
  }
  return w;
}

inline CriterionResult criterion_8(const Options& o) {
  CriterionResult res{8, "torus total scalar curvature", true, "", 0, 120.0};
  std::mt19937_64 rng(o.seed ^ 0x7005);
  struct Job {
    TorusSpec spec;
    std::vector<TorusWeight<Rational>> weights;
    std::string family;
  };
  std::vector<Job> jobs;
  auto family = [&](const TorusSpec& spec, const std::string& name, int random_count) {
    jobs.push_back({spec, {}, name + " unit"});
    jobs.push_back({spec, direction_constant_weights(spec, rng), name + " direction-constant"});
    for (int i = 0; i < random_count; ++i) jobs.push_back({spec, random_torus_weights(spec, rng), name + " random"});
  };
  for (long k : {5, 6, 7}) family(identity_torus_spec(2, k), "identity k=" + std::to_string(k), 28);
  auto k7 = minimal_k_for_distance_condition(det7_torus_spec().A, 12);
  if (!k7) throw Error("no k up to 12 satisfies the distance condition for the det-7 torus");
  family(det7_torus_spec(*k7), "det-7 k=" + std::to_string(*k7), 10);

  std::vector<TorusSample> samples(jobs.size());
  parallel_for(jobs.size(), o.jobs, [&](std::size_t i) {
    samples[i] = evaluate_torus(jobs[i].spec, jobs[i].weights, jobs[i].family);
  });
  struct Tally {
    int count = 0, positive_total = 0, decomposition = 0, cycles = 0, nonneg = 0, nonneg_not_flat = 0;
    bool distance = true;
  };
  std::map<std::string, Tally> by_group;
  for (const auto& s : samples) {
    std::string group = s.family.substr(0, s.family.find(' ', s.family.find(' ') + 1));
    auto& t = by_group[group];
    ++t.count;
    t.distance = t.distance && s.distance_condition;
    if (!s.total_nonpositive) ++t.positive_total;
    if (!s.decomposition) ++t.decomposition;
    if (!s.cycles_nonpositive) ++t.cycles;
    if (s.nonnegative_scalar) ++t.nonneg;
    if (!s.flat_if_nonnegative) ++t.nonneg_not_flat;
    if (!s.total_nonpositive || !s.decomposition || !s.flat_if_nonnegative) res.passed = false;
  }
  std::ostringstream detail;
  detail << samples.size() << " tori; ";
  for (const auto& [group, t] : by_group) {
    detail << group << " (" << (t.distance ? "distance condition holds" : "distance condition fails") << "): "
           << t.positive_total << "/" << t.count << " with positive total, " << t.decomposition
           << " decomposition mismatches, " << t.cycles << " positive cycle sums, " << t.nonneg << " with R>=0 of which "
           << t.nonneg_not_flat << " not flat; ";
  }
  res.detail = detail.str();
  return res;
}

inline CriterionResult criterion_9(const Options& o) {
  CriterionResult res{9, "rigidity pipeline", true, "", 0, 120.0};
  RigidityOptions ro;
  ro.jobs = o.jobs;
  std::ostringstream detail;
  for (auto [n, r] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{3, 1}}) {
    for (std::uint64_t s = 0; s < 2; ++s) {
      auto rep = rigidity_check(standard_afg<Rational>(n, r, std::nullopt, o.seed + s), ro);
      if (!rep.verdict) res.passed = false;
      detail << "standard n=" << n << " r=" << r << " seed " << s << ": "
             << (rep.verdict ? "standard grid" : "rejected at " + rep.failed_stage.value_or("?")) << "; ";
    }
  }
  auto ex1 = rigidity_check(split_vertex_afg<Rational>(), ro);
  bool ex1_ok = !ex1.verdict && ex1.failed_stage == "multiplicity";
  detail << "split-vertex core: " << (ex1.verdict ? "accepted" : "rejected at " + ex1.failed_stage.value_or("?"));
  if (!ex1.bounds.empty() && ex1.bounds.front().constructed) {
    detail << " (test-function bound " << format_scalar(ex1.bounds.front().bound) << " with vertex weights, "
           << format_scalar(ex1.bounds.front().formula) << " for m=1)";
  }
  detail << "; ";
  auto bad = rigidity_check(standard_afg<Rational>(2, 1, std::nullopt, o.seed, Rational(3, 2)), ro);
  bool bad_ok = !bad.verdict && bad.failed_stage == "curvature_certificate";
  detail << "perturbed core: " << (bad.verdict ? "accepted" : "rejected at " + bad.failed_stage.value_or("?"));
  if (!bad.verdict) detail << " (" << bad.stages.back().detail << ")";
  res.passed = res.passed && ex1_ok && bad_ok;
  res.detail = detail.str();
  return res;
}

/// A unit grid strip [−L, L] × [0, W) cut by a jagged separator.
struct StripSample {
  WeightedGraph<Rational> graph;
  SalamiPartition partition;
  PotentialFunction<Rational> f;
  std::vector<VertexId> boundary;
  bool harmonic_family = false;
};

inline StripSample random_strip_sample(std::mt19937_64& rng, bool harmonic_family) {
  std::uniform_int_distribution<int> length(7, 11), width(2, 6), thick(0, 2), step(-1, 1), shift(-3, 3);
  const int L = length(rng), W = width(rng);
  GraphBuilder<Rational> b;
  auto id = [&](int x, int y) { return static_cast<VertexId>((x + L) * W + y); };
  for (int x = -L; x <= L; ++x) {
    for (int y = 0; y < W; ++y) b.add_vertex("(" + std::to_string(x) + "," + std::to_string(y) + ")");
  }
  for (int x = -L; x <= L; ++x) {
    for (int y = 0; y < W; ++y) {
      if (x < L) b.add_edge(id(x, y), id(x + 1, y), Rational(1));
      if (y + 1 < W) b.add_edge(id(x, y), id(x, y + 1), Rational(1));
    }
  }
  StripSample s;
  s.graph = std::move(b).build();
  s.harmonic_family = harmonic_family;
  std::vector<int> c(W), t(W);
  c[0] = shift(rng) / 2;
  for (int y = 0; y < W; ++y) {
    if (y > 0) c[y] = std::clamp(c[y - 1] + step(rng), -L + 4, L - 6);
    t[y] = thick(rng);
  }
  for (int x = -L; x <= L; ++x) {
    for (int y = 0; y < W; ++y) {
      if (x < c[y]) {
        s.partition.X.push_back(id(x, y));
      } else if (x > c[y] + t[y]) {
        s.partition.Y.push_back(id(x, y));
      } else {
        s.partition.K.push_back(id(x, y));
      }
    }
    for (int y = 0; y < W; ++y) {
      if (x == -L || x == L) s.boundary.push_back(id(x, y));
    }
  }
  s.f = PotentialFunction<Rational>(s.graph.vertex_count());
  if (harmonic_family) {
    int offset = shift(rng);
    for (VertexId v : s.partition.K) s.f.set(v, Rational(static_cast<int>(v / W) - L + offset));
  } else {
    // f = min over seeds of (a_s + d(·, s)) is 1-Lipschitz for the graph distance.
    std::uniform_int_distribution<std::size_t> pick(0, s.partition.K.size() - 1);
    std::uniform_int_distribution<int> base(-2, 2), seeds(1, 3);
    std::vector<std::pair<int, std::vector<int>>> sources;
    for (int k = seeds(rng); k > 0; --k) sources.emplace_back(base(rng), bfs_distances(s.graph, s.partition.K[pick(rng)]));
    for (VertexId v : s.partition.K) {
      int best = std::numeric_limits<int>::max();
      for (const auto& [a, d] : sources) best = std::min(best, a + d[v]);
      s.f.set(v, Rational(best));
    }
  }
  return s;
}

inline CriterionResult criterion_10(const Options& o) {
  CriterionResult res{10, "extremal extension properties", true, "", 0, std::nullopt};
  std::mt19937_64 rng(o.seed ^ 0x5a1a);
  int lipschitz = 0, restricted = 0, harmonic = 0, propagated = 0, artifacts = 0;
  for (int i = 0; i < kExtensionSamples; ++i) {
    auto s = random_strip_sample(rng, i % 2 == 0);
    auto sf = extremal_extension(s.graph, s.partition, s.f);
    std::vector<VertexId> all(s.graph.vertex_count());
    for (VertexId v = 0; v < all.size(); ++v) all[v] = v;
    if (is_lipschitz(s.graph, sf, Rational(1), std::span<const VertexId>(all)).holds) ++lipschitz;
    bool same = true;
    for (VertexId v : s.partition.K) same = same && sf(v) == s.f(v);
    if (same) ++restricted;
    auto prop = harmonicity_propagation_check(s.graph, s.partition, sf, s.boundary);
    if (!prop.harmonic_on_core) continue;
    if (!prop.truncation_artifacts.empty()) {
      ++artifacts;
      continue;
    }
    ++harmonic;
    if (prop.violations.empty()) ++propagated;
  }
  res.passed = lipschitz == kExtensionSamples && restricted == kExtensionSamples && propagated == harmonic &&
               harmonic > 0 && artifacts < kArtifactFraction * kExtensionSamples;
  res.detail = "Sf 1-Lipschitz in " + detail::fraction(lipschitz, kExtensionSamples) + ", Sf|K = f in " +
               detail::fraction(restricted, kExtensionSamples) + ", harmonic on K in " + std::to_string(harmonic) +
               " samples, propagation holds in " + detail::fraction(propagated, harmonic) +
               ", harmonic samples excluded as truncation artifacts: " + detail::fraction(artifacts, kExtensionSamples);
  return res;
}

inline CriterionResult run_criterion(int id, const Options& o = {}) {
  static const std::vector<std::function<CriterionResult(const Options&)>> table = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  if (id < 1 || id > kCriterionCount) throw DomainError("unknown criterion " + std::to_string(id));
  auto start = std::chrono::steady_clock::now();
  CriterionResult res;
  try {
    res = table[id - 1](o);
  } catch (const std::exception& e) {
    res.id = id;
    res.passed = false;
    res.detail = std::string("error: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (res.budget_seconds && res.seconds >= *res.budget_seconds) {
    res.passed = false;
    res.detail += " [over the " + detail::seconds_text(*res.budget_seconds) + " budget]";
  }
  return res;
}

inline std::string format_result(const CriterionResult& r) {
  return "criterion " + std::to_string(r.id) + ": " + (r.passed ? "PASS" : "FAIL") + " - " + r.title + " (" +
         detail::seconds_text(r.seconds) + ") " + r.detail;
}

}  // namespace admgraph::selfcheck
