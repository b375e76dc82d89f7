#pragma once

#include "admgraph/grid.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace admgraph {

namespace detail {

/// Solves a small dense system by Gaussian elimination; returns nullopt when singular.
template <typename Scalar>
std::optional<std::vector<Scalar>> solve_dense(std::vector<std::vector<Scalar>> a, std::vector<Scalar> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col; r < n; ++r) {
      if (abs_value(a[r][col]) > abs_value(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == Scalar(0)) return std::nullopt;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == Scalar(0)) continue;
      Scalar factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<Scalar> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

/// Least-squares coefficients of y against the basis functions evaluated at each sample.
template <typename Scalar>
std::optional<std::vector<Scalar>> least_squares(const std::vector<std::vector<Scalar>>& basis,
                                                 const std::vector<Scalar>& y) {
  const std::size_t m = basis.empty() ? 0 : basis.front().size();
  std::vector<std::vector<Scalar>> normal(m, std::vector<Scalar>(m, Scalar(0)));
  std::vector<Scalar> rhs(m, Scalar(0));
  for (std::size_t s = 0; s < y.size(); ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      rhs[i] += basis[s][i] * y[s];
      for (std::size_t j = 0; j < m; ++j) normal[i][j] += basis[s][i] * basis[s][j];
    }
  }
  return solve_dense(std::move(normal), std::move(rhs));
}

}  // namespace detail

/// Power-law fit value ≈ C·r^{−exponent} over the shells where the value is non-zero.
struct DecayFit {
  bool identically_zero = true;
  int usable_shells = 0;
  double exponent = std::numeric_limits<double>::infinity();
  double log_constant = 0;
};

inline DecayFit fit_decay(const std::vector<int>& radii, const std::vector<double>& values,
                          double zero_threshold = 0.0) {
  DecayFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (values[i] > zero_threshold) fit.identically_zero = false;
    if (radii[i] >= 1 && values[i] > zero_threshold) {
      xs.push_back(std::log(static_cast<double>(radii[i])));
      ys.push_back(std::log(values[i]));
    }
  }
  fit.usable_shells = static_cast<int>(xs.size());
  if (xs.size() < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  double slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.exponent = -slope;
  fit.log_constant = my - slope * mx;
  return fit;
}

template <typename Scalar>
struct MassEstimate {
  std::vector<Scalar> gaps;      ///< Σ_{E_r} w − Σ_{Ẽ_r} w for r = 0..r_max
  std::vector<Scalar> partials;  ///< M_r = gap_r / (2^n n)
  bool converged = false;
  std::optional<Scalar> value;  ///< limit estimate, present when converged
  Scalar last_partial{};
  Scalar extrapolated{};
  int fit_from = 0;  ///< first radius used by the tail fit
  double tail_slope = 0;
};

/// Partial masses M_r and a limit estimate. Convergence means the last
/// k_stable partial values lie within `tolerance` of each other. The limit is
/// estimated by fitting a + b/r + c/r² to the upper half of the partials.
template <typename Scalar>
MassEstimate<Scalar> mass_estimate(const GridWindow<Scalar>& gw, int r_max, const Scalar& tolerance,
                                   int k_stable = 5) {
  if (r_max < 0) throw DomainError("r_max must be non-negative");
  if (r_max + 2 > gw.radius()) throw OutOfWindow("mass estimate needs window radius >= r_max + 2");
  if (k_stable < 1 || k_stable > r_max + 1) throw DomainError("k_stable must lie in [1, r_max + 1]");
  const int n = gw.dimension();
  Scalar norm(1);
  for (int i = 0; i < n; ++i) norm *= Scalar(2);
  norm *= Scalar(n);

  MassEstimate<Scalar> est;
  for (int r = 0; r <= r_max; ++r) {
    Scalar gap = shell_gap(gw, r);
    est.partials.push_back(gap / norm);
    est.gaps.push_back(std::move(gap));
  }
  est.last_partial = est.partials.back();

  Scalar lo = est.partials[r_max + 1 - k_stable];
  Scalar hi = lo;
  for (int r = r_max + 1 - k_stable; r <= r_max; ++r) {
    if (est.partials[r] < lo) lo = est.partials[r];
    if (hi < est.partials[r]) hi = est.partials[r];
  }
  est.converged = !(tolerance < Scalar(hi - lo));

  est.fit_from = std::max(1, r_max / 2);
  est.extrapolated = est.last_partial;
  if (r_max - est.fit_from + 1 >= 3) {
    std::vector<std::vector<Scalar>> basis;
    std::vector<Scalar> ys;
    for (int r = est.fit_from; r <= r_max; ++r) {
      Scalar inv = Scalar(1) / Scalar(r);
      basis.push_back({Scalar(1), inv, Scalar(inv * inv)});
      ys.push_back(est.partials[r]);
    }
    if (auto coef = detail::least_squares(basis, ys)) est.extrapolated = (*coef)[0];
  }
  if (est.converged) est.value = est.extrapolated;

  std::vector<int> radii;
  std::vector<double> steps;
  for (int r = est.fit_from; r < r_max; ++r) {
    radii.push_back(r);
    steps.push_back(std::fabs(to_double(est.partials[r + 1]) - to_double(est.partials[r])));
  }
  auto fit = fit_decay(radii, steps, 0.0);
  est.tail_slope = fit.identically_zero || fit.usable_shells < 2 ? 0.0 : -fit.exponent;
  return est;
}

struct ShellProfile {
  std::vector<int> radii;
  std::vector<double> weight_outer;  ///< max |w − 1| over E_r
  std::vector<double> weight_all;    ///< max |w − 1| over edges whose outer end lies on S_r
  std::vector<double> abs_max;       ///< max Abs over S_r
  std::vector<double> scalar_max;    ///< max |R| over S_r
  std::vector<double> consecutive;   ///< max |w(x,y) − w(y,z)| over collinear pairs centred on S_r
};

/// Per-shell maxima for r in [r_min, ρ − 2].
template <typename Scalar>
ShellProfile shell_profile(const GridWindow<Scalar>& gw, int r_min = 1) {
  const int n = gw.dimension();
  ShellProfile prof;
  for (int r = std::max(0, r_min); r + 2 <= gw.radius(); ++r) {
    double w_outer = 0, w_all = 0, a_max = 0, r_max = 0, c_max = 0;
    for (const auto& e : shell_edges(n, r).outer) {
      w_outer = std::max(w_outer, std::fabs(to_double(gw.weight(e.base, e.axis)) - 1.0));
    }
    for_each_shell_point(n, r, [&](const GridPoint& y) {
      for (int i = 0; i < n; ++i) {
        for (int s : {1, -1}) {
          if (y.shifted(i, s).linf() <= r) {
            w_all = std::max(w_all, std::fabs(to_double(gw.weight_step(y, i, s)) - 1.0));
          }
        }
        double d = to_double(gw.weight_step(y, i, 1)) - to_double(gw.weight_step(y, i, -1));
        c_max = std::max(c_max, std::fabs(d));
      }
      Scalar a = abs_term(gw, y);
      a_max = std::max(a_max, std::fabs(to_double(a)));
      r_max = std::max(r_max, std::fabs(to_double(Scalar(linear_term(gw, y) - a))));
    });
    w_all = std::max(w_all, w_outer);
    prof.radii.push_back(r);
    prof.weight_outer.push_back(w_outer);
    prof.weight_all.push_back(w_all);
    prof.abs_max.push_back(a_max);
    prof.scalar_max.push_back(r_max);
    prof.consecutive.push_back(c_max);
  }
  return prof;
}

struct FlatnessDiagnostics {
  ShellProfile profile;
  DecayFit weight_outer_fit;
  DecayFit weight_all_fit;
  DecayFit abs_fit;
  DecayFit scalar_fit;
  double p_claimed = 0;
  double slack = 0;
  bool weights_tend_to_one = false;
  bool abs_decays = false;
  bool scalar_decays = false;
  bool exponent_admissible = false;
  bool verdict = false;
};

/// Fits decay exponents of |w − 1|, Abs and |R| and tests them against a claimed
/// exponent p > n. A quantity that vanishes on every shell passes trivially; any
/// other quantity needs at least four usable shells.
template <typename Scalar>
FlatnessDiagnostics flatness_diagnostics(const GridWindow<Scalar>& gw, double p_claimed, double slack = 0.25,
                                         int r_min = 1, double zero_threshold = 1e-14) {
  FlatnessDiagnostics d;
  d.profile = shell_profile(gw, r_min);
  d.p_claimed = p_claimed;
  d.slack = slack;
  const auto& radii = d.profile.radii;
  d.weight_outer_fit = fit_decay(radii, d.profile.weight_outer, zero_threshold);
  d.weight_all_fit = fit_decay(radii, d.profile.weight_all, zero_threshold);
  d.abs_fit = fit_decay(radii, d.profile.abs_max, zero_threshold);
  d.scalar_fit = fit_decay(radii, d.profile.scalar_max, zero_threshold);
  for (const DecayFit* f : {&d.weight_outer_fit, &d.weight_all_fit, &d.abs_fit, &d.scalar_fit}) {
    if (!f->identically_zero && f->usable_shells < 4) {
      throw DomainError("fewer than 4 usable shells for a decay fit; enlarge the window");
    }
  }
  d.weights_tend_to_one = d.weight_all_fit.identically_zero || d.weight_all_fit.exponent > slack;
  d.abs_decays = d.abs_fit.identically_zero || d.abs_fit.exponent >= p_claimed - slack;
  d.scalar_decays = d.scalar_fit.identically_zero || d.scalar_fit.exponent >= p_claimed - slack;
  d.exponent_admissible = gw.dimension() >= 2 && p_claimed > gw.dimension();
  d.verdict = d.weights_tend_to_one && d.abs_decays && d.scalar_decays && d.exponent_admissible;
  return d;
}

template <typename Scalar>
struct StrongDecayReport {
  ShellProfile profile;
  DecayFit weight_fit;
  DecayFit consecutive_fit;
  bool weight_hypothesis = false;
  bool consecutive_hypothesis = false;
  bool exponent_hypothesis = false;
  bool hypotheses_hold = false;
  double fitted_constant = 0;
  std::vector<int> gap_radii;
  std::vector<double> gap_magnitude;
  std::vector<double> gap_bound;
  bool gap_bound_holds = false;
  std::vector<double> partial_masses;
  DecayFit mass_fit;
  bool mass_tends_to_zero = false;
};

/// Tests w = 1 + O(|x|^{−p}) and |w(x,y) − w(y,z)| = O(|x|^{−p−1}) on collinear
/// pairs with p > n − 2. Only when all three hold does it assert the gap bound
/// |gap_r| ≤ 2n(2r+1)^{n−1}·C·r^{−p−1} and that M_r tends to zero.
template <typename Scalar>
StrongDecayReport<Scalar> strong_decay_check(const GridWindow<Scalar>& gw, double p, double slack = 0.25,
                                             int r_min = 2, double zero_threshold = 1e-14) {
  StrongDecayReport<Scalar> rep;
  const int n = gw.dimension();
  rep.profile = shell_profile(gw, r_min);
  rep.weight_fit = fit_decay(rep.profile.radii, rep.profile.weight_all, zero_threshold);
  rep.consecutive_fit = fit_decay(rep.profile.radii, rep.profile.consecutive, zero_threshold);
  rep.weight_hypothesis = rep.weight_fit.identically_zero || rep.weight_fit.exponent >= p - slack;
  rep.consecutive_hypothesis =
      rep.consecutive_fit.identically_zero || rep.consecutive_fit.exponent >= p + 1 - slack;
  rep.exponent_hypothesis = p > n - 2;
  rep.hypotheses_hold = rep.weight_hypothesis && rep.consecutive_hypothesis && rep.exponent_hypothesis;
  if (!rep.hypotheses_hold) return rep;

  for (std::size_t i = 0; i < rep.profile.radii.size(); ++i) {
    double r = rep.profile.radii[i];
    rep.fitted_constant = std::max(rep.fitted_constant, rep.profile.consecutive[i] * std::pow(r, p + 1));
  }
  double norm = std::pow(2.0, n) * n;
  rep.gap_bound_holds = true;
  std::vector<int> mass_radii;
  for (int r = std::max(1, r_min); r + 2 <= gw.radius(); ++r) {
    double gap = std::fabs(to_double(shell_gap(gw, r)));
    double bound = shell_edge_count(n, r) * rep.fitted_constant * std::pow(static_cast<double>(r), -p - 1);
    rep.gap_radii.push_back(r);
    rep.gap_magnitude.push_back(gap);
    rep.gap_bound.push_back(bound);
    if (gap > bound * (1 + 1e-9) + zero_threshold) rep.gap_bound_holds = false;
    rep.partial_masses.push_back(gap / norm);
    mass_radii.push_back(r);
  }
  rep.mass_fit = fit_decay(mass_radii, rep.partial_masses, zero_threshold);
  rep.mass_tends_to_zero = rep.mass_fit.identically_zero || rep.mass_fit.exponent > 0;
  return rep;
}

template <typename Scalar>
struct LineConcavityReport {
  GridPoint base;
  int axis = 0;
  int k_lo = 0;  ///< the line's edges are {base + k e, base + (k+1) e}, k_lo ≤ k ≤ k_hi
  int k_hi = 0;
  std::vector<Scalar> weights;
  bool positive = true;
  bool concave = true;
  bool constant = true;
  bool kappa_nonnegative = true;  ///< on edges of the line whose closed-form stencil fits
  std::optional<long> violation_right;
  std::optional<long> violation_left;
};

namespace detail {

template <typename Scalar>
long ceil_ratio(const Scalar& num, const Scalar& den) {
  if constexpr (is_exact_v<Scalar>) {
    Rational q = num / den;
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return c.get_si();
  } else {
    return static_cast<long>(std::ceil(num / den - 1e-12));
  }
}

}  // namespace detail

/// Weights along one line of the window. A concave positive profile on all of
/// Z is constant; for a non-constant concave profile the report gives the index
/// beyond the window by which the linear continuation, an upper bound for any
/// concave continuation, reaches zero.
template <typename Scalar>
LineConcavityReport<Scalar> line_concavity_check(const GridWindow<Scalar>& gw, const GridPoint& base, int axis,
                                                 double epsilon = 1e-12) {
  if (axis < 0 || axis >= gw.dimension()) throw DomainError("axis out of range");
  GridPoint origin = base;
  origin[axis] = 0;
  if (!gw.contains(origin)) throw OutOfWindow("line " + base.to_string() + " misses the window");
  LineConcavityReport<Scalar> rep;
  rep.base = origin;
  rep.axis = axis;
  rep.k_lo = -gw.radius();
  rep.k_hi = gw.radius() - 1;
  for (int k = rep.k_lo; k <= rep.k_hi; ++k) rep.weights.push_back(gw.weight(origin.shifted(axis, k), axis));
  const auto& w = rep.weights;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (sign_of(w[i], epsilon) <= 0) rep.positive = false;
    if (!approx_equal(w[i], w.front(), epsilon)) rep.constant = false;
    if (i > 0 && i + 1 < w.size()) {
      Scalar second = Scalar(2) * w[i] - w[i - 1] - w[i + 1];
      if (sign_of(second, epsilon) < 0) rep.concave = false;
    }
  }
  for (int k = rep.k_lo + 1; k < rep.k_hi; ++k) {
    GridPoint x = origin.shifted(axis, k);
    bool fits = true;
    for (int j = 0; j < gw.dimension(); ++j) {
      if (j != axis && (std::abs(x[j]) + 1 > gw.radius())) fits = false;
    }
    if (!fits) continue;
    if (sign_of(kappa_grid(gw, x, axis, 1), epsilon) < 0) rep.kappa_nonnegative = false;
  }
  if (rep.concave && !rep.constant && w.size() >= 2) {
    Scalar right = w.back() - w[w.size() - 2];
    if (sign_of(right, epsilon) < 0) {
      rep.violation_right = rep.k_hi + detail::ceil_ratio(w.back(), Scalar(-right));
    }
    Scalar left = w.front() - w[1];
    if (sign_of(left, epsilon) < 0) {
      rep.violation_left = rep.k_lo - detail::ceil_ratio(w.front(), Scalar(-left));
    }
  }
  return rep;
}

template <typename Scalar>
struct WindowRigidityReport {
  int r_max = 0;
  bool scalar_nonnegative = true;  ///< R ≥ 0 on Q_{r_max}
  bool outer_trivial = true;       ///< w = 1 on every edge touching the shells r_max..ρ
  Scalar outer_gap{};              ///< Σ_{E_{r_max}} w − Σ_{Ẽ_{r_max}} w
  std::vector<Scalar> partial_sums;  ///< Σ_{Q_r}(Abs + R), r = 0..r_max
  bool partial_sums_monotone = true;
  bool premises = false;
  bool weights_trivial = true;  ///< w ≡ 1 on the whole window
  bool conclusion_holds = true;
};

/// Window-scale rigidity: with R ≥ 0 on Q_{r_max} and trivial weights from
/// shell r_max outwards, every weight of the window must equal 1.
template <typename Scalar>
WindowRigidityReport<Scalar> window_rigidity_check(const GridWindow<Scalar>& gw, int r_max, double epsilon = 1e-12) {
  if (r_max + 2 > gw.radius()) throw OutOfWindow("window rigidity needs radius >= r_max + 2");
  const int n = gw.dimension();
  WindowRigidityReport<Scalar> rep;
  rep.r_max = r_max;
  Scalar running(0);
  for (int r = 0; r <= r_max; ++r) {
    for_each_shell_point(n, r, [&](const GridPoint& x) {
      Scalar a = abs_term(gw, x);
      Scalar s = linear_term(gw, x) - a;
      if (sign_of(s, epsilon) < 0) rep.scalar_nonnegative = false;
      running += a + s;
    });
    if (!rep.partial_sums.empty() && sign_of(Scalar(running - rep.partial_sums.back()), epsilon) < 0) {
      rep.partial_sums_monotone = false;
    }
    rep.partial_sums.push_back(running);
  }
  for_each_cube_point(n, gw.radius(), [&](const GridPoint& x) {
    for (int i = 0; i < n; ++i) {
      GridPoint y = x.shifted(i, 1);
      if (!gw.contains(y)) continue;
      bool one = approx_equal(gw.weight(x, i), Scalar(1), epsilon);
      if (!one) rep.weights_trivial = false;
      if (!one && std::max(x.linf(), y.linf()) >= r_max) rep.outer_trivial = false;
    }
  });
  rep.outer_gap = shell_gap(gw, r_max);
  rep.premises = rep.scalar_nonnegative && rep.outer_trivial;
  rep.conclusion_holds = !rep.premises || rep.weights_trivial;
  return rep;
}

}  // namespace admgraph
