#pragma once

#include "admgraph/grid.hpp"

#include <cmath>
#include <string>

namespace admgraph {

/// Shell index of the edge {x, x+e_i} along its own axis: k for the edge
/// k → k+1 when k ≥ 0 and −k−1 when k < 0, so that the edges of E_r get r.
inline int axial_shell(const GridPoint& base, int axis) {
  int k = base[axis];
  return k >= 0 ? k : -k - 1;
}

/// Schwarzschild-type weights for n ≥ 3: an edge of E_r gets
/// (1 + m/(r+1)^{n−2})^{1/(n−2)}, copied along each axis so that Abs ≡ 0.
inline WeightProvider<double> schwarzschild_field(int n, double m) {
  if (n < 3) throw DomainError("the Schwarzschild-type field needs n >= 3");
  if (!(m > 0)) throw DomainError("mass parameter must be positive");
  const double p = n - 2;
  return WeightProvider<double>::procedural(
      [m, p](const GridPoint& base, int axis) {
        double s = axial_shell(base, axis) + 1.0;
        return std::pow(1.0 + m / std::pow(s, p), 1.0 / p);
      },
      std::nullopt, "schwarzschild(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ")");
}

/// Same field in exact arithmetic; only possible for n = 3 where the exponent is 1.
inline WeightProvider<Rational> schwarzschild_field_exact3(const Rational& m) {
  if (!(m > 0)) throw DomainError("mass parameter must be positive");
  return WeightProvider<Rational>::procedural(
      [m](const GridPoint& base, int axis) {
        return Rational(Rational(1) + m / Rational(axial_shell(base, axis) + 1));
      },
      std::nullopt, "schwarzschild(n=3,m=" + format_scalar(m) + ")");
}

/// Logarithmic model for n = 2: an edge of E_r gets 1 − m·log r (r ≥ 1) and
/// the edges of E_0 get 1. Rejects windows where a weight would be ≤ 0.
inline WeightProvider<double> log_model_field(double m, int rho) {
  if (rho >= 2 && !(1.0 - m * std::log(static_cast<double>(rho)) > 0)) {
    throw DomainError("log model weight would be non-positive inside the window");
  }
  return WeightProvider<double>::procedural(
      [m](const GridPoint& base, int axis) {
        int r = axial_shell(base, axis);
        return r <= 1 ? 1.0 : 1.0 - m * std::log(static_cast<double>(r));
      },
      rho, "log-model(m=" + std::to_string(m) + ")");
}

/// 1 + a·(s+1)^{−q} with s the axial shell index. Abs ≡ 0, but weights on
/// edges near the coordinate hyperplanes do not tend to 1.
inline WeightProvider<double> axial_power_field(double amplitude, double q) {
  return WeightProvider<double>::procedural(
      [amplitude, q](const GridPoint& base, int axis) {
        return 1.0 + amplitude * std::pow(axial_shell(base, axis) + 1.0, -q);
      },
      std::nullopt, "axial-power(q=" + std::to_string(q) + ")");
}

/// 1 + a·(|c|+1)^{−q}·(1 + ε·u_0·u_1), where c is the Euclidean midpoint of the
/// edge and u = c/|c|. The angular factor gives smooth tangential variation.
inline WeightProvider<double> radial_power_field(double amplitude, double q, double tangential = 0.0) {
  return WeightProvider<double>::procedural(
      [amplitude, q, tangential](const GridPoint& base, int axis) {
        double norm2 = 0;
        double mid0 = 0, mid1 = 0;
        for (int j = 0; j < base.dim; ++j) {
          double c = base[j] + (j == axis ? 0.5 : 0.0);
          norm2 += c * c;
          if (j == 0) mid0 = c;
          if (j == 1) mid1 = c;
        }
        double norm = std::sqrt(norm2);
        double angular = 1.0;
        if (tangential != 0.0 && norm > 0) angular += tangential * (mid0 / norm) * (mid1 / norm);
        return 1.0 + amplitude * std::pow(norm + 1.0, -q) * angular;
      },
      std::nullopt, "radial-power(q=" + std::to_string(q) + ")");
}

}  // namespace admgraph
