#include "admgraph/fields.hpp"
#include "admgraph/grid.hpp"
#include "admgraph/ollivier.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

namespace admgraph {
namespace {

GridWindow<Rational> unit(int n, int rho) { return {n, rho, WeightProvider<Rational>::constant(Rational(1))}; }

TEST(GridPoint, NormsAndShifts) {
  GridPoint p{2, -3, 1};
  EXPECT_EQ(p.linf(), 3);
  EXPECT_EQ(p.l1(), 6);
  EXPECT_EQ(p.shifted(1, 4), (GridPoint{2, 1, 1}));
  EXPECT_THROW(GridPoint(0), DomainError);
  EXPECT_THROW(GridPoint(kMaxDimension + 1), DomainError);
}

TEST(CubeEnumeration, CountsAndShells) {
  for (int n = 1; n <= 3; ++n) {
    for (int r = 0; r <= 3; ++r) {
      long cube = 0, shell = 0;
      for_each_cube_point(n, r, [&](const GridPoint& p) {
        EXPECT_LE(p.linf(), r);
        ++cube;
      });
      std::set<GridPoint> seen;
      for_each_shell_point(n, r, [&](const GridPoint& p) {
        EXPECT_EQ(p.linf(), r);
        seen.insert(p);
        ++shell;
      });
      EXPECT_EQ(static_cast<long>(seen.size()), shell);
      long side = 2L * r + 1, inner = 2L * r - 1, c = 1, i = 1;
      for (int k = 0; k < n; ++k) {
        c *= side;
        i *= inner;
      }
      EXPECT_EQ(cube, c);
      EXPECT_EQ(shell, r == 0 ? 1 : c - i);
    }
  }
}

TEST(ShellEdges, CountsMatchFormula) {
  for (int n = 1; n <= 4; ++n) {
    for (int r = 0; r <= 3; ++r) {
      auto se = shell_edges(n, r);
      EXPECT_EQ(static_cast<long>(se.outer.size()), shell_edge_count(n, r));
      EXPECT_EQ(se.outer.size(), se.outer_tilde.size());
      for (const auto& e : se.outer) {
        EXPECT_EQ(std::min(e.base.linf(), e.head().linf()), r);
        EXPECT_EQ(std::max(e.base.linf(), e.head().linf()), r + 1);
      }
    }
  }
}

TEST(GridWindow, RefusesEdgesOutsideTheCube) {
  auto gw = unit(2, 3);
  EXPECT_NO_THROW(gw.weight(GridPoint{2, 3}, 0));
  EXPECT_THROW(gw.weight(GridPoint{3, 0}, 0), OutOfWindow);
  EXPECT_THROW(kappa_grid(gw, GridPoint{3, 0}, 1, 1), OutOfWindow);
  GridWindow<Rational> bad(2, 2, WeightProvider<Rational>::constant(Rational(-1)));
  EXPECT_THROW(bad.weight(GridPoint{0, 0}, 0), DomainError);
}

TEST(ClosedForm, UnitGridIsFlat) {
  for (int n = 1; n <= 4; ++n) {
    auto gw = unit(n, 3);
    for_each_cube_point(n, 1, [&](const GridPoint& x) {
      EXPECT_EQ(abs_term(gw, x), Rational(0));
      EXPECT_EQ(scalar_grid(gw, x), Rational(0));
      for (int i = 0; i < n; ++i) EXPECT_EQ(kappa_grid(gw, x, i, 1), Rational(0));
    });
  }
}

TEST(ClosedForm, MatchesExhaustiveSearch) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int n = seed % 3 == 0 ? 3 : 2;
    GridWindow<Rational> gw(n, 3, testing::random_grid_weights(n, 3, seed));
    auto m = materialize(gw);
    for_each_cube_point(n, 2, [&](const GridPoint& x) {
      for (int i = 0; i < n; ++i) {
        for (int s : {1, -1}) {
          GridPoint y = x.shifted(i, s);
          if (y.linf() > 2) continue;
          EXPECT_EQ(kappa_grid(gw, x, i, s), edge_kappa(m.graph, m.at(x), m.at(y)))
              << "seed " << seed << " x " << x.to_string() << " axis " << i << " sign " << s;
        }
      }
    });
    if (n == 2) {
      for_each_cube_point(n, 1, [&](const GridPoint& x) {
        EXPECT_EQ(scalar_grid(gw, x), scalar_curvature(m.graph, m.at(x)));
        EXPECT_EQ(scalar_grid(gw, x), linear_term(gw, x) - abs_term(gw, x));
      });
    }
  }
}

TEST(ClosedForm, ExhaustiveSearchOnSmallLattice) {
  // Independent of the branch-and-bound: plain enumeration on a 5×5 window.
  GridWindow<Rational> gw(2, 2, testing::random_grid_weights(2, 2, 77));
  auto m = materialize(gw);
  for_each_cube_point(2, 1, [&](const GridPoint& x) {
    for (int i = 0; i < 2; ++i) {
      GridPoint y = x.shifted(i, 1);
      if (y.linf() > 1) continue;
      EXPECT_EQ(kappa_grid(gw, x, i, 1), testing::naive_kappa(m.graph, m.at(x), m.at(y)));
    }
  });
}

TEST(CubeSums, TelescopedFormHoldsForEveryWeighting) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = seed % 2 == 0 ? 3 : 2;
    GridWindow<Rational> gw(n, 5, testing::random_grid_weights(n, 5, seed));
    for (int r = 0; r <= 3; ++r) EXPECT_EQ(shell_sums(gw, r).telescoped_residual(), Rational(0)) << seed << " " << r;
  }
}

TEST(CubeSums, ShellGapFormAgreesAtTheOrigin) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GridWindow<Rational> gw(2, 4, testing::random_grid_weights(2, 4, seed));
    EXPECT_EQ(shell_sums(gw, 0).gap_residual(), Rational(0));
  }
}

TEST(CubeSums, ShellGapFormNeedsTheInnerFaceBeyondTheOrigin) {
  // With random weights Σ_{E_r} w and Σ_{F_r} w differ, and only the F_r form
  // survives the line-by-line telescoping.
  GridWindow<Rational> gw(2, 4, testing::random_grid_weights(2, 4, 3));
  auto s = shell_sums(gw, 1);
  EXPECT_NE(s.sum_outer, s.sum_inner_face);
  EXPECT_NE(s.gap_residual(), Rational(0));
  EXPECT_EQ(s.telescoped_residual(), Rational(0));
  EXPECT_EQ(s.gap_residual(), s.sum_inner_face - s.sum_outer);
}

TEST(CubeSums, AxiallySymmetricFieldsSatisfyBothForms) {
  GridWindow<Rational> gw(3, 6, schwarzschild_field_exact3(Rational(1, 2)));
  for (int r = 0; r <= 4; ++r) {
    auto s = shell_sums(gw, r);
    EXPECT_EQ(s.sum_abs, Rational(0));
    EXPECT_EQ(s.telescoped_residual(), Rational(0));
  }
}

TEST(Fields, SchwarzschildHasNoAbsAndNegativeScalarFarOut) {
  GridWindow<double> gw(3, 20, schwarzschild_field(3, 1.0));
  for_each_shell_point(3, 12, [&](const GridPoint& x) { EXPECT_NEAR(abs_term(gw, x), 0.0, 1e-12); });
  EXPECT_LT(scalar_grid(gw, GridPoint{12, 12, 12}), 0.0);
  EXPECT_THROW(schwarzschild_field(2, 1.0), DomainError);
  EXPECT_THROW(schwarzschild_field(3, -1.0), DomainError);
}

TEST(Fields, LogModelShape) {
  auto f = log_model_field(0.05, 50);
  EXPECT_DOUBLE_EQ(f(GridPoint{0, 0}, 0), 1.0);
  EXPECT_DOUBLE_EQ(f(GridPoint{1, 0}, 0), 1.0);
  EXPECT_DOUBLE_EQ(f(GridPoint{-3, 0}, 0), 1.0 - 0.05 * std::log(2.0));
  EXPECT_THROW(log_model_field(1.0, 10), DomainError);
  EXPECT_THROW(GridWindow<double>(2, 60, log_model_field(0.05, 50)), DomainError);
}

}  // namespace
}  // namespace admgraph
