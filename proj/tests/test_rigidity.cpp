#include "admgraph/instances.hpp"
#include "admgraph/rigidity.hpp"

#include <gtest/gtest.h>

namespace admgraph {
namespace {

/// Q_r of Z^2 with plain coordinate labels, plus optional extra core edges.
AsymptoticallyFlatGraph<Rational> labelled_core(int r, const std::vector<std::pair<GridPoint, GridPoint>>& extra) {
  AsymptoticallyFlatGraph<Rational> afg;
  afg.n = 2;
  afg.r = r;
  afg.rho = default_rigidity_radius(r);
  GraphBuilder<Rational> b;
  auto name = [](const GridPoint& p) { return "c" + p.to_string(); };
  for_each_cube_point(2, r, [&](const GridPoint& p) { b.add_vertex(name(p)); });
  for_each_cube_point(2, r, [&](const GridPoint& p) {
    for (int i = 0; i < 2; ++i) {
      GridPoint q = p.shifted(i, 1);
      if (q.linf() <= r) b.add_edge(*b.find(name(p)), *b.find(name(q)), Rational(1));
    }
  });
  for (const auto& [p, q] : extra) b.add_edge(*b.find(name(p)), *b.find(name(q)), Rational(1));
  afg.core = std::move(b).build(true);
  for_each_cube_point(2, r, [&](const GridPoint& p) {
    if (p.linf() != r) return;
    for (int i = 0; i < 2; ++i) {
      for (int s : {1, -1}) {
        GridPoint q = p.shifted(i, s);
        if (q.linf() == r + 1) afg.interface.push_back({name(p), q, Rational(1)});
      }
    }
  });
  return afg;
}

std::vector<std::string> stage_names(const RigidityReport<Rational>& rep) {
  std::vector<std::string> out;
  for (const auto& s : rep.stages) out.push_back(s.name);
  return out;
}

TEST(Rigidity, DefaultRadius) {
  EXPECT_EQ(default_rigidity_radius(0), 7);
  EXPECT_EQ(default_rigidity_radius(1), 11);
  EXPECT_EQ(default_rigidity_radius(2), 16);
  EXPECT_EQ(default_rigidity_radius(3), 21);
}

TEST(Rigidity, StandardCoreIsRecognised) {
  auto rep = rigidity_check(standard_afg<Rational>(2, 1));
  ASSERT_TRUE(rep.verdict) << rep.failed_stage.value_or("");
  EXPECT_FALSE(rep.failed_stage.has_value());
  ASSERT_FALSE(rep.stages.empty());
  EXPECT_EQ(rep.stages.front().name, "well_formed");
  EXPECT_EQ(rep.stages.back().name, "standard_grid");
  for (const auto& s : rep.stages) EXPECT_TRUE(s.passed) << s.name;
  ASSERT_TRUE(rep.min_kappa.has_value());
  EXPECT_GE(*rep.min_kappa, Rational(0));
  EXPECT_GT(rep.edges_certified, 0u);
  EXPECT_TRUE(rep.diagonals.empty());
}

TEST(Rigidity, LevelsRunFromRDownToZero) {
  auto rep = rigidity_check(standard_afg<Rational>(2, 2));
  ASSERT_TRUE(rep.verdict);
  std::vector<int> coordinate_levels;
  for (const auto& s : rep.stages) {
    if (s.name == "coordinates") coordinate_levels.push_back(s.level);
  }
  EXPECT_EQ(coordinate_levels, (std::vector<int>{2, 1, 0}));
}

TEST(Rigidity, VerdictIgnoresLabelsAndInsertionOrder) {
  for (std::uint64_t seed : {1u, 7u, 23u, 99u}) {
    auto rep = rigidity_check(standard_afg<Rational>(2, 1, std::nullopt, seed));
    EXPECT_TRUE(rep.verdict) << "seed " << seed;
    EXPECT_EQ(stage_names(rep), stage_names(rigidity_check(standard_afg<Rational>(2, 1))));
  }
  EXPECT_TRUE(rigidity_check(labelled_core(1, {})).verdict);
}

TEST(Rigidity, ThreeDimensionalCore) {
  RigidityOptions ro;
  ro.jobs = 2;
  EXPECT_TRUE(rigidity_check(standard_afg<Rational>(3, 1), ro).verdict);
}

TEST(Rigidity, TwoVertexCoreFailsMultiplicity) {
  auto rep = rigidity_check(split_vertex_afg<Rational>());
  EXPECT_FALSE(rep.verdict);
  ASSERT_TRUE(rep.failed_stage.has_value());
  EXPECT_EQ(*rep.failed_stage, "multiplicity");
  EXPECT_EQ(rep.failed_level, 0);
  ASSERT_FALSE(rep.bounds.empty());
  const auto& b = rep.bounds.front();
  ASSERT_TRUE(b.constructed);
  EXPECT_TRUE(b.lipschitz);
  EXPECT_EQ(b.bound, Rational(0));
  EXPECT_EQ(b.formula, Rational(-1));
}

TEST(Rigidity, TwoVertexCoreWithUnitMeasureLosesCurvature) {
  auto rep = rigidity_check(split_vertex_afg<Rational>(std::nullopt, true));
  EXPECT_FALSE(rep.verdict);
  EXPECT_EQ(rep.failed_stage.value_or(""), "curvature_certificate");
  ASSERT_TRUE(rep.min_kappa.has_value());
  EXPECT_EQ(*rep.min_kappa, Rational(-1));
}

TEST(Rigidity, PerturbedCoreFailsCurvature) {
  auto rep = rigidity_check(standard_afg<Rational>(2, 1, std::nullopt, 1, Rational(3, 2)));
  EXPECT_FALSE(rep.verdict);
  EXPECT_EQ(rep.failed_stage.value_or(""), "curvature_certificate");
  ASSERT_TRUE(rep.min_kappa.has_value());
  EXPECT_LT(*rep.min_kappa, Rational(0));
}

TEST(Rigidity, DiagonalCoreEdgeIsRejected) {
  auto rep = rigidity_check(labelled_core(1, {{GridPoint{0, 0}, GridPoint{1, 1}}}));
  EXPECT_FALSE(rep.verdict);
  // The extra edge makes κ negative nearby, so the certificate rejects it first.
  EXPECT_EQ(rep.failed_stage.value_or(""), "curvature_certificate");
}

TEST(Rigidity, NonUnitOuterWeightIsRejected) {
  auto afg = standard_afg<Rational>(2, 1);
  std::unordered_map<GridEdge, Rational, GridEdgeHash> table;
  table[GridEdge{GridPoint{5, 0}, 1}] = Rational(2);
  afg.outer_weights = WeightProvider<Rational>::table(std::move(table), Rational(1), std::nullopt);
  auto rep = rigidity_check(afg);
  EXPECT_FALSE(rep.verdict);
  // A heavier edge far out already breaks κ ≥ 0 next to it.
  EXPECT_EQ(rep.failed_stage.value_or(""), "curvature_certificate");
}

TEST(Rigidity, MalformedInstancesFailWellFormed) {
  auto small = standard_afg<Rational>(2, 1, 8);
  auto rep = rigidity_check(small);
  EXPECT_FALSE(rep.verdict);
  EXPECT_EQ(rep.failed_stage.value_or(""), "well_formed");

  auto bad_interface = standard_afg<Rational>(2, 1);
  bad_interface.interface.front().grid_vertex = GridPoint{5, 5};
  EXPECT_THROW(assemble(bad_interface), Error);
  EXPECT_EQ(rigidity_check(bad_interface).failed_stage.value_or(""), "well_formed");

  auto tiny = standard_afg<Rational>(2, 1, 3);
  EXPECT_THROW(assemble(tiny), DomainError);

  auto unknown = standard_afg<Rational>(2, 1);
  unknown.interface.front().core_vertex = "nowhere";
  EXPECT_THROW(assemble(unknown), Error);
}

TEST(Rigidity, AssemblyLayout) {
  auto afg = standard_afg<Rational>(2, 1);
  auto a = assemble(afg);
  const std::size_t core = afg.core.vertex_count();
  EXPECT_EQ(core, 9u);
  EXPECT_EQ(a.graph.vertex_count(), core + 23u * 23u - 9u);
  for (VertexId v = 0; v < a.graph.vertex_count(); ++v) {
    EXPECT_EQ(static_cast<bool>(a.in_core[v]), v < core);
    EXPECT_EQ(a.phi[v].has_value(), v >= core);
  }
  // The 12 points of S_2 that are not corners receive an interface edge.
  EXPECT_EQ(a.interface_vertices.size(), 12u);
}

}  // namespace
}  // namespace admgraph
