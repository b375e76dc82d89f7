#include "admgraph/instances.hpp"
#include "admgraph/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <functional>

namespace admgraph {
namespace {

template <typename Scalar>
void expect_same_graph(const WeightedGraph<Scalar>& a, const WeightedGraph<Scalar>& b) {
  ASSERT_EQ(a.vertex_count(), b.vertex_count());
  ASSERT_EQ(a.edge_count(), b.edge_count());
  for (VertexId v = 0; v < a.vertex_count(); ++v) {
    EXPECT_EQ(a.label(v), b.label(v));
    EXPECT_EQ(a.vertex_weight(v), b.vertex_weight(v));
  }
  for (std::size_t i = 0; i < a.edges().size(); ++i) {
    EXPECT_EQ(a.edges()[i].u, b.edges()[i].u);
    EXPECT_EQ(a.edges()[i].v, b.edges()[i].v);
    EXPECT_EQ(a.edges()[i].weight, b.edges()[i].weight);
  }
}

/// True iff some number anywhere in the document is a JSON float.
bool contains_float(const Json& j) {
  if (j.is_number_float()) return true;
  if (j.is_structured()) {
    for (const auto& item : j) {
      if (contains_float(item)) return true;
    }
  }
  return false;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(Io, GraphRoundTripExact) {
  auto g = split_vertex_graph<Rational>();
  Json j = graph_to_json(g);
  EXPECT_FALSE(contains_float(j));
  auto back = graph_from_json<Rational>(parse_json_text(j.dump()));
  expect_same_graph(g, back);
  EXPECT_EQ(graph_to_json(back).dump(), j.dump());
}

TEST(Io, GraphRoundTripFloat) {
  auto g = split_cycle_graph<double>();
  Json j = graph_to_json(g);
  auto back = graph_from_json<double>(parse_json_text(j.dump()));
  expect_same_graph(g, back);
}

TEST(Io, ScalarForms) {
  EXPECT_EQ(scalar_from_json<Rational>(Json("3/4"), "w"), Rational(3, 4));
  EXPECT_EQ(scalar_from_json<Rational>(Json(2), "w"), Rational(2));
  EXPECT_EQ(scalar_from_json<Rational>(Json(0.25), "w"), Rational(1, 4));
  EXPECT_EQ(scalar_from_json<Rational>(Json("0.1"), "w"), Rational(1, 10));
  EXPECT_DOUBLE_EQ(scalar_from_json<double>(Json("1/8"), "w"), 0.125);
  EXPECT_THROW(scalar_from_json<Rational>(Json(true), "w"), ParseError);
  EXPECT_THROW(scalar_from_json<Rational>(Json("1/0"), "w"), ParseError);
  EXPECT_EQ(scalar_to_json(Rational(5, 3)), Json("5/3"));
}

TEST(Io, MalformedJsonReportsLineAndColumn) {
  std::string text = "{\n  \"vertices\": [\"a\", \"b\"],\n  \"edges\": [ {\"u\": \"a\" \"v\": \"b\"} ]\n}";
  std::string msg = error_of([&] { parse_json_text(text, "g.json"); });
  EXPECT_NE(msg.find("g.json:3:"), std::string::npos) << msg;
}

TEST(Io, MissingAndInvalidFields) {
  std::string msg = error_of([] { graph_from_json<Rational>(parse_json_text(R"({"vertices": ["a"]})")); });
  EXPECT_NE(msg.find("edges"), std::string::npos) << msg;

  msg = error_of([] {
    graph_from_json<Rational>(parse_json_text(R"({"vertices": ["a", "b"], "edges": [{"u": "a", "v": "b", "w": "-1"}]})"));
  });
  EXPECT_FALSE(msg.empty());

  msg = error_of([] {
    graph_from_json<Rational>(parse_json_text(R"({"vertices": ["a", "b"], "edges": [{"u": "a", "v": "c", "w": 1}]})"));
  });
  EXPECT_FALSE(msg.empty());

  msg = error_of([] {
    graph_from_json<Rational>(parse_json_text(R"({"vertices": ["a", "b", "c"], "edges": [{"u": "a", "v": "b", "w": 1}]})"));
  });
  EXPECT_FALSE(msg.empty()) << "disconnected graphs are rejected";

  msg = error_of([] { torus_from_json<Rational>(parse_json_text(R"({"A": [[1, 2], [2, 4]]})")); });
  EXPECT_FALSE(msg.empty()) << "singular A";

  msg = error_of([] { grid_from_json<Rational>(parse_json_text(R"({"n": 2, "rho": 2, "edges": [{"x": [2, 0], "axis": 0, "w": 1}]})")); });
  EXPECT_NE(msg.find("leaves the window"), std::string::npos) << msg;
}

TEST(Io, GridRoundTrip) {
  std::string text = R"({"n": 2, "rho": 3, "edges": [{"x": [0, 0], "axis": 1, "w": "1/2"}, {"x": [-1, 2], "axis": 0, "w": 3}]})";
  auto gw = grid_from_json<Rational>(parse_json_text(text));
  EXPECT_EQ(gw.weight(GridPoint{0, 0}, 1), Rational(1, 2));
  EXPECT_EQ(gw.weight(GridPoint{-1, 2}, 0), Rational(3));
  EXPECT_EQ(gw.weight(GridPoint{1, 1}, 0), Rational(1));
  Json j = grid_to_json(gw);
  EXPECT_EQ(j["edges"].size(), 2u);
  auto back = grid_from_json<Rational>(j);
  EXPECT_EQ(grid_to_json(back).dump(), j.dump());
}

TEST(Io, TorusRoundTrip) {
  auto t = build_torus<Rational>(det7_torus_spec());
  Json j = torus_to_json(t);
  EXPECT_FALSE(contains_float(j));
  auto in = torus_from_json<Rational>(parse_json_text(j.dump()));
  EXPECT_EQ(in.spec.A, t.spec().A);
  EXPECT_EQ(in.spec.k, t.spec().k);
  auto t2 = build_torus<Rational>(in.spec, in.weights);
  EXPECT_EQ(torus_to_json(t2).dump(), j.dump());
}

TEST(Io, AfgRoundTrip) {
  for (const auto& afg : {split_vertex_afg<Rational>(), standard_afg<Rational>(2, 1, 12, 5)}) {
    Json j = afg_to_json(afg);
    EXPECT_FALSE(contains_float(j));
    auto back = afg_from_json<Rational>(parse_json_text(j.dump()));
    EXPECT_EQ(back.n, afg.n);
    EXPECT_EQ(back.r, afg.r);
    EXPECT_EQ(back.rho, afg.rho);
    expect_same_graph(afg.core, back.core);
    ASSERT_EQ(back.interface.size(), afg.interface.size());
    for (std::size_t i = 0; i < afg.interface.size(); ++i) {
      EXPECT_EQ(back.interface[i].core_vertex, afg.interface[i].core_vertex);
      EXPECT_EQ(back.interface[i].grid_vertex, afg.interface[i].grid_vertex);
      EXPECT_EQ(back.interface[i].w, afg.interface[i].w);
    }
    EXPECT_EQ(afg_to_json(back).dump(), j.dump());
  }
}

TEST(Io, RigidityReportIsExact) {
  Json j = rigidity_report_to_json(rigidity_check(split_vertex_afg<Rational>()));
  EXPECT_FALSE(contains_float(j));
  EXPECT_EQ(j["is_standard_grid"], false);
  EXPECT_EQ(j["failed_stage"], "multiplicity");
}

TEST(Io, FieldDescriptors) {
  auto f = field_from_json(parse_json_text(R"({"field": "schwarzschild", "n": 3, "m": 0.5})"));
  EXPECT_EQ(f.name, "schwarzschild");
  EXPECT_DOUBLE_EQ(f.m, 0.5);
  auto back = field_from_json(field_to_json(f));
  EXPECT_EQ(back.name, f.name);
  EXPECT_DOUBLE_EQ(back.m, f.m);
  EXPECT_THROW(field_from_json(parse_json_text(R"({"n": 3})")), ParseError);
  EXPECT_THROW(field_window(field_from_json(parse_json_text(R"({"field": "wormhole"})")), 4), DomainError);
  auto gw = field_window(f, 6);
  EXPECT_EQ(gw.radius(), 6);
  EXPECT_GT(gw.weight(GridPoint{1, 0, 0}, 0), 1.0);
}

TEST(Io, ShippedDataFilesParse) {
  namespace fs = std::filesystem;
  const fs::path dir = ADMGRAPH_DATA_DIR;
  ASSERT_TRUE(fs::is_directory(dir));
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    Json j = read_json_file(entry.path().string());
    if (j.contains("field")) {
      EXPECT_NO_THROW(field_window(field_from_json(j), 4)) << entry.path();
    } else if (j.contains("graph")) {
      EXPECT_NO_THROW(salami_from_json<Rational>(j)) << entry.path();
    } else if (j.contains("core")) {
      EXPECT_NO_THROW(assemble(afg_from_json<Rational>(j))) << entry.path();
    } else if (j.contains("A")) {
      EXPECT_NO_THROW(build_torus<Rational>(torus_from_json<Rational>(j).spec)) << entry.path();
    } else if (j.contains("vertices")) {
      EXPECT_GT(graph_from_json<Rational>(j).vertex_count(), 0u) << entry.path();
    } else if (j.contains("rho")) {
      EXPECT_NO_THROW(grid_from_json<Rational>(j)) << entry.path();
    } else {
      ADD_FAILURE() << entry.path() << " is not a recognised instance";
    }
  }
  EXPECT_GE(seen, 6);
}

}  // namespace
}  // namespace admgraph
