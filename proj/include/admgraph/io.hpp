#pragma once

#include "admgraph/fields.hpp"
#include "admgraph/graph.hpp"
#include "admgraph/rigidity.hpp"
#include "admgraph/salami.hpp"
#include "admgraph/torus.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace admgraph {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void bad_input(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

inline const Json& member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad_input(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad_input(where, std::string("missing field '") + key + "'");
  return *it;
}

inline long as_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) bad_input(where, "expected an integer");
  return j.get<long>();
}

inline std::string as_id(const Json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long>());
  bad_input(where, "vertex ids must be strings or integers");
}

inline GridPoint as_point(const Json& j, const std::string& where, std::optional<int> dim = std::nullopt) {
  if (!j.is_array()) bad_input(where, "expected an array of integers");
  if (j.size() < 1 || static_cast<int>(j.size()) > kMaxDimension) bad_input(where, "unsupported point dimension");
  if (dim && static_cast<int>(j.size()) != *dim) {
    bad_input(where, "point has dimension " + std::to_string(j.size()) + ", expected " + std::to_string(*dim));
  }
  GridPoint p(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<int>(i)] = static_cast<int>(as_integer(j[i], where));
  return p;
}

}  // namespace detail

inline Json point_to_json(const GridPoint& p) {
  Json out = Json::array();
  for (int i = 0; i < p.dim; ++i) out.push_back(p[i]);
  return out;
}

/// Weights are fraction strings in exact mode and plain numbers otherwise.
template <typename Scalar>
Json scalar_to_json(const Scalar& v) {
  if constexpr (is_exact_v<Scalar>) {
    return format_scalar(v);
  } else {
    return to_double(v);
  }
}

/// Accepts "p/q", decimal strings and JSON numbers. Floating-point numbers
/// read into exact mode become the shortest decimal that round-trips.
template <typename Scalar>
Scalar scalar_from_json(const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_scalar<Scalar>(j.get<std::string>());
    if (j.is_number_integer()) return ScalarTraits<Scalar>::from_int(j.get<long>());
    if (j.is_number_float()) return ScalarTraits<Scalar>::from_double(j.get<double>());
  } catch (const ParseError& e) {
    detail::bad_input(where, e.what());
  }
  detail::bad_input(where, "expected a number or a fraction string");
}

/// Parses JSON text, reporting syntax errors with line and column.
inline Json parse_json_text(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < std::min(e.byte == 0 ? 0 : e.byte - 1, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": malformed JSON (" +
                     e.what() + ")");
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

template <typename Scalar>
Json graph_to_json(const WeightedGraph<Scalar>& g) {
  Json out = Json::object();
  Json vertices = Json::array();
  for (VertexId v = 0; v < g.vertex_count(); ++v) vertices.push_back(g.label(v));
  out["vertices"] = std::move(vertices);
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    Json je = Json::object();
    je["u"] = g.label(e.u);
    je["v"] = g.label(e.v);
    je["w"] = scalar_to_json(e.weight);
    edges.push_back(std::move(je));
  }
  out["edges"] = std::move(edges);
  if (g.has_vertex_weights()) {
    Json vw = Json::object();
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (g.vertex_weight(v) != Scalar(1)) vw[g.label(v)] = scalar_to_json(g.vertex_weight(v));
    }
    out["vertex_weights"] = std::move(vw);
  }
  return out;
}

template <typename Scalar>
WeightedGraph<Scalar> graph_from_json(const Json& j, const std::string& where = "graph",
                                      bool require_connected = true) {
  const Json& vertices = detail::member(j, "vertices", where);
  const Json& edges = detail::member(j, "edges", where);
  if (!vertices.is_array()) detail::bad_input(where + "/vertices", "expected an array");
  if (!edges.is_array()) detail::bad_input(where + "/edges", "expected an array");
  GraphBuilder<Scalar> b;
  try {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      b.add_vertex(detail::as_id(vertices[i], where + "/vertices/" + std::to_string(i)));
    }
  } catch (const GraphError& e) {
    detail::bad_input(where + "/vertices", e.what());
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string at = where + "/edges/" + std::to_string(i);
    auto u = b.find(detail::as_id(detail::member(edges[i], "u", at), at + "/u"));
    auto v = b.find(detail::as_id(detail::member(edges[i], "v", at), at + "/v"));
    if (!u || !v) detail::bad_input(at, "edge refers to an undeclared vertex");
    Scalar w = edges[i].contains("w") ? scalar_from_json<Scalar>(edges[i]["w"], at + "/w") : Scalar(1);
    b.add_edge(*u, *v, w);
  }
  if (j.contains("vertex_weights")) {
    const Json& vw = j["vertex_weights"];
    if (!vw.is_object()) detail::bad_input(where + "/vertex_weights", "expected an object");
    for (const auto& [id, value] : vw.items()) {
      auto v = b.find(id);
      if (!v) detail::bad_input(where + "/vertex_weights/" + id, "unknown vertex");
      Scalar m = scalar_from_json<Scalar>(value, where + "/vertex_weights/" + id);
      if (!(m > 0)) detail::bad_input(where + "/vertex_weights/" + id, "vertex weight must be positive");
      b.set_vertex_weight(*v, m);
    }
  }
  try {
    return std::move(b).build(require_connected);
  } catch (const GraphError& e) {
    detail::bad_input(where, e.what());
  }
}

/// Grid weight table. Edges not listed get "default" (1 when absent).
template <typename Scalar>
GridWindow<Scalar> grid_from_json(const Json& j, const std::string& where = "grid") {
  int n = static_cast<int>(detail::as_integer(detail::member(j, "n", where), where + "/n"));
  int rho = static_cast<int>(detail::as_integer(detail::member(j, "rho", where), where + "/rho"));
  if (n < 1 || n > kMaxDimension) detail::bad_input(where + "/n", "unsupported dimension");
  if (rho < 0) detail::bad_input(where + "/rho", "negative window radius");
  Scalar fallback = j.contains("default") ? scalar_from_json<Scalar>(j["default"], where + "/default") : Scalar(1);
  std::unordered_map<GridEdge, Scalar, GridEdgeHash> table;
  if (j.contains("edges")) {
    const Json& edges = j["edges"];
    if (!edges.is_array()) detail::bad_input(where + "/edges", "expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string at = where + "/edges/" + std::to_string(i);
      GridPoint x = detail::as_point(detail::member(edges[i], "x", at), at + "/x", n);
      int axis = static_cast<int>(detail::as_integer(detail::member(edges[i], "axis", at), at + "/axis"));
      if (axis < 0 || axis >= n) detail::bad_input(at + "/axis", "axis out of range");
      if (x.linf() > rho || x.shifted(axis, 1).linf() > rho) detail::bad_input(at, "edge leaves the window");
      Scalar w = scalar_from_json<Scalar>(detail::member(edges[i], "w", at), at + "/w");
      if (!(w > 0)) detail::bad_input(at + "/w", "weights must be positive");
      if (!table.emplace(GridEdge{x, axis}, w).second) detail::bad_input(at, "edge listed twice");
    }
  }
  return GridWindow<Scalar>(n, rho, WeightProvider<Scalar>::table(std::move(table), fallback, std::nullopt));
}

/// Lists every edge of the window whose weight differs from `fallback`, in
/// lexicographic order of (x, axis).
template <typename Scalar>
Json grid_to_json(const GridWindow<Scalar>& gw, const Scalar& fallback = Scalar(1)) {
  Json out = Json::object();
  out["n"] = gw.dimension();
  out["rho"] = gw.radius();
  if (fallback != Scalar(1)) out["default"] = scalar_to_json(fallback);
  Json edges = Json::array();
  for_each_cube_point(gw.dimension(), gw.radius(), [&](const GridPoint& x) {
    for (int i = 0; i < gw.dimension(); ++i) {
      if (x.shifted(i, 1).linf() > gw.radius()) continue;
      Scalar w = gw.weight(x, i);
      if (w == fallback) continue;
      Json je = Json::object();
      je["x"] = point_to_json(x);
      je["axis"] = i;
      je["w"] = scalar_to_json(w);
      edges.push_back(std::move(je));
    }
  });
  out["edges"] = std::move(edges);
  return out;
}

struct FieldDescriptor {
  std::string name;  ///< schwarzschild | log-model | axial-power | radial-power | constant
  int n = 3;
  double m = 1.0;
  double amplitude = 1.0;
  double q = 2.0;
  double tangential = 0.0;
  double value = 1.0;
};

inline FieldDescriptor field_from_json(const Json& j, const std::string& where = "field") {
  FieldDescriptor f;
  const Json& name = detail::member(j, "field", where);
  if (!name.is_string()) detail::bad_input(where + "/field", "expected a string");
  f.name = name.get<std::string>();
  auto number = [&](const char* key, double& target) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) detail::bad_input(where + "/" + key, "expected a number");
    target = j[key].get<double>();
  };
  if (j.contains("n")) f.n = static_cast<int>(detail::as_integer(j["n"], where + "/n"));
  number("m", f.m);
  number("amplitude", f.amplitude);
  number("q", f.q);
  number("tangential", f.tangential);
  number("value", f.value);
  return f;
}

inline Json field_to_json(const FieldDescriptor& f) {
  Json out = Json::object();
  out["field"] = f.name;
  out["n"] = f.n;
  if (f.name == "schwarzschild" || f.name == "log-model") out["m"] = f.m;
  if (f.name == "axial-power" || f.name == "radial-power") {
    out["amplitude"] = f.amplitude;
    out["q"] = f.q;
  }
  if (f.name == "radial-power") out["tangential"] = f.tangential;
  if (f.name == "constant") out["value"] = f.value;
  return out;
}

inline GridWindow<double> field_window(const FieldDescriptor& f, int rho) {
  if (f.name == "schwarzschild") return GridWindow<double>(f.n, rho, schwarzschild_field(f.n, f.m));
  if (f.name == "log-model") {
    if (f.n != 2) throw DomainError("the log model is two-dimensional");
    return GridWindow<double>(2, rho, log_model_field(f.m, rho));
  }
  if (f.name == "axial-power") return GridWindow<double>(f.n, rho, axial_power_field(f.amplitude, f.q));
  if (f.name == "radial-power") {
    return GridWindow<double>(f.n, rho, radial_power_field(f.amplitude, f.q, f.tangential));
  }
  if (f.name == "constant") {
    if (!(f.value > 0)) throw DomainError("constant weight must be positive");
    return GridWindow<double>(f.n, rho, WeightProvider<double>::constant(f.value));
  }
  throw DomainError("unknown field '" + f.name + "'");
}

template <typename Scalar>
struct TorusInput {
  TorusSpec spec;
  std::vector<TorusWeight<Scalar>> weights;
};

template <typename Scalar>
TorusInput<Scalar> torus_from_json(const Json& j, const std::string& where = "torus") {
  TorusInput<Scalar> in;
  const Json& A = detail::member(j, "A", where);
  if (!A.is_array() || A.empty()) detail::bad_input(where + "/A", "expected a square integer matrix");
  for (std::size_t r = 0; r < A.size(); ++r) {
    if (!A[r].is_array()) detail::bad_input(where + "/A", "expected a square integer matrix");
    std::vector<long> row;
    for (std::size_t c = 0; c < A[r].size(); ++c) {
      row.push_back(detail::as_integer(A[r][c], where + "/A/" + std::to_string(r) + "/" + std::to_string(c)));
    }
    in.spec.A.push_back(std::move(row));
  }
  in.spec.k = j.contains("k") ? detail::as_integer(j["k"], where + "/k") : 1;
  try {
    in.spec.validate();
  } catch (const DomainError& e) {
    detail::bad_input(where, e.what());
  }
  const int n = in.spec.dimension();
  if (j.contains("weights")) {
    const Json& ws = j["weights"];
    if (!ws.is_array()) detail::bad_input(where + "/weights", "expected an array");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const std::string at = where + "/weights/" + std::to_string(i);
      TorusWeight<Scalar> tw;
      tw.x = detail::as_point(detail::member(ws[i], "x", at), at + "/x", n);
      tw.dir = static_cast<int>(detail::as_integer(detail::member(ws[i], "dir", at), at + "/dir"));
      if (tw.dir < 0 || tw.dir >= n) detail::bad_input(at + "/dir", "direction out of range");
      tw.w = scalar_from_json<Scalar>(detail::member(ws[i], "w", at), at + "/w");
      in.weights.push_back(std::move(tw));
    }
  }
  return in;
}

/// Canonical form: every edge listed once, keyed by the representative of its
/// tail and the direction.
template <typename Scalar>
Json torus_to_json(const TorusGraph<Scalar>& t) {
  Json out = Json::object();
  out["A"] = t.spec().A;
  out["k"] = t.spec().k;
  Json ws = Json::array();
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    for (int d = 0; d < t.dimension(); ++d) {
      const GridPoint& p = t.representative(v);
      Json e = Json::object();
      e["x"] = point_to_json(p);
      e["dir"] = d;
      e["w"] = scalar_to_json(t.step_weight(v, d, 1));
      ws.push_back(std::move(e));
    }
  }
  out["weights"] = std::move(ws);
  return out;
}

template <typename Scalar>
AsymptoticallyFlatGraph<Scalar> afg_from_json(const Json& j, const std::string& where = "afg") {
  AsymptoticallyFlatGraph<Scalar> afg;
  afg.n = static_cast<int>(detail::as_integer(detail::member(j, "n", where), where + "/n"));
  afg.r = static_cast<int>(detail::as_integer(detail::member(j, "r", where), where + "/r"));
  afg.rho = j.contains("rho") ? static_cast<int>(detail::as_integer(j["rho"], where + "/rho"))
                              : default_rigidity_radius(afg.r);
  if (afg.n < 2 || afg.n > kMaxDimension) detail::bad_input(where + "/n", "need 2 <= n <= 8");
  if (afg.r < 0) detail::bad_input(where + "/r", "core radius must be non-negative");
  afg.core = graph_from_json<Scalar>(detail::member(j, "core", where), where + "/core", false);
  const Json& iface = detail::member(j, "interface", where);
  if (!iface.is_array()) detail::bad_input(where + "/interface", "expected an array");
  for (std::size_t i = 0; i < iface.size(); ++i) {
    const std::string at = where + "/interface/" + std::to_string(i);
    InterfaceEdge<Scalar> e;
    e.core_vertex = detail::as_id(detail::member(iface[i], "core_vertex", at), at + "/core_vertex");
    e.grid_vertex = detail::as_point(detail::member(iface[i], "grid_vertex", at), at + "/grid_vertex", afg.n);
    e.w = iface[i].contains("w") ? scalar_from_json<Scalar>(iface[i]["w"], at + "/w") : Scalar(1);
    afg.interface.push_back(std::move(e));
  }
  if (j.contains("outer_weights") && !j["outer_weights"].is_null()) {
    Json table = j["outer_weights"];
    if (!table.is_object()) detail::bad_input(where + "/outer_weights", "expected a grid weight table");
    if (!table.contains("n")) table["n"] = afg.n;
    if (!table.contains("rho")) table["rho"] = afg.rho;
    auto gw = grid_from_json<Scalar>(table, where + "/outer_weights");
    if (gw.dimension() != afg.n) detail::bad_input(where + "/outer_weights", "dimension mismatch");
    afg.outer_weights = gw.provider();
  }
  return afg;
}

template <typename Scalar>
Json afg_to_json(const AsymptoticallyFlatGraph<Scalar>& afg) {
  Json out = Json::object();
  out["n"] = afg.n;
  out["r"] = afg.r;
  out["rho"] = afg.rho;
  out["core"] = graph_to_json(afg.core);
  Json iface = Json::array();
  for (const auto& e : afg.interface) {
    Json je = Json::object();
    je["core_vertex"] = e.core_vertex;
    je["grid_vertex"] = point_to_json(e.grid_vertex);
    if (e.w != Scalar(1)) je["w"] = scalar_to_json(e.w);
    iface.push_back(std::move(je));
  }
  out["interface"] = std::move(iface);
  if (afg.outer_weights) {
    GridWindow<Scalar> gw(afg.n, afg.rho, *afg.outer_weights);
    Json table = grid_to_json(gw);
    table.erase("n");
    table.erase("rho");
    out["outer_weights"] = std::move(table);
  }
  return out;
}

template <typename Scalar>
Json rigidity_report_to_json(const RigidityReport<Scalar>& rep) {
  Json out = Json::object();
  out["is_standard_grid"] = rep.verdict;
  out["failed_stage"] = rep.failed_stage ? Json(*rep.failed_stage) : Json(nullptr);
  out["failed_level"] = rep.failed_level;
  Json stages = Json::array();
  for (const auto& s : rep.stages) {
    Json js = Json::object();
    js["stage"] = s.name;
    js["level"] = s.level;
    js["passed"] = s.passed;
    js["detail"] = s.detail;
    stages.push_back(std::move(js));
  }
  out["stages"] = std::move(stages);
  auto label = [&](VertexId v) { return v < rep.labels.size() ? Json(rep.labels[v]) : Json(v); };
  Json bounds = Json::array();
  for (const auto& b : rep.bounds) {
    Json jb = Json::object();
    jb["tuple"] = point_to_json(b.tuple);
    jb["constructed"] = b.constructed;
    if (b.constructed) {
      jb["u_j"] = label(b.u_j);
      jb["v_s"] = label(b.v_s);
      jb["j"] = b.j;
      jb["sigma"] = b.sigma;
      jb["lipschitz"] = b.lipschitz;
      jb["bound"] = scalar_to_json(b.bound);
      jb["unit_measure_formula"] = scalar_to_json(b.formula);
      jb["kappa"] = b.kappa ? scalar_to_json(*b.kappa) : Json(nullptr);
    }
    bounds.push_back(std::move(jb));
  }
  out["test_function_bounds"] = std::move(bounds);
  Json diags = Json::array();
  for (const auto& d : rep.diagonals) {
    Json jd = Json::object();
    jd["u"] = label(d.u);
    jd["v"] = label(d.v);
    jd["h_u"] = point_to_json(d.hu);
    jd["h_v"] = point_to_json(d.hv);
    jd["rotated_jump"] = d.rotated_jump ? Json(*d.rotated_jump) : Json(nullptr);
    diags.push_back(std::move(jd));
  }
  out["diagonal_edges"] = std::move(diags);
  out["min_kappa"] = rep.min_kappa ? scalar_to_json(*rep.min_kappa) : Json(nullptr);
  out["edges_certified"] = rep.edges_certified;
  out["edges_skipped"] = rep.edges_skipped;
  return out;
}

/// Input of the salami-extend command.
template <typename Scalar>
struct SalamiInput {
  WeightedGraph<Scalar> graph;
  SalamiPartition partition;
  PotentialFunction<Rational> f;
  std::vector<VertexId> boundary;
};

template <typename Scalar>
SalamiInput<Scalar> salami_from_json(const Json& j, const std::string& where = "salami") {
  SalamiInput<Scalar> in{graph_from_json<Scalar>(detail::member(j, "graph", where), where + "/graph"), {}, {}, {}};
  const auto& g = in.graph;
  auto ids = [&](const char* key, bool required) {
    std::vector<VertexId> out;
    if (!required && !j.contains(key)) return out;
    const Json& arr = detail::member(j, key, where);
    if (!arr.is_array()) detail::bad_input(where + "/" + key, "expected an array of vertex ids");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string id = detail::as_id(arr[i], where + "/" + key + "/" + std::to_string(i));
      auto v = g.find(id);
      if (!v) detail::bad_input(where + "/" + key + "/" + std::to_string(i), "unknown vertex '" + id + "'");
      out.push_back(*v);
    }
    return out;
  };
  in.partition.X = ids("X", true);
  in.partition.Y = ids("Y", true);
  in.partition.K = ids("K", true);
  in.boundary = ids("boundary", false);
  in.f = PotentialFunction<Rational>(g.vertex_count());
  const Json& f = detail::member(j, "f", where);
  if (!f.is_object()) detail::bad_input(where + "/f", "expected an object from vertex id to value");
  for (const auto& [id, value] : f.items()) {
    auto v = g.find(id);
    if (!v) detail::bad_input(where + "/f/" + id, "unknown vertex");
    in.f.set(*v, scalar_from_json<Rational>(value, where + "/f/" + id));
  }
  return in;
}

}  // namespace admgraph
