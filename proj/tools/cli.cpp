#include "admgraph/admgraph.hpp"
#include "admgraph/io.hpp"
#include "admgraph/selfcheck.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace admgraph;

enum ExitCode { kOk = 0, kNegative = 1, kInputError = 2, kBudget = 3 };

struct Globals {
  std::string numeric;  // empty: exact unless the input forces floating point
  unsigned jobs = 1;
  std::string format = "table";
  std::uint64_t seed = selfcheck::Options{}.seed;
};

/// Everything a command prints: the JSON document for --format json and a
/// table plus summary lines for csv and table.
struct Output {
  Json doc = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> summary;
  int code = kOk;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit(const Output& out, const std::string& format) {
  if (format == "json") {
    std::cout << out.doc.dump(2) << "\n";
    return;
  }
  if (format == "csv") {
    for (std::size_t c = 0; c < out.columns.size(); ++c) std::cout << (c ? "," : "") << csv_field(out.columns[c]);
    std::cout << "\n";
    for (const auto& row : out.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) std::cout << (c ? "," : "") << csv_field(row[c]);
      std::cout << "\n";
    }
    return;
  }
  std::vector<std::size_t> width(out.columns.size(), 0);
  for (std::size_t c = 0; c < out.columns.size(); ++c) width[c] = out.columns[c].size();
  for (const auto& row : out.rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::cout << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
    }
    std::cout << "\n";
  };
  if (!out.columns.empty()) {
    line(out.columns);
    for (const auto& row : out.rows) line(row);
  }
  for (const auto& [key, value] : out.summary) std::cout << key << ": " << value << "\n";
}

Json load(const std::string& path) {
  if (path == "-") {
    std::stringstream buf;
    buf << std::cin.rdbuf();
    return parse_json_text(buf.str(), "<stdin>");
  }
  return read_json_file(path);
}

bool want_exact(const Globals& g, bool float_only) {
  if (g.numeric == "float") return false;
  if (g.numeric == "exact" && float_only) throw ParseError("this input only supports --numeric float");
  return !float_only;
}

template <typename Scalar>
std::string show(const Scalar& v) {
  return format_scalar(v);
}

std::string show_bool(bool b) { return b ? "true" : "false"; }

std::string show_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

/// Progress for long loops goes to standard error only.
class Progress {
 public:
  Progress(std::string what, std::size_t total) : what_(std::move(what)), total_(total) {}
  void update(std::size_t done) {
    if (total_ < 2000) return;
    std::cerr << "\r" << what_ << ": " << done << "/" << total_ << std::flush;
    if (done == total_) std::cerr << "\n";
  }

 private:
  std::string what_;
  std::size_t total_;
};

// ---------------------------------------------------------------- grid input

struct GridSource {
  std::string path;
  bool unit = false;
  int n = 2;
  int rho = 4;
  std::string field;
  double m = 1.0;
  double amplitude = 1.0;
  double q = 2.0;
};

void add_grid_options(CLI::App* cmd, GridSource& src, bool with_field) {
  cmd->add_flag("--grid", src.unit, "Use the unit grid window Q_rho in Z^n instead of a file");
  cmd->add_option("--n", src.n, "Dimension of the generated window")->check(CLI::Range(1, kMaxDimension));
  cmd->add_option("--rho", src.rho, "Radius of the generated window (overrides the file)")->check(CLI::NonNegativeNumber);
  if (with_field) {
    cmd->add_option("--field", src.field, "Built-in weight field")
        ->check(CLI::IsMember({"schwarzschild", "log-model", "axial-power", "radial-power", "constant"}));
    cmd->add_option("--m", src.m, "Mass parameter of the field");
    cmd->add_option("--amplitude", src.amplitude, "Amplitude of a power-law field");
    cmd->add_option("--q", src.q, "Decay exponent of a power-law field");
  }
}

/// A grid window read from a weight table or a field descriptor. Field windows
/// are always floating point.
struct LoadedGrid {
  std::optional<GridWindow<Rational>> exact;
  std::optional<GridWindow<double>> floating;
  std::string description;
};

LoadedGrid load_grid(const GridSource& src, const Globals& g, CLI::App* cmd) {
  LoadedGrid out;
  const bool rho_given = cmd->count("--rho") > 0;
  std::optional<Json> j;
  if (!src.path.empty()) j = load(src.path);
  FieldDescriptor field;
  bool is_field = !src.field.empty() || (j && j->is_object() && j->contains("field"));
  if (is_field) {
    if (j && j->contains("field")) {
      field = field_from_json(*j, src.path);
    } else {
      field.name = src.field;
      field.n = src.field == "log-model" ? 2 : src.n;
      if (cmd->count("--n")) field.n = src.n;
      field.m = src.m;
      field.amplitude = src.amplitude;
      field.q = src.q;
    }
    int rho = src.rho;
    if (!rho_given && j && j->contains("rho")) rho = static_cast<int>(j->at("rho").get<long>());
    if (!rho_given && !(j && j->contains("rho"))) throw ParseError("a field needs --rho or a 'rho' member");
    if (g.numeric == "exact") throw ParseError("weight fields are evaluated in floating point; use --numeric float");
    out.floating = field_window(field, rho);
    out.description = field.name;
    return out;
  }
  bool exact = want_exact(g, false);
  if (src.unit || !j) {
    if (exact) {
      out.exact.emplace(src.n, src.rho, WeightProvider<Rational>::constant(Rational(1)));
    } else {
      out.floating.emplace(src.n, src.rho, WeightProvider<double>::constant(1.0));
    }
    out.description = "unit grid";
    return out;
  }
  Json table = *j;
  if (rho_given) table["rho"] = src.rho;
  if (exact) {
    out.exact = grid_from_json<Rational>(table, src.path);
  } else {
    out.floating = grid_from_json<double>(table, src.path);
  }
  out.description = src.path;
  return out;
}

template <typename F>
auto with_grid(const LoadedGrid& lg, F&& f) {
  if (lg.exact) return f(*lg.exact);
  return f(*lg.floating);
}

// ---------------------------------------------------------------- curvature

struct CurvatureArgs {
  std::string input;
  GridSource grid;
  std::vector<std::string> edges;
  bool witness = false;
  std::uint64_t budget = EnumerationOptions{}.node_budget;
};

template <typename Scalar>
Output curvature_on_graph(const WeightedGraph<Scalar>& g, const std::vector<std::pair<VertexId, VertexId>>& selected,
                          const CurvatureArgs& a, const Globals& gl) {
  EnumerationOptions opts;
  opts.node_budget = a.budget;
  struct Row {
    std::optional<CurvatureResult<Scalar>> result;
    std::string error;
  };
  std::vector<Row> rows(selected.size());
  Progress progress("curvature", selected.size());
  const std::size_t chunk = 512;
  for (std::size_t start = 0; start < selected.size(); start += chunk) {
    const std::size_t count = std::min(chunk, selected.size() - start);
    parallel_for(count, gl.jobs, [&](std::size_t i) {
      auto [u, v] = selected[start + i];
      try {
        rows[start + i].result = edge_curvature(g, u, v, opts);
      } catch (const BudgetExceeded& e) {
        rows[start + i].error = e.what();
      }
    });
    progress.update(start + count);
  }
  Output out;
  out.columns = {"u", "v", "kappa"};
  if (a.witness) out.columns.push_back("witness");
  out.columns.push_back("error");
  Json edges = Json::array();
  std::size_t failed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [u, v] = selected[i];
    Json je = Json::object();
    je["u"] = g.label(u);
    je["v"] = g.label(v);
    std::vector<std::string> cells{g.label(u), g.label(v)};
    if (rows[i].result) {
      je["kappa"] = scalar_to_json(rows[i].result->kappa);
      cells.push_back(show(rows[i].result->kappa));
    } else {
      ++failed;
      je["kappa"] = nullptr;
      cells.push_back("");
    }
    if (a.witness) {
      std::string text;
      Json jw = Json::object();
      if (rows[i].result) {
        for (VertexId z : rows[i].result->domain) {
          int val = rows[i].result->witness(z);
          jw[g.label(z)] = val;
          text += (text.empty() ? "" : " ") + g.label(z) + "=" + std::to_string(val);
        }
      }
      je["witness"] = rows[i].result ? jw : Json(nullptr);
      cells.push_back(text);
    }
    if (!rows[i].error.empty()) je["error"] = rows[i].error;
    cells.push_back(rows[i].error);
    edges.push_back(std::move(je));
    out.rows.push_back(std::move(cells));
  }
  out.doc["edges"] = std::move(edges);
  out.doc["budget_exceeded"] = failed;
  out.summary.emplace_back("edges", std::to_string(rows.size()));
  if (failed) {
    out.summary.emplace_back("budget exceeded", std::to_string(failed));
    out.code = kBudget;
  }
  return out;
}

template <typename Scalar>
std::vector<std::pair<VertexId, VertexId>> select_edges(const WeightedGraph<Scalar>& g,
                                                        const std::vector<std::string>& specs) {
  std::vector<std::pair<VertexId, VertexId>> out;
  if (specs.empty()) {
    for (const auto& e : g.edges()) out.emplace_back(e.u, e.v);
    return out;
  }
  for (const auto& s : specs) {
    auto comma = s.find(',');
    if (comma == std::string::npos) throw ParseError("--edge expects 'u,v', got '" + s + "'");
    auto u = g.find(s.substr(0, comma));
    auto v = g.find(s.substr(comma + 1));
    if (!u || !v) throw ParseError("--edge '" + s + "' names an unknown vertex");
    if (!g.adjacent(*u, *v)) throw ParseError("--edge '" + s + "' is not an edge");
    out.emplace_back(*u, *v);
  }
  return out;
}

/// Grid windows are materialized and only edges inside Q_{ρ−1}, whose balls
/// are not cut by the window, are evaluated.
template <typename Scalar>
Output curvature_on_grid(const GridWindow<Scalar>& gw, const CurvatureArgs& a, const Globals& gl) {
  auto m = materialize(gw);
  const int inner = gw.radius() - 1;
  std::vector<std::pair<VertexId, VertexId>> selected;
  if (!a.edges.empty()) {
    selected = select_edges(m.graph, a.edges);
  } else {
    for (const auto& e : m.graph.edges()) {
      if (m.points[e.u].linf() <= inner && m.points[e.v].linf() <= inner) {
        selected.emplace_back(e.u, e.v);
      }
    }
  }
  auto out = curvature_on_graph(m.graph, selected, a, gl);
  out.doc["window"] = Json{{"n", gw.dimension()}, {"rho", gw.radius()}, {"evaluated_radius", inner}};
  return out;
}

int run_curvature(const CurvatureArgs& a, const Globals& gl, CLI::App* cmd) {
  Output out;
  std::optional<Json> j;
  if (!a.input.empty() && !a.grid.unit) j = load(a.input);
  if (j && j->is_object() && j->contains("vertices")) {
    if (want_exact(gl, false)) {
      auto g = graph_from_json<Rational>(*j, a.input);
      out = curvature_on_graph(g, select_edges(g, a.edges), a, gl);
    } else {
      auto g = graph_from_json<double>(*j, a.input);
      out = curvature_on_graph(g, select_edges(g, a.edges), a, gl);
    }
  } else {
    GridSource src = a.grid;
    src.path = a.grid.unit ? "" : a.input;
    if (src.path.empty()) src.unit = true;
    auto lg = load_grid(src, gl, cmd);
    out = with_grid(lg, [&](const auto& gw) { return curvature_on_grid(gw, a, gl); });
  }
  emit(out, gl.format);
  return out.code;
}

// ---------------------------------------------------------------- scalar

struct ScalarArgs {
  std::string input;
  GridSource grid;
  bool brute = false;
};

template <typename Scalar>
Output scalar_on_graph(const WeightedGraph<Scalar>& g, const Globals& gl) {
  auto outcomes = all_edge_curvatures(g, EnumerationOptions{}, gl.jobs);
  std::vector<Scalar> r(g.vertex_count(), Scalar(0));
  std::vector<char> missing(g.vertex_count(), 0);
  for (const auto& o : outcomes) {
    if (!o.kappa) {
      missing[o.u] = missing[o.v] = 1;
      continue;
    }
    r[o.u] += *o.kappa;
    r[o.v] += *o.kappa;
  }
  Output out;
  out.columns = {"vertex", "R"};
  Json verts = Json::array();
  Scalar total(0);
  bool nonneg = true;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    Json jv = Json::object();
    jv["vertex"] = g.label(v);
    jv["R"] = missing[v] ? Json(nullptr) : scalar_to_json(r[v]);
    verts.push_back(std::move(jv));
    out.rows.push_back({g.label(v), missing[v] ? "" : show(r[v])});
    if (!missing[v]) {
      total += r[v];
      if (r[v] < Scalar(0)) nonneg = false;
    } else {
      out.code = kBudget;
    }
  }
  out.doc["vertices"] = std::move(verts);
  out.doc["total"] = scalar_to_json(total);
  out.doc["nonnegative"] = nonneg;
  out.summary = {{"total", show(total)}, {"nonnegative", show_bool(nonneg)}};
  return out;
}

/// Closed form R = linear − Abs on Q_{ρ−2}, or exhaustive search with --brute.
template <typename Scalar>
Output scalar_on_grid(const GridWindow<Scalar>& gw, bool brute, const Globals& gl) {
  const int inner = gw.radius() - 2;
  if (inner < 0) throw DomainError("window radius must be at least 2");
  std::vector<GridPoint> points;
  for_each_cube_point(gw.dimension(), inner, [&](const GridPoint& p) { points.push_back(p); });
  std::vector<Scalar> r(points.size()), a(points.size()), lin(points.size());
  std::optional<MaterializedGrid<Scalar>> m;
  if (brute) m = materialize(gw);
  parallel_for(points.size(), gl.jobs, [&](std::size_t i) {
    a[i] = abs_term(gw, points[i]);
    lin[i] = linear_term(gw, points[i]);
    r[i] = brute ? scalar_curvature(m->graph, m->at(points[i])) : Scalar(lin[i] - a[i]);
  });
  Output out;
  out.columns = {"vertex", "R", "linear", "Abs"};
  Json verts = Json::array();
  Scalar total(0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Json jv = Json::object();
    jv["vertex"] = point_to_json(points[i]);
    jv["R"] = scalar_to_json(r[i]);
    jv["linear"] = scalar_to_json(lin[i]);
    jv["Abs"] = scalar_to_json(a[i]);
    verts.push_back(std::move(jv));
    out.rows.push_back({points[i].to_string(), show(r[i]), show(lin[i]), show(a[i])});
    total += r[i];
  }
  out.doc["method"] = brute ? "exhaustive" : "closed-form";
  out.doc["evaluated_radius"] = inner;
  out.doc["vertices"] = std::move(verts);
  out.doc["total"] = scalar_to_json(total);
  out.summary = {{"method", brute ? "exhaustive" : "closed-form"}, {"total", show(total)}};
  return out;
}

int run_scalar(const ScalarArgs& a, const Globals& gl, CLI::App* cmd) {
  Output out;
  std::optional<Json> j;
  if (!a.input.empty() && !a.grid.unit) j = load(a.input);
  if (j && j->is_object() && j->contains("vertices")) {
    if (want_exact(gl, false)) {
      out = scalar_on_graph(graph_from_json<Rational>(*j, a.input), gl);
    } else {
      out = scalar_on_graph(graph_from_json<double>(*j, a.input), gl);
    }
  } else {
    GridSource src = a.grid;
    src.path = a.grid.unit ? "" : a.input;
    auto lg = load_grid(src, gl, cmd);
    out = with_grid(lg, [&](const auto& gw) { return scalar_on_grid(gw, a.brute, gl); });
  }
  emit(out, gl.format);
  return out.code;
}

// ---------------------------------------------------------------- mass

struct MassArgs {
  std::string input;
  GridSource grid;
  std::optional<int> r_max;
  double tolerance = 1e-3;
  int k_stable = 5;
};

template <typename Scalar>
Output mass_report(const GridWindow<Scalar>& gw, const MassArgs& a) {
  const int r_max = a.r_max.value_or(gw.radius() - 2);
  auto est = mass_estimate(gw, r_max, ScalarTraits<Scalar>::from_double(a.tolerance), std::min(a.k_stable, r_max + 1));
  Output out;
  out.columns = {"r", "gap", "M_r"};
  Json series = Json::array();
  for (int r = 0; r <= r_max; ++r) {
    series.push_back(Json{{"r", r}, {"gap", scalar_to_json(est.gaps[r])}, {"M_r", scalar_to_json(est.partials[r])}});
    out.rows.push_back({std::to_string(r), show(est.gaps[r]), show(est.partials[r])});
  }
  out.doc["dimension"] = gw.dimension();
  out.doc["r_max"] = r_max;
  out.doc["series"] = std::move(series);
  out.doc["converged"] = est.converged;
  out.doc["last_partial"] = scalar_to_json(est.last_partial);
  out.doc["extrapolated"] = scalar_to_json(est.extrapolated);
  out.doc["estimate"] = est.value ? scalar_to_json(*est.value) : Json(nullptr);
  out.summary = {{"converged", show_bool(est.converged)},
                 {"last partial", show(est.last_partial)},
                 {"extrapolated", show(est.extrapolated)}};
  out.code = est.converged ? kOk : kNegative;
  return out;
}

int run_mass(const MassArgs& a, const Globals& gl, CLI::App* cmd) {
  GridSource src = a.grid;
  src.path = a.grid.unit ? "" : a.input;
  auto lg = load_grid(src, gl, cmd);
  auto out = with_grid(lg, [&](const auto& gw) { return mass_report(gw, a); });
  emit(out, gl.format);
  return out.code;
}

// ---------------------------------------------------------------- flatness

struct FlatnessArgs {
  std::string input;
  GridSource grid;
  double p = 0;
  double slack = 0.25;
  bool strong = false;
};

Json fit_to_json(const DecayFit& f) {
  Json j = Json::object();
  j["identically_zero"] = f.identically_zero;
  j["usable_shells"] = f.usable_shells;
  j["exponent"] = f.identically_zero ? Json(nullptr) : Json(f.exponent);
  return j;
}

template <typename Scalar>
Output flatness_report(const GridWindow<Scalar>& gw, const FlatnessArgs& a) {
  const double p = a.p > 0 ? a.p : gw.dimension() + 0.5;
  auto d = flatness_diagnostics(gw, p, a.slack);
  Output out;
  out.columns = {"r", "max|w-1| outer", "max|w-1|", "max Abs", "max|R|"};
  Json shells = Json::array();
  const auto& pr = d.profile;
  for (std::size_t i = 0; i < pr.radii.size(); ++i) {
    shells.push_back(Json{{"r", pr.radii[i]},
                          {"weight_outer", pr.weight_outer[i]},
                          {"weight_all", pr.weight_all[i]},
                          {"abs_max", pr.abs_max[i]},
                          {"scalar_max", pr.scalar_max[i]}});
    out.rows.push_back({std::to_string(pr.radii[i]), show_double(pr.weight_outer[i]), show_double(pr.weight_all[i]),
                        show_double(pr.abs_max[i]), show_double(pr.scalar_max[i])});
  }
  out.doc["p_claimed"] = p;
  out.doc["shells"] = std::move(shells);
  out.doc["fits"] = Json{{"weight_outer", fit_to_json(d.weight_outer_fit)},
                         {"weight_all", fit_to_json(d.weight_all_fit)},
                         {"abs", fit_to_json(d.abs_fit)},
                         {"scalar", fit_to_json(d.scalar_fit)}};
  out.doc["weights_tend_to_one"] = d.weights_tend_to_one;
  out.doc["abs_decays"] = d.abs_decays;
  out.doc["scalar_decays"] = d.scalar_decays;
  out.doc["exponent_admissible"] = d.exponent_admissible;
  out.doc["verdict"] = d.verdict;
  out.summary = {{"p", show_double(p)},
                 {"weights tend to 1", show_bool(d.weights_tend_to_one)},
                 {"Abs decays", show_bool(d.abs_decays)},
                 {"R decays", show_bool(d.scalar_decays)},
                 {"asymptotically flat", show_bool(d.verdict)}};
  bool ok = d.verdict;
  if (a.strong) {
    auto s = strong_decay_check(gw, p, a.slack);
    out.doc["strong_decay"] = Json{{"hypotheses_hold", s.hypotheses_hold},
                                   {"gap_bound_holds", s.gap_bound_holds},
                                   {"mass_tends_to_zero", s.mass_tends_to_zero}};
    out.summary.emplace_back("strong decay hypotheses", show_bool(s.hypotheses_hold));
    out.summary.emplace_back("mass tends to 0", show_bool(s.mass_tends_to_zero));
  }
  out.code = ok ? kOk : kNegative;
  return out;
}

int run_flatness(const FlatnessArgs& a, const Globals& gl, CLI::App* cmd) {
  GridSource src = a.grid;
  src.path = a.grid.unit ? "" : a.input;
  auto lg = load_grid(src, gl, cmd);
  auto out = with_grid(lg, [&](const auto& gw) { return flatness_report(gw, a); });
  emit(out, gl.format);
  return out.code;
}

// ---------------------------------------------------------------- torus

struct TorusArgs {
  std::string input;
  std::string example;
  int identity = 0;
  long k = 0;
};

template <typename Scalar>
Output torus_report(const TorusInput<Scalar>& in, const Globals& gl) {
  Output out;
  out.doc["A"] = in.spec.A;
  out.doc["k"] = in.spec.k;
  TorusGraph<Scalar> t;
  try {
    t = build_torus<Scalar>(in.spec, in.weights);
  } catch (const DegenerateQuotient& e) {
    out.doc["distance_condition"] = false;
    out.doc["degenerate_quotient"] = e.what();
    out.summary = {{"distance condition", "false (degenerate quotient: " + std::string(e.what()) + ")"}};
    out.code = kNegative;
    return out;
  }
  auto dc = distance_condition(t);
  out.doc["modulus"] = t.modulus();
  out.doc["vertices"] = t.graph().vertex_count();
  out.doc["distance_condition"] = dc.holds;
  if (dc.violation) {
    const auto& v = *dc.violation;
    out.doc["violation"] = Json{{"center", point_to_json(t.representative(v.center))},
                                {"u", point_to_json(v.u)},
                                {"v", point_to_json(v.v)},
                                {"lattice_distance", v.lattice_distance},
                                {"torus_distance", v.torus_distance}};
  }
  auto total = total_scalar_curvature(t);
  const int n = t.dimension();
  std::vector<std::vector<TorusKappa<Scalar>>> kappa(t.graph().vertex_count());
  parallel_for(t.graph().vertex_count(), gl.jobs, [&](std::size_t v) {
    for (int i = 0; i < n; ++i) kappa[v].push_back(torus_kappa(t, static_cast<VertexId>(v), i, 1));
  });
  out.columns = {"x", "dir", "w", "kappa", "method"};
  Json edges = Json::array();
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    for (int i = 0; i < n; ++i) {
      const auto& k = kappa[v][i];
      edges.push_back(Json{{"x", point_to_json(t.representative(v))},
                           {"dir", i},
                           {"w", scalar_to_json(t.step_weight(v, i, 1))},
                           {"kappa", scalar_to_json(k.kappa)},
                           {"closed_form", k.closed_form}});
      out.rows.push_back({t.representative(v).to_string(), std::to_string(i), show(t.step_weight(v, i, 1)),
                          show(k.kappa), k.closed_form ? "closed-form" : "exhaustive"});
    }
  }
  out.doc["edges"] = std::move(edges);
  Json cycles = Json::array();
  for (int i = 0; i < n; ++i) {
    Json per = Json::array();
    for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
      auto c = cycle_sum(t, v, i);
      per.push_back(Json{{"x", point_to_json(t.representative(v))}, {"S", scalar_to_json(c.sum)}});
    }
    cycles.push_back(Json{{"dir", i}, {"total", scalar_to_json(total.direction_totals[i])}, {"sums", std::move(per)}});
  }
  out.doc["cycle_sums"] = std::move(cycles);
  Json scalar = Json::array();
  bool nonneg = true, zero = true;
  for (VertexId v = 0; v < t.graph().vertex_count(); ++v) {
    scalar.push_back(Json{{"x", point_to_json(t.representative(v))}, {"R", scalar_to_json(total.scalar[v])}});
    if (total.scalar[v] < Scalar(0)) nonneg = false;
    if (sign_of(total.scalar[v]) != 0) zero = false;
  }
  out.doc["scalar"] = std::move(scalar);
  out.doc["total"] = scalar_to_json(total.total);
  out.doc["decomposed"] = scalar_to_json(total.decomposed);
  out.doc["decomposition_holds"] = approx_equal(total.total, total.decomposed);
  out.doc["total_nonpositive"] = !(Scalar(0) < total.total);
  out.doc["scalar_nonnegative"] = nonneg;
  out.doc["scalar_zero"] = zero;
  out.summary = {{"vertices", std::to_string(t.graph().vertex_count())},
                 {"distance condition", show_bool(dc.holds)},
                 {"total", show(total.total)},
                 {"2/q * sum of cycle sums", show(total.decomposed)}};
  for (int i = 0; i < n; ++i) {
    out.summary.emplace_back("cycle sums, direction " + std::to_string(i), show(total.direction_totals[i]));
  }
  out.code = dc.holds && !(Scalar(0) < total.total) ? kOk : kNegative;
  return out;
}

int run_torus(const TorusArgs& a, const Globals& gl, CLI::App* cmd) {
  Json j;
  if (!a.input.empty()) {
    j = load(a.input);
  } else if (a.example == "det7") {
    j = Json{{"A", det7_torus_spec().A}, {"k", 1}};
  } else if (a.identity > 0) {
    j = Json{{"A", identity_torus_spec(a.identity, 1).A}, {"k", 1}};
  } else {
    throw ParseError("torus needs an input file, --example det7 or --identity N");
  }
  if (cmd->count("--k")) j["k"] = a.k;
  Output out;
  if (want_exact(gl, false)) {
    out = torus_report(torus_from_json<Rational>(j, a.input.empty() ? "torus" : a.input), gl);
  } else {
    out = torus_report(torus_from_json<double>(j, a.input.empty() ? "torus" : a.input), gl);
  }
  emit(out, gl.format);
  return out.code;
}

// ---------------------------------------------------------------- salami-extend

int run_salami(const std::string& input, const Globals& gl) {
  Json j = load(input);
  auto in = salami_from_json<Rational>(j, input);
  auto sf = extremal_extension(in.graph, in.partition, in.f);
  std::vector<VertexId> all(in.graph.vertex_count());
  for (VertexId v = 0; v < all.size(); ++v) all[v] = v;
  auto lip = is_lipschitz(in.graph, sf, Rational(1), std::span<const VertexId>(all));
  auto prop = harmonicity_propagation_check(in.graph, in.partition, sf, in.boundary);
  std::vector<char> side(in.graph.vertex_count(), 0);
  for (VertexId v : in.partition.X) side[v] = 'X';
  for (VertexId v : in.partition.K) side[v] = 'K';
  for (VertexId v : in.partition.Y) side[v] = 'Y';
  Output out;
  out.columns = {"vertex", "part", "Sf", "laplacian"};
  Json values = Json::object();
  Json rows = Json::array();
  for (VertexId v = 0; v < in.graph.vertex_count(); ++v) {
    if (!sf.defined(v)) continue;
    Rational lap = laplacian(in.graph, sf, v);
    values[in.graph.label(v)] = scalar_to_json(sf(v));
    rows.push_back(Json{{"vertex", in.graph.label(v)},
                        {"part", std::string(1, side[v])},
                        {"Sf", scalar_to_json(sf(v))},
                        {"laplacian", scalar_to_json(lap)}});
    out.rows.push_back({in.graph.label(v), std::string(1, side[v]), show(sf(v)), show(lap)});
  }
  auto labels = [&](const std::vector<VertexId>& vs) {
    Json arr = Json::array();
    for (VertexId v : vs) arr.push_back(in.graph.label(v));
    return arr;
  };
  out.doc["Sf"] = std::move(values);
  out.doc["vertices"] = std::move(rows);
  out.doc["lipschitz"] = lip.holds;
  out.doc["harmonic_on_core"] = prop.harmonic_on_core;
  out.doc["propagation_holds"] = prop.propagation_holds;
  out.doc["violations"] = labels(prop.violations);
  out.doc["truncation_artifacts"] = labels(prop.truncation_artifacts);
  out.summary = {{"1-Lipschitz", show_bool(lip.holds)},
                 {"harmonic on K", show_bool(prop.harmonic_on_core)},
                 {"propagation holds", show_bool(prop.propagation_holds)},
                 {"violations", std::to_string(prop.violations.size())},
                 {"truncation artifacts", std::to_string(prop.truncation_artifacts.size())}};
  out.code = lip.holds && prop.propagation_holds ? kOk : kNegative;
  emit(out, gl.format);
  return out.code;
}

// ---------------------------------------------------------------- rigidity

template <typename Scalar>
int rigidity_with(const Json& j, const std::string& where, const Globals& gl) {
  auto afg = afg_from_json<Scalar>(j, where);
  RigidityOptions opts;
  opts.jobs = gl.jobs;
  auto rep = rigidity_check(afg, opts);
  Output out;
  out.doc = rigidity_report_to_json(rep);
  out.columns = {"stage", "level", "passed", "detail"};
  for (const auto& s : rep.stages) {
    out.rows.push_back({s.name, std::to_string(s.level), show_bool(s.passed), s.detail});
  }
  out.summary = {{"standard grid", show_bool(rep.verdict)}};
  if (rep.failed_stage) out.summary.emplace_back("failed stage", *rep.failed_stage);
  out.code = rep.verdict ? kOk : kNegative;
  emit(out, gl.format);
  return out.code;
}

int run_rigidity(const std::string& input, const Globals& gl) {
  Json j = load(input);
  return want_exact(gl, false) ? rigidity_with<Rational>(j, input, gl) : rigidity_with<double>(j, input, gl);
}

// ---------------------------------------------------------------- examples

Json example_instance(const std::string& name) {
  if (name == "split-vertex") return graph_to_json(split_vertex_graph<Rational>());
  if (name == "split-cycle") return graph_to_json(split_cycle_graph<Rational>());
  if (name == "torus-det7") return torus_to_json(build_torus<Rational>(det7_torus_spec()));
  if (name == "schwarzschild") {
    FieldDescriptor f{"schwarzschild", 3, 1.0};
    Json j = field_to_json(f);
    j["rho"] = 52;
    return j;
  }
  if (name == "log-model") {
    FieldDescriptor f{"log-model", 2, 0.01};
    Json j = field_to_json(f);
    j["rho"] = 102;
    return j;
  }
  if (name == "split-vertex-core") return afg_to_json(split_vertex_afg<Rational>());
  if (name == "standard-core") return afg_to_json(standard_afg<Rational>(2, 1));
  if (name == "perturbed-core") return afg_to_json(standard_afg<Rational>(2, 1, std::nullopt, 1, Rational(3, 2)));
  throw ParseError("unknown example '" + name + "'");
}

int run_examples(const std::string& name, const std::string& output) {
  Json j = example_instance(name);
  if (output.empty()) {
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw ParseError(output + ": cannot open for writing");
  out << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- check

int run_check(const std::vector<int>& ids, const Globals& gl) {
  selfcheck::Options o;
  o.seed = gl.seed;
  o.jobs = gl.jobs;
  std::vector<int> which = ids;
  if (which.empty()) {
    for (int i = 1; i <= selfcheck::kCriterionCount; ++i) which.push_back(i);
  }
  bool all = true;
  Json results = Json::array();
  Output out;
  out.columns = {"criterion", "result", "seconds", "title", "detail"};
  for (int id : which) {
    std::cerr << "running criterion " << id << "\n";
    auto r = selfcheck::run_criterion(id, o);
    all = all && r.passed;
    results.push_back(Json{{"criterion", r.id},
                           {"passed", r.passed},
                           {"title", r.title},
                           {"seconds", r.seconds},
                           {"detail", r.detail}});
    if (gl.format == "table") std::cout << selfcheck::format_result(r) << std::endl;
    out.rows.push_back({std::to_string(r.id), r.passed ? "PASS" : "FAIL", show_double(r.seconds), r.title, r.detail});
  }
  out.doc["seed"] = gl.seed;
  out.doc["results"] = std::move(results);
  out.doc["all_passed"] = all;
  if (gl.format != "table") emit(out, gl.format);
  return all ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature, mass and rigidity computations on weighted graphs"};
  app.require_subcommand(1);
  Globals gl;
  app.add_option("--numeric", gl.numeric, "Number type: exact rationals or floating point")
      ->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--jobs,-j", gl.jobs, "Worker threads for independent units")->check(CLI::PositiveNumber);
  app.add_option("--format", gl.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
  app.add_option("--seed", gl.seed, "Random seed for the acceptance suite");

  CurvatureArgs ca;
  auto* curvature = app.add_subcommand("curvature", "Ollivier curvature of edges");
  curvature->add_option("input", ca.input, "Graph, grid table or field file ('-' for stdin)");
  add_grid_options(curvature, ca.grid, true);
  curvature->add_option("--edge", ca.edges, "Only this edge, given as 'u,v' (repeatable)");
  curvature->add_flag("--witness", ca.witness, "Print an optimal test function for every edge");
  curvature->add_option("--budget", ca.budget, "Search node budget per edge");

  ScalarArgs sa;
  auto* scalar = app.add_subcommand("scalar", "Scalar curvature R of vertices");
  scalar->add_option("input", sa.input, "Graph, grid table or field file");
  add_grid_options(scalar, sa.grid, true);
  scalar->add_flag("--brute", sa.brute, "Use exhaustive search on grids instead of the closed form");

  MassArgs ma;
  auto* mass = app.add_subcommand("mass", "Partial masses M_r and a limit estimate");
  mass->add_option("input", ma.input, "Grid table or field file");
  add_grid_options(mass, ma.grid, true);
  mass->add_option("--r-max", ma.r_max, "Largest shell (default rho - 2)");
  mass->add_option("--tolerance", ma.tolerance, "Spread allowed over the last partial masses");
  mass->add_option("--k-stable", ma.k_stable, "Number of partial masses that must agree")->check(CLI::PositiveNumber);

  FlatnessArgs fa;
  auto* flatness = app.add_subcommand("flatness", "Decay of |w - 1|, Abs and R by shell");
  flatness->add_option("input", fa.input, "Grid table or field file");
  add_grid_options(flatness, fa.grid, true);
  flatness->add_option("--p", fa.p, "Claimed decay exponent (default n + 1/2)");
  flatness->add_option("--slack", fa.slack, "Allowed shortfall of fitted exponents");
  flatness->add_flag("--strong", fa.strong, "Also test the strong decay hypotheses");

  TorusArgs ta;
  auto* torus = app.add_subcommand("torus", "Curvature of a discrete torus");
  torus->add_option("input", ta.input, "Torus file with A, k and weights");
  torus->add_option("--example", ta.example, "Built-in torus")->check(CLI::IsMember({"det7"}));
  torus->add_option("--identity", ta.identity, "Identity matrix of this dimension")->check(CLI::Range(1, kMaxDimension));
  torus->add_option("--k", ta.k, "Multiplier k of the modulus q = k|det A|")->check(CLI::PositiveNumber);

  std::string salami_input;
  auto* salami = app.add_subcommand("salami-extend", "Extremal 1-Lipschitz extension on a partitioned graph");
  salami->add_option("input", salami_input, "Salami file with graph, X, Y, K, f and optional boundary")->required();

  std::string rigidity_input;
  auto* rigidity = app.add_subcommand("rigidity", "Decide whether an asymptotically flat graph is the standard grid");
  rigidity->add_option("input", rigidity_input, "Asymptotically flat graph file")->required();

  std::string example_name, example_output;
  auto* examples = app.add_subcommand("examples", "Print a built-in instance");
  examples->add_option("name", example_name, "Instance name")
      ->required()
      ->check(CLI::IsMember({"split-vertex", "split-cycle", "torus-det7", "schwarzschild", "log-model",
                             "split-vertex-core", "standard-core", "perturbed-core"}));
  examples->add_option("-o,--output", example_output, "Write to this file instead of standard output");

  std::vector<int> criteria;
  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  check->add_option("--criterion", criteria, "Only these criteria (repeatable)")
      ->check(CLI::Range(1, selfcheck::kCriterionCount));

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*curvature) return run_curvature(ca, gl, curvature);
    if (*scalar) return run_scalar(sa, gl, scalar);
    if (*mass) return run_mass(ma, gl, mass);
    if (*flatness) return run_flatness(fa, gl, flatness);
    if (*torus) return run_torus(ta, gl, torus);
    if (*salami) return run_salami(salami_input, gl);
    if (*rigidity) return run_rigidity(rigidity_input, gl);
    if (*examples) return run_examples(example_name, example_output);
    if (*check) return run_check(criteria, gl);
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
