#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclescope/bounds.hpp"
#include "cyclescope/embed.hpp"
#include "cyclescope/error.hpp"
#include "cyclescope/graph.hpp"
#include "cyclescope/io.hpp"
#include "cyclescope/metrics.hpp"
#include "cyclescope/sbm.hpp"
#include "cyclescope/spectral.hpp"
#include "cyclescope/svd.hpp"

namespace cyclescope::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConvergence = 2, kInputError = 3 };

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

/// Built-in generator names: pure3cyclic[:size[:rho]], hidden3cyclic:q_ext,
/// mixedcycles[:rho_in[:rho_out]]; anything else is read as a spec JSON file.
inline BlockModelSpec resolve_spec(const std::string& name) {
  std::vector<std::string> parts;
  {
    std::stringstream ss(name);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
  }
  auto number = [&](std::size_t i, double fallback) {
    if (i >= parts.size()) return fallback;
    try {
      std::size_t used = 0;
      double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
      return v;
    } catch (const std::logic_error&) {
      throw Error(Errc::UnknownSpec, "bad parameter '" + parts[i] + "' in " + name);
    }
  };
  const std::string head = parts.empty() ? name : parts.front();
  if (head == "pure3cyclic" && parts.size() <= 3)
    return pure_3cyclic(static_cast<std::size_t>(number(1, 45)), number(2, 0.8));
  if (head == "mixedcycles" && parts.size() <= 3) return mixed_cycles(number(1, 0.8), number(2, 0.01));
  if (head == "hidden3cyclic" && parts.size() <= 2) {
    const double q = number(1, 2);
    if (q < 0 || q != std::floor(q)) throw Error(Errc::UnknownSpec, "q_ext must be a count: " + name);
    return hidden_3cyclic(static_cast<std::size_t>(q));
  }
  if (fs::is_regular_file(name)) {
    try {
      return read_json(name).get<BlockModelSpec>();
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, name + ": " + e.what());
    }
  }
  throw Error(Errc::UnknownSpec, "unknown generator spec '" + name + "'");
}

inline std::string slug(const std::string& name) {
  std::string out = fs::path(name).stem().string();
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_') c = '-';
  return out;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string spec;
  std::uint64_t seed = 1;
  std::string out = ".";
};

/// Writes <prefix>.edges.tsv and <prefix>.truth.json. A directory (existing,
/// or spelled with a trailing slash) gets the prefix <spec>-s<seed>.
inline fs::path cmd_generate(const GenerateArgs& a) {
  const auto spec = resolve_spec(a.spec);
  auto [g, truth] = sample(spec, a.seed);
  fs::path prefix = a.out;
  const bool dir = a.out.empty() || a.out.back() == '/' || fs::is_directory(a.out);
  if (dir) prefix = fs::path(a.out) / (slug(a.spec) + "-s" + std::to_string(a.seed));
  std::ostringstream edges;
  io::write_edge_list(edges, g);
  write_text(prefix.string() + ".edges.tsv", edges.str());
  json t = truth;
  t["generator"] = {{"spec", a.spec}, {"seed", a.seed}, {"model", spec}};
  write_text(prefix.string() + ".truth.json", t.dump(2) + "\n");
  std::cout << "wrote " << prefix.string() << ".edges.tsv (n=" << g.num_vertices()
            << ", m=" << g.num_edges() << ") and " << prefix.string() << ".truth.json\n";
  return prefix;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string graph;
  std::vector<std::string> targets{"1/3"};
  std::string side = "right";
  double tol = 1e-10;
  std::size_t dense_threshold = 4000;
  std::optional<double> eps;  // dbscan radius; with cluster=dbscan and no eps, a k-distance guess
  std::size_t min_pts = 5;
  double mag_threshold = 0.25;  // relative to the largest magnitude
  std::string cluster = "sector";
  std::string out = "run";
  bool drop_self_loops = false;
  std::optional<std::uint64_t> seed;  // recorded only; the pipeline is deterministic
};

inline std::string csv_for(const PlanarEmbedding& e, const ClusterResult& c,
                           const std::vector<Vertex>& vertex_map) {
  std::ostringstream os;
  os << "vertex,x,y,magnitude,angle,group\n" << std::setprecision(17);
  for (std::size_t i = 0; i < e.size(); ++i)
    os << vertex_map[i] << ',' << e.coords[i][0] << ',' << e.coords[i][1] << ',' << e.magnitude(i)
       << ',' << e.angle(i) << ',' << c.labels[i] << '\n';
  return os.str();
}

inline json analyze_target(const TransitionMatrix& b, const Digraph& g, const std::vector<Vertex>& vmap,
                           const AnalyzeArgs& a, const std::string& target_text, const fs::path& prefix) {
  const auto started = std::chrono::steady_clock::now();
  const RootTarget target = RootTarget::parse(target_text);
  const Side side = parse_side(a.side);
  SolverOptions opts;
  opts.tol = a.tol;
  opts.dense_threshold = a.dense_threshold;
  opts.warn = [](std::string_view msg) { std::cerr << "warning: " << msg << "\n"; };
  const auto solved = solve_nearest(b, target, side, opts);

  json t;
  t["target"] = target.to_string();
  t["method"] = solved.method;
  t["lambda"] = complex_json(solved.pair.lambda);
  t["epsilon"] = std::abs(solved.pair.lambda - target.value());
  json nearest = json::array();
  for (cplx z : solved.nearest)
    nearest.push_back({{"lambda", complex_json(z)}, {"distance", std::abs(z - target.value())}});
  t["nearest"] = nearest;
  t["residuals"] = {{"right", solved.pair.right ? json(solved.pair.right_residual) : json(nullptr)},
                    {"left", solved.pair.left ? json(solved.pair.left_residual) : json(nullptr)}};

  json embeddings = json::array();
  std::vector<Side> sides;
  if (wants_right(side)) sides.push_back(Side::Right);
  if (wants_left(side)) sides.push_back(Side::Left);
  for (Side s : sides) {
    const auto e = embed(solved.pair, s, target.q);
    ClusterResult c;
    json params;
    if (a.cluster == "sector") {
      const double threshold = a.mag_threshold * e.max_magnitude();
      c = sector_classify(e, target.q, threshold, &g);
      params = {{"mag_threshold_relative", a.mag_threshold}, {"mag_threshold", threshold}};
    } else if (a.cluster == "dbscan") {
      const double eps = a.eps ? *a.eps : suggest_eps(e.coords, a.min_pts);
      c = cluster_result(dbscan(e.coords, eps, a.min_pts), e, "dbscan");
      params = {{"eps", eps}, {"eps_source", a.eps ? "user" : "k-distance"}, {"min_pts", a.min_pts}};
    } else {
      throw Error(Errc::InvalidArgument, "cluster must be sector or dbscan");
    }
    const std::string csv_name = prefix.filename().string() + ".t" + std::to_string(target.p) + "-" +
                                 std::to_string(target.q) + "." + std::string(to_string(s)) + ".csv";
    write_text(prefix.parent_path() / csv_name, csv_for(e, c, vmap));
    json seeds = json::array();
    for (const auto& grp : extract_seeds(c, e, 5)) {
      json row = json::array();
      for (Vertex v : grp) row.push_back(vmap[v]);
      seeds.push_back(row);
    }
    const auto decay = decay_check(g, e, std::abs(solved.pair.lambda - target.value()), &c.labels);
    embeddings.push_back({{"schema", "cyclescope.embedding.v1"},
                          {"side", to_string(s)},
                          {"csv", csv_name},
                          {"degenerate", e.degenerate},
                          {"peak_vertex", vmap[e.peak_vertex()]},
                          {"decay_check",
                           {{"labeled_neighbors", decay.neighbors},
                            {"min_ratio", decay.min_ratio},
                            {"max_ratio", decay.max_ratio},
                            {"bound", decay.bound},
                            {"violations", decay.violations},
                            {"best_neighbor_ok", decay.best_neighbor_ok}}},
                          {"clustering",
                           {{"method", c.method},
                            {"parameters", params},
                            {"num_groups", c.num_groups()},
                            {"labels", c.labels},
                            {"seeds", seeds}}}});
  }
  t["embeddings"] = embeddings;
  t["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return t;
}

inline json cmd_analyze(const AnalyzeArgs& a) {
  const auto started = std::chrono::steady_clock::now();
  const auto loops = a.drop_self_loops ? SelfLoopPolicy::Drop : SelfLoopPolicy::Reject;
  const Digraph g = io::read_graph_file(a.graph, loops);
  const auto scc = largest_scc(g);
  if (scc.induced.num_vertices() < g.num_vertices())
    std::cerr << "restricting to the largest strongly connected component: "
              << scc.induced.num_vertices() << " of " << g.num_vertices() << " vertices\n";
  const TransitionMatrix b(scc.induced);

  json run;
  run["schema"] = "cyclescope.run.v1";
  run["version"] = kVersion;
  run["input"] = {{"graph", a.graph},
                  {"n", g.num_vertices()},
                  {"m", g.num_edges()},
                  {"scc_size", scc.induced.num_vertices()},
                  {"scc_edges", scc.induced.num_edges()},
                  {"vertex_map", scc.vertex_map}};
  run["parameters"] = {{"targets", a.targets},
                       {"side", a.side},
                       {"tol", a.tol},
                       {"dense_threshold", a.dense_threshold},
                       {"eps", a.eps ? json(*a.eps) : json(nullptr)},
                       {"min_pts", a.min_pts},
                       {"mag_threshold", a.mag_threshold},
                       {"cluster", a.cluster},
                       {"drop_self_loops", a.drop_self_loops},
                       {"seed", a.seed ? json(*a.seed) : json(nullptr)}};
  const fs::path prefix(a.out);
  json targets = json::array();
  for (const auto& text : a.targets) targets.push_back(analyze_target(b, scc.induced, scc.vertex_map, a, text, prefix));
  run["targets"] = targets;
  run["timings"] = {
      {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}};
  write_text(prefix.string() + ".run.json", run.dump(2) + "\n");
  for (const auto& t : targets)
    std::cout << "target " << t["target"].get<std::string>() << ": lambda = " << t["lambda"][0] << " + "
              << t["lambda"][1] << "i, distance " << t["epsilon"] << "\n";
  return run;
}

// ----------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string truth;
  std::string run;
  std::optional<std::string> target;
  std::string side = "right";
  std::optional<std::string> out;
};

/// Predicted labels in original index space (vertices outside the analyzed
/// SCC count as noise), for one target/side of a run document.
inline std::pair<std::vector<int>, int> run_labels(const json& run, std::size_t n_truth,
                                                   const std::optional<std::string>& target,
                                                   const std::string& side) {
  const auto n = run.at("input").at("n").get<std::size_t>();
  const auto vmap = run.at("input").at("vertex_map").get<std::vector<std::size_t>>();
  if (n != n_truth)
    throw Error(Errc::VertexMapMismatch, "run covers " + std::to_string(n) + " vertices, truth " +
                                             std::to_string(n_truth));
  for (auto v : vmap)
    if (v >= n) throw Error(Errc::VertexMapMismatch, "vertex map entry past the vertex count");
  for (const auto& t : run.at("targets")) {
    if (target && t.at("target").get<std::string>() != *target) continue;
    for (const auto& e : t.at("embeddings")) {
      if (e.at("side").get<std::string>() != side) continue;
      const auto labels = e.at("clustering").at("labels").get<std::vector<int>>();
      if (labels.size() != vmap.size())
        throw Error(Errc::VertexMapMismatch, "label count differs from the vertex map");
      std::vector<int> full(n, kNoise);
      for (std::size_t i = 0; i < vmap.size(); ++i) full[vmap[i]] = labels[i];
      return {full, RootTarget::parse(t.at("target").get<std::string>()).q};
    }
  }
  throw Error(Errc::MissingSide, "run has no " + side + " embedding" +
                                     (target ? " for target " + *target : std::string()));
}

inline json cmd_metrics(const MetricsArgs& a) {
  const auto truth = read_json(a.truth).get<GroundTruth>();
  const auto run = read_json(a.run);
  auto [labels, k] = run_labels(run, truth.num_vertices(), a.target, a.side);
  const auto group = truth.find_group(k);
  if (!group) throw Error(Errc::MissingGroundTruth, "truth has no " + std::to_string(k) + "-cycle group");
  json out = recovery_metrics(truth.cycle_labels(*group), labels, k);
  out["k"] = k;
  out["side"] = a.side;
  const std::string text = out.dump(2) + "\n";
  if (a.out) write_text(*a.out, text);
  else std::cout << text;
  return out;
}

// ------------------------------------------------------------------ bounds

struct BoundsArgs {
  std::string graph;
  std::string truth;
  std::string target = "1/3";
  double tol = 1e-10;
  std::size_t dense_threshold = 4000;
  bool drop_self_loops = false;
  std::optional<std::string> out;
};

inline json cmd_bounds(const BoundsArgs& a) {
  if (a.truth.empty() || !fs::exists(a.truth))
    throw Error(Errc::MissingGroundTruth, "ground truth file not found: '" + a.truth + "'");
  const auto loops = a.drop_self_loops ? SelfLoopPolicy::Drop : SelfLoopPolicy::Reject;
  const Digraph g = io::read_graph_file(a.graph, loops);
  const auto truth_all = read_json(a.truth).get<GroundTruth>();
  if (truth_all.num_vertices() != g.num_vertices())
    throw Error(Errc::VertexMapMismatch, "truth and graph differ in vertex count");
  const auto scc = largest_scc(g);
  const auto truth = truth_all.restricted(scc.vertex_map);
  const RootTarget target = RootTarget::parse(a.target);
  SolverOptions opts;
  opts.tol = a.tol;
  opts.dense_threshold = a.dense_threshold;
  const TransitionMatrix b(scc.induced);
  const auto pair = nearest_eigenpair(b, target, Side::Both, opts);
  const auto e = embed(pair, Side::Right, target.q);
  const auto report = verify_bounds(scc.induced, truth, pair, e);
  json out = report;
  out["target"] = target.to_string();
  out["graph"] = a.graph;
  out["peak_vertex"] = scc.vertex_map[report.peak];
  json cyc = json::array();
  for (Vertex v : report.cyclic_vertices) cyc.push_back(scc.vertex_map[v]);
  out["inputs"]["cyclic_vertices"] = cyc;
  const std::string text = out.dump(2) + "\n";
  if (a.out) write_text(*a.out, text);
  else std::cout << text;
  return out;
}

// --------------------------------------------------------------------- svd

struct SvdArgs {
  std::string graph;
  long rank = 10;
  std::vector<long> dims{0, 1};
  std::string side = "left";
  std::size_t dense_threshold = 4000;
  bool drop_self_loops = false;
  std::string out = "svd";
};

inline json cmd_svd(const SvdArgs& a) {
  const auto loops = a.drop_self_loops ? SelfLoopPolicy::Drop : SelfLoopPolicy::Reject;
  const Digraph g = io::read_graph_file(a.graph, loops);
  if (a.rank < 1 || static_cast<std::size_t>(a.rank) > g.num_vertices())
    throw Error(Errc::InvalidArgument, "rank must lie in [1, " + std::to_string(g.num_vertices()) + "]");
  if (a.dims.size() != 2) throw Error(Errc::InvalidArgument, "dims takes two indices");
  const Side side = parse_side(a.side);
  const auto e = truncated_svd(scaled_adjacency(g), a.rank, a.dense_threshold);
  const auto pts = svd_planar_projection(e, a.dims[0], a.dims[1], side);

  std::ostringstream sv;
  sv << "index,value\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < e.rank(); ++i) sv << i << ',' << e.singular_values[i] << '\n';
  write_text(a.out + ".singular.csv", sv.str());
  std::ostringstream xy;
  xy << "vertex,x,y\n" << std::setprecision(17);
  for (std::size_t i = 0; i < pts.size(); ++i) xy << i << ',' << pts[i][0] << ',' << pts[i][1] << '\n';
  write_text(a.out + ".coords.csv", xy.str());

  std::vector<double> values(e.singular_values.data(), e.singular_values.data() + e.rank());
  json out{{"schema", "cyclescope.embedding.v1"},
           {"method", "svd"},
           {"solver", e.method},
           {"scaling", e.scaling},
           {"graph", a.graph},
           {"rank", a.rank},
           {"dims", a.dims},
           {"side", to_string(side)},
           {"singular_values", values},
           {"max_residual", e.max_residual},
           {"csv", fs::path(a.out + ".coords.csv").filename().string()}};
  write_text(a.out + ".svd.json", out.dump(2) + "\n");
  std::cout << "rank " << a.rank << " SVD (" << e.method << "): sigma_1 = " << values.front()
            << ", sigma_" << a.rank << " = " << values.back() << "\n";
  return out;
}

/// Maps exceptions to the documented exit codes.
template <class F>
int guarded(F&& body) {
  try {
    body();
    return kOk;
  } catch (const NoConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConvergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::NoConvergence ? kConvergence : kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "error: ParseError: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace cyclescope::cli
