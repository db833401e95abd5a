// cyclescope: cyclic structure in directed graphs from eigenvalues near
// roots of unity.

#include <CLI11.hpp>

#include "commands.hpp"

using namespace cyclescope;
using namespace cyclescope::cli;

int main(int argc, char** argv) {
  CLI::App app{"Find k-cyclic structure in directed graphs via eigenvectors of the random-walk matrix"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a block-model graph and its ground truth");
  generate->add_option("spec", gen.spec,
                       "pure3cyclic[:size[:rho]], hidden3cyclic:QEXT, mixedcycles[:rho_in[:rho_out]] or a JSON file")
      ->required();
  generate->add_option("out", gen.out, "Output prefix, or a directory")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Sampler seed")->capture_default_str();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Nearest eigenpair, embedding and clusters per target");
  analyze->add_option("graph", an.graph, "TSV edge list or Matrix Market file")->required();
  analyze->add_option("--target", an.targets, "Root of unity p/q (repeatable)")->capture_default_str();
  analyze->add_option("--side", an.side, "left, right or both")
      ->check(CLI::IsMember({"left", "right", "both"}))
      ->capture_default_str();
  analyze->add_option("--tol", an.tol, "Residual tolerance")->capture_default_str();
  analyze->add_option("--dense-threshold", an.dense_threshold, "Largest n solved densely")->capture_default_str();
  analyze->add_option("--cluster", an.cluster, "sector or dbscan")
      ->check(CLI::IsMember({"sector", "dbscan"}))
      ->capture_default_str();
  analyze->add_option("--eps", an.eps, "dbscan radius (implies --cluster dbscan)");
  analyze->add_option("--min-pts", an.min_pts, "dbscan core size")->capture_default_str();
  analyze->add_option("--mag-threshold", an.mag_threshold, "Sector noise cut, relative to the peak magnitude")
      ->capture_default_str();
  analyze->add_option("--seed", an.seed, "Recorded in the run for provenance");
  analyze->add_flag("--drop-self-loops", an.drop_self_loops, "Drop self-loops instead of rejecting");
  analyze->add_option("--out", an.out, "Output prefix")->capture_default_str();

  MetricsArgs me;
  auto* metrics = app.add_subcommand("metrics", "Score a run against ground truth");
  metrics->add_option("truth", me.truth, "Truth JSON")->required();
  metrics->add_option("run", me.run, "Run JSON from analyze")->required();
  metrics->add_option("--target", me.target, "Target p/q (default: first in the run)");
  metrics->add_option("--side", me.side, "left or right")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  metrics->add_option("--out", me.out, "Write JSON here instead of stdout");

  BoundsArgs bo;
  auto* bounds = app.add_subcommand("bounds", "Compare the closed-form bounds with the observed spectrum");
  bounds->add_option("graph", bo.graph, "Graph file")->required();
  bounds->add_option("truth", bo.truth, "Truth JSON");
  bounds->add_option("--target", bo.target, "Root of unity p/q")->capture_default_str();
  bounds->add_option("--tol", bo.tol, "Residual tolerance")->capture_default_str();
  bounds->add_option("--dense-threshold", bo.dense_threshold, "Largest n solved densely")->capture_default_str();
  bounds->add_flag("--drop-self-loops", bo.drop_self_loops, "Drop self-loops instead of rejecting");
  bounds->add_option("--out", bo.out, "Write JSON here instead of stdout");

  SvdArgs sv;
  auto* svd = app.add_subcommand("svd", "Scaled-adjacency SVD baseline embedding");
  svd->add_option("graph", sv.graph, "Graph file")->required();
  svd->add_option("--rank,-s", sv.rank, "Number of singular triplets")->capture_default_str();
  svd->add_option("--dims", sv.dims, "Two 0-based singular indices to project on")
      ->expected(2)
      ->delimiter(',')
      ->capture_default_str();
  svd->add_option("--side", sv.side, "left or right")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  svd->add_option("--dense-threshold", sv.dense_threshold, "Largest n solved densely")->capture_default_str();
  svd->add_flag("--drop-self-loops", sv.drop_self_loops, "Drop self-loops instead of rejecting");
  svd->add_option("--out", sv.out, "Output prefix")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*generate) return guarded([&] { cmd_generate(gen); });
  if (*analyze) {
    if (an.eps) an.cluster = "dbscan";
    return guarded([&] { cmd_analyze(an); });
  }
  if (*metrics) return guarded([&] { cmd_metrics(me); });
  if (*bounds) return guarded([&] { cmd_bounds(bo); });
  if (*svd) return guarded([&] { cmd_svd(sv); });
  return kInputError;
}
