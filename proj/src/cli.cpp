#include "mesonet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "mesonet/analysis.hpp"
#include "mesonet/detection.hpp"
#include "mesonet/patents.hpp"
#include "mesonet/synth.hpp"

namespace mesonet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  Index top_n = 500;
  std::string level = "inventors";
  std::string bic_n = "dyads";
  int max_outer = 50;
  double tol = 1e-8;
  std::string out_dir = ".";
};

struct GraphInput {
  std::string graph;
  std::string network;
};

void add_graph_input(CLI::App* cmd, GraphInput& in) {
  cmd->add_option("--graph", in.graph, "edge-list file");
  cmd->add_option("--network", in.network, "network metadata written by `build`");
}

Graph load_graph(const GraphInput& in) {
  if (!in.network.empty()) return read_network(in.network).graph;
  if (!in.graph.empty()) return read_edge_list(in.graph);
  throw Error("give --graph or --network");
}

Network load_network(const GraphInput& in) {
  if (in.network.empty()) throw Error("this command needs --network");
  return read_network(in.network);
}

SampleSize parse_bic_n(const std::string& s) {
  if (s == "dyads") return SampleSize::dyads;
  if (s == "nodes") return SampleSize::nodes;
  throw Error("--bic-n must be dyads or nodes");
}

fs::path out_path(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

json score_json(const BicScore& s) {
  return {{"loglik", s.loglik}, {"params", s.param_count}, {"n", s.sample_size}, {"bic", s.bic}};
}

void print_scores(std::ostream& out, const PartitionScores& s, Index blocks) {
  out << "blocks " << blocks << '\n'
      << "modularity " << format_number(s.modularity) << '\n'
      << "bic_sbm " << format_number(s.bic_sbm.bic) << '\n'
      << "bic_dcsbm " << format_number(s.bic_dcsbm.bic) << '\n';
  if (!s.dcsbm_refit_converged) out << "warning: joint dcSBM refit did not converge\n";
}

int cmd_build(const GlobalOptions& g, const std::string& corpus_path, const std::string& from,
              const std::string& to, const std::vector<std::string>& prefixes, std::ostream& out,
              std::ostream& err) {
  const Corpus corpus = load_patents(corpus_path);
  for (const auto& issue : corpus.issues)
    err << corpus_path << ":" << issue.line << ": " << issue.message << '\n';
  if (corpus.records.empty()) err << "warning: corpus " << corpus_path << " holds no valid records\n";
  NetworkSpec spec;
  spec.level = parse_level(g.level);
  spec.top_n = g.top_n;
  if (!from.empty()) spec.from = Date::parse(from);
  if (!to.empty()) spec.to = Date::parse(to);
  spec.ipc_prefixes = prefixes;
  const Network net = build_network(corpus, spec);
  write_edge_list(net.graph, out_path(g, "edges.txt").string());
  write_network(net, out_path(g, "network.json").string());
  out << "records " << corpus.records.size() << '\n'
      << "rejected " << corpus.issues.size() << '\n'
      << "nodes " << net.graph.node_count() << '\n'
      << "edges " << net.graph.edge_count() << '\n';
  return 0;
}

int cmd_metrics(const GlobalOptions& g, const GraphInput& in, std::ostream& out) {
  const Graph graph = load_graph(in);
  const MacroReport r = macro_report(graph);
  {
    std::ofstream f(out_path(g, "metrics.csv"));
    if (!f) throw Error("cannot write metrics.csv");
    f << "metric,value\n"
      << "nodes," << r.node_count << '\n'
      << "edges," << r.edge_count << '\n'
      << "density," << format_number(r.density) << '\n'
      << "mean_degree," << format_number(r.mean_degree) << '\n'
      << "degree_std," << format_number(r.degree_std) << '\n'
      << "cv," << format_number(r.cv) << '\n'
      << "nakamoto," << r.nakamoto << '\n'
      << "mean_clustering," << format_number(r.mean_clustering) << '\n'
      << "isolated," << r.isolated << '\n';
  }
  {
    std::ofstream f(out_path(g, "degree_ccdf.csv"));
    f << "k,fraction\n";
    for (const auto& [k, frac] : r.degree_ccdf) f << k << ',' << format_number(frac) << '\n';
  }
  {
    std::ofstream f(out_path(g, "clustering.csv"));
    f << "node,degree,clustering\n";
    for (Index i = 0; i < graph.node_count(); ++i)
      f << graph.label(i) << ',' << graph.degree(i) << ','
        << format_number(r.clustering_values[i]) << '\n';
  }
  out << "nodes " << r.node_count << '\n'
      << "edges " << r.edge_count << '\n'
      << "density " << format_number(r.density) << '\n'
      << "mean_degree " << format_number(r.mean_degree) << '\n'
      << "degree_std " << format_number(r.degree_std) << '\n'
      << "cv " << format_number(r.cv) << '\n'
      << "nakamoto " << r.nakamoto << '\n'
      << "mean_clustering " << format_number(r.mean_clustering) << '\n';
  return 0;
}

int cmd_detect(const GlobalOptions& g, const GraphInput& in, const std::string& method_name,
               int restarts, const std::string& init, const std::string& initial_path,
               std::ostream& out) {
  const Graph graph = load_graph(in);
  DetectConfig cfg;
  cfg.seed = g.seed;
  cfg.max_outer = g.max_outer;
  cfg.restarts = restarts;
  cfg.bic_n = parse_bic_n(g.bic_n);
  cfg.solver.tol = g.tol;
  if (init == "singletons") {
    cfg.initial = InitKind::singletons;
  } else if (init == "modularity") {
    cfg.initial = InitKind::modularity;
  } else if (init == "random") {
    cfg.initial = InitKind::random;
  } else if (init == "provided") {
    if (initial_path.empty()) throw Error("--init provided needs --initial");
    cfg.initial = InitKind::provided;
    cfg.initial_partition = read_partition(graph, initial_path);
  } else {
    throw Error("--init must be singletons, modularity, random or provided");
  }
  const Method method = parse_method(method_name);
  const DetectResult r = detect(graph, method, cfg);
  const std::string stem = to_string(method);
  const auto part_path = out_path(g, stem + "_partition.csv");
  write_partition(graph, r.partition, part_path.string());
  {
    std::ofstream f(out_path(g, stem + "_manifest.json"));
    if (!f) throw Error("cannot write manifest");
    f << run_manifest(graph, r, cfg) << '\n';
  }
  out << "method " << stem << '\n';
  print_scores(out, r.final_scores, r.partition.block_count());
  out << "partition " << part_path.string() << '\n';
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const GraphInput& in, const std::string& partition_path,
                 std::ostream& out) {
  const Graph graph = load_graph(in);
  const Partition p = read_partition(graph, partition_path);
  SolverOptions solver;
  solver.tol = g.tol;
  const auto s = evaluate_partition(graph, p, parse_bic_n(g.bic_n), solver);
  const auto clusters = cluster_report(graph, p);
  json j;
  j["partition"] = partition_path;
  j["blocks"] = p.block_count();
  j["modularity"] = s.modularity;
  j["bic_sbm"] = score_json(s.bic_sbm);
  j["bic_dcsbm"] = score_json(s.bic_dcsbm);
  j["dcsbm_refit_converged"] = s.dcsbm_refit_converged;
  j["sbm_fit"] = json::parse(fit_record(s.bic_sbm, s.sbm_params));
  j["dcsbm_fit"] = json::parse(fit_record(s.bic_dcsbm, s.dcsbm_params));
  j["mean_within_degree"] = clusters.mean_within;
  j["std_within_degree"] = clusters.std_within;
  j["ic_ec"] = std::isinf(clusters.ic_ec) ? json("inf") : json(clusters.ic_ec);
  {
    std::ofstream f(out_path(g, "evaluation.json"));
    if (!f) throw Error("cannot write evaluation.json");
    f << j.dump(2) << '\n';
  }
  write_cluster_csv(clusters, out_path(g, "clusters.csv").string());
  print_scores(out, s, p.block_count());
  out << "mean_within_degree " << format_number(clusters.mean_within) << '\n'
      << "std_within_degree " << format_number(clusters.std_within) << '\n'
      << "ic_ec " << format_number(clusters.ic_ec) << '\n';
  return 0;
}

int cmd_compare(const GlobalOptions& g, const GraphInput& in,
                const std::vector<std::string>& paths, std::ostream& out) {
  if (paths.size() < 2) throw Error("compare needs at least two --partition files");
  const Graph graph = load_graph(in);
  std::vector<std::string> names;
  std::vector<Partition> parts;
  for (const auto& path : paths) {
    names.push_back(fs::path(path).stem().string());
    parts.push_back(read_partition(graph, path));
  }
  write_similarity_csv(names, parts, out_path(g, "similarity.csv").string());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      const auto s = similarity(parts[i], parts[j]);
      out << names[i] << " vs " << names[j] << ": rand " << format_number(s.rand) << " jaccard "
          << format_number(s.jaccard) << " nmi " << format_number(s.nmi) << '\n';
    }
  }
  return 0;
}

int cmd_inequality(const GlobalOptions& g, const GraphInput& in, const std::string& partition_path,
                   std::ostream& out) {
  const Network net = load_network(in);
  const Partition p = read_partition(net.graph, partition_path);
  const auto totals = cluster_citations(net, p);
  const auto curve = lorenz_gini(totals);
  write_lorenz_csv(curve, out_path(g, "lorenz.csv").string());
  out << "clusters " << totals.size() << '\n' << "gini " << format_number(curve.gini) << '\n';
  return 0;
}

int cmd_diversity(const GlobalOptions& g, const GraphInput& in, const std::string& partition_path,
                  std::ostream& out, std::ostream& err) {
  const Network net = load_network(in);
  const Partition p = read_partition(net.graph, partition_path);
  const auto r = diversity_report(net, p);
  write_diversity_csv(r, out_path(g, "diversity.csv").string());
  Count counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t c = 0; c < r.clusters.size(); ++c) {
    const auto& d = r.clusters[c];
    if (!d.defined) {
      err << "warning: cluster " << c << " has no patents; diversity undefined\n";
      continue;
    }
    ++counts[d.multi_company][d.generalist];
  }
  out << "median_entropy " << format_number(r.median_entropy) << '\n'
      << "single_specialized " << counts[0][0] << '\n'
      << "single_generalist " << counts[0][1] << '\n'
      << "multi_specialized " << counts[1][0] << '\n'
      << "multi_generalist " << counts[1][1] << '\n';
  return 0;
}

struct SynthOptions {
  std::string model = "sbm";
  Index blocks = 2;
  Index size = 50;
  double p_in = 0.3;
  double p_out = 0.02;
  double x_min = 0.3;
  double x_max = 3.0;
};

int cmd_synth(const GlobalOptions& g, const SynthOptions& o, std::ostream& out) {
  if (o.blocks < 1 || o.size < 1) throw Error("--blocks and --size must be positive");
  PlantedModel m = planted_partition(o.blocks, o.size, o.p_in, o.p_out, g.seed);
  PlantedGraph pg;
  if (o.model == "sbm") {
    pg = sample_sbm(m);
  } else if (o.model == "dcsbm") {
    if (!(o.x_min > 0.0) || !(o.x_max >= o.x_min)) throw Error("need 0 < --x-min <= --x-max");
    std::mt19937_64 rng(derive_seed(g.seed, 7));
    std::uniform_real_distribution<double> u(std::log(o.x_min), std::log(o.x_max));
    m.multipliers.resize(m.node_count());
    for (Index i = 0; i < m.node_count(); ++i) m.multipliers[i] = std::exp(u(rng));
    pg = sample_dcsbm(m);
  } else {
    throw Error("--model must be sbm or dcsbm");
  }
  write_edge_list(pg.graph, out_path(g, "edges.txt").string());
  write_partition(pg.graph, pg.planted, out_path(g, "planted.csv").string());
  out << "nodes " << pg.graph.node_count() << '\n' << "edges " << pg.graph.edge_count() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mesoscale structure of collaboration networks", "mesonet"};
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--top-n", g.top_n, "actors kept by `build`")->check(CLI::Range(Index{2}, Index{1} << 40));
  app.add_option("--level", g.level, "inventors or organizations")
      ->check(CLI::IsMember({"inventors", "organizations"}));
  app.add_option("--bic-n", g.bic_n, "BIC sample size: dyads or nodes")
      ->check(CLI::IsMember({"dyads", "nodes"}));
  app.add_option("--max-outer", g.max_outer, "outer iterations of the detectors")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tol", g.tol, "solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "directory for output files");

  std::string corpus, from, to;
  std::vector<std::string> prefixes;
  auto* build = app.add_subcommand("build", "patent corpus -> collaboration network");
  build->add_option("--corpus", corpus, "JSON Lines patent file")->required();
  build->add_option("--from", from, "first date (YYYY-MM-DD)");
  build->add_option("--to", to, "last date (YYYY-MM-DD)");
  build->add_option("--ipc-prefix", prefixes, "keep patents with an IPC code starting with this");

  GraphInput in;
  auto* metrics = app.add_subcommand("metrics", "macroscale metrics");
  add_graph_input(metrics, in);

  std::string method = "modularity", init = "singletons", initial;
  int restarts = 1;
  auto* det = app.add_subcommand("detect", "community detection");
  add_graph_input(det, in);
  det->add_option("--method", method, "modularity, bic-sbm or bic-dcsbm")
      ->check(CLI::IsMember({"modularity", "bic-sbm", "bic-dcsbm"}));
  det->add_option("--restarts", restarts, "independent seeded runs")->check(CLI::PositiveNumber);
  det->add_option("--init", init, "singletons, modularity, random or provided");
  det->add_option("--initial", initial, "initial partition CSV for --init provided");

  std::string partition;
  auto* eval = app.add_subcommand("evaluate", "scores of a fixed partition");
  add_graph_input(eval, in);
  eval->add_option("--partition", partition, "partition CSV")->required();

  std::vector<std::string> partitions;
  auto* cmp = app.add_subcommand("compare", "similarity of partitions");
  add_graph_input(cmp, in);
  cmp->add_option("--partition", partitions, "partition CSV (two or more)")->required();

  auto* ineq = app.add_subcommand("inequality", "Lorenz curve and Gini of cluster citations");
  add_graph_input(ineq, in);
  ineq->add_option("--partition", partition, "partition CSV")->required();

  auto* div = app.add_subcommand("diversity", "owner counts and IPC entropy per cluster");
  add_graph_input(div, in);
  div->add_option("--partition", partition, "partition CSV")->required();

  SynthOptions so;
  auto* syn = app.add_subcommand("synth", "sample a planted-partition graph");
  syn->add_option("--model", so.model, "sbm or dcsbm")->check(CLI::IsMember({"sbm", "dcsbm"}));
  syn->add_option("--blocks", so.blocks, "number of blocks");
  syn->add_option("--size", so.size, "nodes per block");
  syn->add_option("--p-in", so.p_in, "within-block probability (affinity for dcsbm)");
  syn->add_option("--p-out", so.p_out, "between-block probability (affinity for dcsbm)");
  syn->add_option("--x-min", so.x_min, "smallest node multiplier (dcsbm)");
  syn->add_option("--x-max", so.x_max, "largest node multiplier (dcsbm)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*build) return cmd_build(g, corpus, from, to, prefixes, out, err);
    if (*metrics) return cmd_metrics(g, in, out);
    if (*det) return cmd_detect(g, in, method, restarts, init, initial, out);
    if (*eval) return cmd_evaluate(g, in, partition, out);
    if (*cmp) return cmd_compare(g, in, partitions, out);
    if (*ineq) return cmd_inequality(g, in, partition, out);
    if (*div) return cmd_diversity(g, in, partition, out, err);
    if (*syn) return cmd_synth(g, so, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mesonet
