#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <random>

#include <json.hpp>

#include "mesonet/detection.hpp"

namespace mesonet {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

const char* to_string(Method m) {
  switch (m) {
    case Method::modularity:
      return "modularity";
    case Method::bic_sbm:
      return "bic-sbm";
    case Method::bic_dcsbm:
      return "bic-dcsbm";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "modularity" || name == "q") return Method::modularity;
  if (name == "bic-sbm" || name == "bic_sbm" || name == "sbm") return Method::bic_sbm;
  if (name == "bic-dcsbm" || name == "bic_dcsbm" || name == "dcsbm") return Method::bic_dcsbm;
  throw Error("unknown method '" + name + "' (expected modularity, bic-sbm or bic-dcsbm)");
}

double DetectResult::objective() const {
  switch (method) {
    case Method::modularity:
      return final_scores.modularity;
    case Method::bic_sbm:
      return final_scores.bic_sbm.bic;
    case Method::bic_dcsbm:
      return final_scores.bic_dcsbm.bic;
  }
  return 0.0;
}

PartitionScores evaluate_partition(const Graph& g, const Partition& p, SampleSize n,
                                   const SolverOptions& solver) {
  if (p.node_count() != g.node_count()) throw Error("partition does not match graph");
  PartitionScores out;
  out.modularity =
      g.edge_count() > 0 ? modularity(g, p) : std::numeric_limits<double>::quiet_NaN();
  out.sbm_params = fit_sbm(block_stats(g, p));
  out.bic_sbm = bic_sbm(g, p, n);

  const auto ubcm = solve_ubcm(g.degrees(), solver);
  auto decoupled = solve_chi_decoupled(g, p, ubcm);
  auto joint = solve_dcsbm_joint(g, p, ubcm.nodes.x, solver);
  if (joint.converged) {
    out.dcsbm_refit_converged = true;
    out.bic_dcsbm = bic_dcsbm(g, p, joint, n);
    out.dcsbm_params = std::move(joint);
    return out;
  }
  const auto joint_score = bic_dcsbm(g, p, joint, n);
  const auto decoupled_score = bic_dcsbm(g, p, decoupled, n);
  if (joint_score.loglik >= decoupled_score.loglik) {
    out.bic_dcsbm = joint_score;
    out.dcsbm_params = std::move(joint);
  } else {
    out.bic_dcsbm = decoupled_score;
    out.dcsbm_params = std::move(decoupled);
  }
  return out;
}

namespace {

struct OuterRun {
  Partition best;
  std::vector<double> trace;
  int iterations = 0;
};

/// Leiden from singletons (or `start`), then from the best partition so far,
/// until a run reproduces its starting grouping or max_outer runs are spent.
/// `loss` is minimized.
OuterRun outer_loop(const Graph& g, const QualityFunction& q,
                    const std::function<double(const Partition&)>& loss,
                    const std::optional<Partition>& start, std::uint64_t seed, int max_outer) {
  OuterRun run;
  run.best = leiden(g, q, start, derive_seed(seed, 0));
  double best_loss = loss(run.best);
  run.trace.push_back(best_loss);
  for (int i = 1; i <= max_outer; ++i) {
    Partition next = leiden(g, q, run.best, derive_seed(seed, static_cast<std::uint64_t>(i)));
    run.iterations = i;
    if (next.same_grouping(run.best)) break;
    const double l = loss(next);
    if (l < best_loss) {
      best_loss = l;
      run.best = std::move(next);
    }
    run.trace.push_back(best_loss);
  }
  return run;
}

Partition random_partition(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Index k = std::uniform_int_distribution<Index>(1, n)(rng);
  std::uniform_int_distribution<Index> pick(0, k - 1);
  std::vector<Index> labels(n);
  for (auto& l : labels) l = pick(rng);
  return Partition::from_labels(labels);
}

void validate(const Graph& g, const DetectConfig& cfg) {
  if (cfg.max_outer < 0) throw Error("max_outer must be non-negative");
  if (cfg.restarts < 1) throw Error("restarts must be at least 1");
  if (cfg.initial == InitKind::provided) {
    if (!cfg.initial_partition) throw Error("initial partition requested but not given");
    if (cfg.initial_partition->node_count() != g.node_count())
      throw Error("initial partition does not match graph");
  }
  if (g.node_count() < 2) throw Error("community detection needs at least two nodes");
}

DetectResult run_once(const Graph& g, Method method, const DetectConfig& cfg, int restart,
                      const UbcmParams* ubcm) {
  DetectResult r;
  r.method = method;
  r.restart = restart;
  r.restart_seed = restart == 0
                       ? cfg.seed
                       : derive_seed(cfg.seed, 1000003ULL + static_cast<std::uint64_t>(restart));
  const InitKind init = restart == 0 ? cfg.initial : InitKind::random;

  std::optional<Partition> start;
  if (init == InitKind::provided) {
    start = cfg.initial_partition;
  } else if (init == InitKind::modularity && method != Method::modularity) {
    DetectConfig inner = cfg;
    inner.seed = r.restart_seed;
    inner.restarts = 1;
    inner.initial = InitKind::singletons;
    start = detect_modularity(g, inner).partition;
  } else if (init == InitKind::random) {
    start = random_partition(g.node_count(), derive_seed(r.restart_seed, 0x5eedULL));
  }

  std::optional<QualityFunction> q;
  std::function<double(const Partition&)> loss;
  switch (method) {
    case Method::modularity:
      q = QualityFunction::modularity(g);
      loss = [&g](const Partition& p) { return -modularity(g, p); };
      break;
    case Method::bic_sbm:
      q = QualityFunction::bic_sbm(g, cfg.bic_n);
      loss = [&g, &cfg](const Partition& p) { return bic_sbm(g, p, cfg.bic_n).bic; };
      break;
    case Method::bic_dcsbm:
      q = QualityFunction::bic_dcsbm(g, ubcm->nodes, cfg.bic_n);
      loss = [&g, &q](const Partition& p) { return -q->full(g, p); };
      r.ubcm_residual = ubcm->residual_norm;
      break;
  }

  auto outer = outer_loop(g, *q, loss, start, r.restart_seed, cfg.max_outer);
  r.partition = std::move(outer.best);
  r.outer_iterations = outer.iterations;
  r.score_trace = std::move(outer.trace);
  if (method == Method::modularity)
    for (double& v : r.score_trace) v = -v;
  r.final_scores = evaluate_partition(g, r.partition, cfg.bic_n, cfg.solver);
  return r;
}

bool better(const DetectResult& a, const DetectResult& b) {
  if (a.method == Method::modularity) return a.objective() > b.objective();
  return a.objective() < b.objective();
}

}  // namespace

DetectResult detect(const Graph& g, Method method, const DetectConfig& cfg) {
  validate(g, cfg);
  std::optional<UbcmParams> ubcm;
  if (method == Method::bic_dcsbm) {
    ubcm = solve_ubcm(g.degrees(), cfg.solver);
    if (!ubcm->converged) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "degree multipliers did not converge: residual %.3g after %d iterations",
                    ubcm->residual_norm, ubcm->iterations);
      throw Error(buf);
    }
  }
  const UbcmParams* up = ubcm ? &*ubcm : nullptr;
  if (cfg.restarts == 1) return run_once(g, method, cfg, 0, up);

  std::vector<DetectResult> results;
  if (cfg.parallel) {
    std::vector<std::future<DetectResult>> jobs;
    for (int i = 0; i < cfg.restarts; ++i)
      jobs.push_back(std::async(std::launch::async, run_once, std::cref(g), method, std::cref(cfg),
                                i, up));
    for (auto& j : jobs) results.push_back(j.get());
  } else {
    for (int i = 0; i < cfg.restarts; ++i) results.push_back(run_once(g, method, cfg, i, up));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (better(results[i], results[best])) best = i;
  return std::move(results[best]);
}

DetectResult detect_modularity(const Graph& g, const DetectConfig& cfg) {
  return detect(g, Method::modularity, cfg);
}

DetectResult detect_bic_sbm(const Graph& g, const DetectConfig& cfg) {
  return detect(g, Method::bic_sbm, cfg);
}

DetectResult detect_bic_dcsbm(const Graph& g, const DetectConfig& cfg) {
  return detect(g, Method::bic_dcsbm, cfg);
}

namespace {

nlohmann::json score_json(const BicScore& s) {
  return {{"loglik", s.loglik}, {"params", s.param_count}, {"n", s.sample_size}, {"bic", s.bic}};
}

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::singletons:
      return "singletons";
    case InitKind::provided:
      return "provided";
    case InitKind::modularity:
      return "modularity";
    case InitKind::random:
      return "random";
  }
  return "?";
}

}  // namespace

std::string run_manifest(const Graph& g, const DetectResult& r, const DetectConfig& cfg) {
  nlohmann::json j;
  j["method"] = to_string(r.method);
  j["seed"] = cfg.seed;
  j["restart"] = r.restart;
  j["restart_seed"] = r.restart_seed;
  j["config"] = {{"max_outer", cfg.max_outer},
                 {"restarts", cfg.restarts},
                 {"initial", to_string(cfg.initial)},
                 {"bic_n", to_string(cfg.bic_n)},
                 {"tol", cfg.solver.tol},
                 {"max_iter", cfg.solver.max_iter},
                 {"patience", cfg.solver.patience}};
  j["graph"] = {{"nodes", g.node_count()}, {"edges", g.edge_count()}};
  j["blocks"] = r.partition.block_count();
  j["outer_iterations"] = r.outer_iterations;
  j["score_trace"] = r.score_trace;
  const auto& f = r.final_scores;
  j["final"] = {{"modularity", f.modularity},
                {"bic_sbm", score_json(f.bic_sbm)},
                {"bic_dcsbm", score_json(f.bic_dcsbm)},
                {"dcsbm_refit_converged", f.dcsbm_refit_converged}};
  if (r.method == Method::bic_dcsbm) j["ubcm_residual"] = r.ubcm_residual;
  return j.dump(2);
}

}  // namespace mesonet
