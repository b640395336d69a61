#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mesonet/graph.hpp"
#include "mesonet/null_models.hpp"
#include "mesonet/partition.hpp"

namespace mesonet {

/// Q = (1/2L) sum_ij (a_ij - k_i k_j / 2L) delta(g_i, g_j). Throws when L = 0.
double modularity(const Graph& g, const Partition& p);

enum class QualityKind { modularity, bic_sbm, bic_dcsbm };

/// Objective maximized by the Leiden engine: Q for modularity, -BIC for the
/// block models.
///
/// `delta` is exact for modularity and BIC-SBM. For BIC-dcSBM the per-move
/// delta comes from a plug-in surrogate (chi_rs = L_rs / T_rs with
/// T_rs = sum_{i in r, j in s} x_i x_j, in the sparse limit of the Bernoulli
/// likelihood), while `full` is always the exact score.
class QualityFunction {
 public:
  static QualityFunction modularity(const Graph& g);
  static QualityFunction bic_sbm(const Graph& g, SampleSize n = SampleSize::dyads);
  static QualityFunction bic_dcsbm(const Graph& g, const NodeMultipliers& fixed,
                                   SampleSize n = SampleSize::dyads);

  QualityKind kind() const { return kind_; }
  SampleSize sample_size_convention() const { return convention_; }

  /// Exact quality of a partition of the original graph.
  double full(const Graph& g, const Partition& p) const;

  /// Block-level value whose differences `delta` reproduces (equals `full`
  /// up to a partition-independent constant for the dcSBM surrogate, and
  /// exactly for the other kinds).
  double value(const BlockStats& s) const;

  /// Change of `value` when node v moves to block `to` (which may be empty).
  double delta(const BlockStats& s, Index v, Index to) const;

  /// Smallest delta counted as an improvement.
  double min_gain() const { return kind_ == QualityKind::modularity ? 1e-12 : 1e-9; }

  /// Per-node multipliers carried into the weighted graph, if any.
  const Eigen::VectorXd* surrogate_multipliers() const {
    return kind_ == QualityKind::bic_dcsbm ? &surrogate_x_ : nullptr;
  }
  const NodeMultipliers& fixed_multipliers() const { return fixed_; }

 private:
  double bic_dcsbm_score(const Graph& g, const Partition& p) const;
  double pair_term(double edges, double measure) const;
  double measure(double a_r, double b_r, double a_s, double b_s, bool same) const;
  double block_a(const BlockStats& s, Index r) const;
  double block_b(const BlockStats& s, Index r) const;
  double penalty(Index blocks) const;

  QualityKind kind_ = QualityKind::modularity;
  SampleSize convention_ = SampleSize::dyads;
  double total_edges_ = 0.0;
  Index node_count_ = 0;
  double log_n_ = 0.0;
  NodeMultipliers fixed_;
  Eigen::VectorXd surrogate_x_;
};

struct LeidenStats {
  int levels = 0;
  Count moves = 0;
};

/// Leiden exploration: queue-driven local moves (candidates are the blocks
/// of the node's neighbors plus one empty block), refinement of each
/// community into connected sub-communities, aggregation, repeat.
/// Without an initial partition every node starts alone.
Partition leiden(const Graph& g, const QualityFunction& quality,
                 const std::optional<Partition>& initial, std::uint64_t seed,
                 LeidenStats* stats = nullptr);

// Exposed for testing the individual phases.
namespace leiden_detail {
/// Local moving on `state`; returns whether any node moved.
bool move_nodes(BlockStats& state, const QualityFunction& q, std::uint64_t seed);
/// Refinement of `partition` on the weighted graph; every refined community
/// lies inside one community and induces a connected subgraph.
Partition refine(std::shared_ptr<const WeightedGraph> wg, const Partition& partition,
                 const QualityFunction& q, std::uint64_t seed);
}  // namespace leiden_detail

enum class Method { modularity, bic_sbm, bic_dcsbm };
/// Starting partition of the first Leiden run. `random` draws k uniformly
/// from 1..N and then every label uniformly from 0..k-1, from the run's seed.
enum class InitKind { singletons, provided, modularity, random };

/// Restart 0 runs from `initial` with `seed` itself, so it reproduces the
/// single-run result; restarts 1.. start from random labels with derived
/// seeds. The best objective wins, ties going to the lowest restart.
struct DetectConfig {
  std::uint64_t seed = 0;
  int max_outer = 50;
  int restarts = 1;
  bool parallel = true;
  InitKind initial = InitKind::singletons;
  std::optional<Partition> initial_partition;
  SampleSize bic_n = SampleSize::dyads;
  SolverOptions solver;
};

/// Q, BIC-SBM and BIC-dcSBM of one fixed partition.
struct PartitionScores {
  double modularity = 0.0;  // NaN without edges
  BicScore bic_sbm;
  BicScore bic_dcsbm;
  SbmParams sbm_params;
  DcSbmParams dcsbm_params;
  bool dcsbm_refit_converged = false;
};

struct DetectResult {
  Method method = Method::modularity;
  Partition partition;
  std::vector<double> score_trace;  // tracked objective after each outer iteration
  int outer_iterations = 0;
  int restart = 0;
  std::uint64_t restart_seed = 0;
  PartitionScores final_scores;
  double ubcm_residual = 0.0;

  /// Tracked objective: Q for modularity, the reported BIC otherwise.
  double objective() const;
};

DetectResult detect_modularity(const Graph& g, const DetectConfig& cfg);
DetectResult detect_bic_sbm(const Graph& g, const DetectConfig& cfg);
DetectResult detect_bic_dcsbm(const Graph& g, const DetectConfig& cfg);
DetectResult detect(const Graph& g, Method method, const DetectConfig& cfg);

/// dcSBM scored with a fresh decoupled solve followed by the joint refit.
PartitionScores evaluate_partition(const Graph& g, const Partition& p,
                                   SampleSize n = SampleSize::dyads,
                                   const SolverOptions& solver = {});

/// Seed of run `index` derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

const char* to_string(Method m);
Method parse_method(const std::string& name);

/// JSON record: seed, configuration, final scores, trace.
std::string run_manifest(const Graph& g, const DetectResult& r, const DetectConfig& cfg);

}  // namespace mesonet
