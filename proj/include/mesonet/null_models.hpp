#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mesonet/graph.hpp"
#include "mesonet/partition.hpp"

namespace mesonet {

enum class Model { sbm, dcsbm };

/// What BIC counts as the number of observations.
enum class SampleSize {
  dyads,  // N(N-1)/2
  nodes,  // N
};

double sample_size(Index node_count, SampleSize convention);

struct BicScore {
  double loglik = 0.0;
  Count param_count = 0;
  double sample_size = 0.0;
  double bic = 0.0;
  Model model = Model::sbm;
};

/// BIC = kappa ln n - 2 loglik.
BicScore make_bic_score(Model model, double loglik, Count param_count, double n);

Count sbm_param_count(Index block_count);
Count dcsbm_param_count(Index block_count, Index node_count);

// ---------------------------------------------------------------------------
// Stochastic block model

struct SbmParams {
  Eigen::MatrixXd probabilities;  // symmetric k x k
};

/// Closed-form maximum-likelihood block probabilities. Block ids of `s` must
/// be dense. Size-1 blocks get p_rr = 0.
SbmParams fit_sbm(const BlockStats& s);

/// Bernoulli log-likelihood over all dyads, with 0 ln 0 = 0.
double loglik_sbm(const BlockStats& s, const SbmParams& params);

/// Profile log-likelihood of one block pair holding `edges` links over
/// `dyads` node pairs, at the fitted p = edges / dyads.
double block_pair_loglik(double edges, double dyads);

BicScore bic_sbm(const Graph& g, const Partition& p, SampleSize n = SampleSize::dyads);

// ---------------------------------------------------------------------------
// Maximum-entropy multipliers

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 1000;
  int patience = 5;
};

/// Per-node multipliers x_i in [0, inf]. Nodes whose degree forces every
/// dyad to 0 or 1 are pinned: pin_rank gives the order in which they were
/// peeled off, and the earlier-peeled endpoint decides a dyad.
struct NodeMultipliers {
  Eigen::VectorXd x;
  std::vector<int> pin_rank;  // -1 for free nodes

  Index size() const { return x.size(); }
  bool pinned(Index i) const { return pin_rank[i] >= 0; }
  /// Connection probability of i and j under block affinity chi.
  double probability(Index i, Index j, double chi = 1.0) const;
  /// ln P(a_ij) for the observed entry, 0 for forced dyads that agree.
  double log_prob(Index i, Index j, double chi, bool linked) const;
};

struct UbcmParams {
  NodeMultipliers nodes;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Solves k_i = sum_{j != i} x_i x_j / (1 + x_i x_j). Zero-degree nodes are
/// pinned at x = 0; nodes linked to every remaining node at x = inf.
UbcmParams solve_ubcm(const Eigen::VectorXi& degrees, const SolverOptions& opts = {});

/// Expected degrees under the given multipliers.
Eigen::VectorXd ubcm_expected_degrees(const NodeMultipliers& nodes);

/// ln P(A) under the UBCM (every chi equal to one).
double loglik_ubcm(const Graph& g, const NodeMultipliers& nodes);

// ---------------------------------------------------------------------------
// Degree-corrected stochastic block model

enum class DcMode { decoupled, joint };

struct DcSbmParams {
  NodeMultipliers nodes;
  Eigen::MatrixXd chi;  // symmetric k x k; 0 and inf mark empty and saturated pairs
  DcMode mode = DcMode::decoupled;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Node multipliers fixed at the UBCM solution; each block affinity solved
/// separately from L_rs = sum over the pair's dyads of p_ij.
DcSbmParams solve_chi_decoupled(const Graph& g, const Partition& p, const UbcmParams& ubcm);
DcSbmParams solve_chi_decoupled(const Graph& g, const Partition& p, const NodeMultipliers& nodes);

/// Joint solution of the degree and block-count equations, started from
/// the multipliers x0.
DcSbmParams solve_dcsbm_joint(const Graph& g, const Partition& p, const Eigen::VectorXd& x0,
                              const SolverOptions& opts = {});

/// sum_{i<j} [a_ij ln p_ij + (1 - a_ij) ln(1 - p_ij)].
double loglik_dcsbm(const Graph& g, const Partition& p, const DcSbmParams& params);

BicScore bic_dcsbm(const Graph& g, const Partition& p, const DcSbmParams& params,
                   SampleSize n = SampleSize::dyads);

/// Expected degrees and expected block-pair edge counts under `params`.
struct DcSbmResiduals {
  Eigen::VectorXd degree;  // expected - observed per node
  Eigen::MatrixXd block;   // expected - observed per block pair (symmetric)
  double norm() const;
};
DcSbmResiduals dcsbm_residuals(const Graph& g, const Partition& p, const DcSbmParams& params);

// ---------------------------------------------------------------------------
// Structured fit records (JSON text)

std::string fit_record(const BicScore& score, const SbmParams& params);
std::string fit_record(const BicScore& score, const DcSbmParams& params);

const char* to_string(Model m);
const char* to_string(SampleSize n);

}  // namespace mesonet
