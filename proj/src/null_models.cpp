#include "mesonet/null_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Cholesky>
#include <json.hpp>

namespace mesonet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln(1 + e^s)
double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Degree peeling: nodes linked to every remaining node, or to none, are fixed
// at x = inf or x = 0 and removed; repeat until no such node remains.

struct Peeling {
  std::vector<int> rank;
  Eigen::VectorXd x;             // 0 or inf for pinned nodes, NaN otherwise
  std::vector<Count> residual;   // degree towards free nodes
  Count full_count = 0;
};

Peeling peel_degrees(const Eigen::VectorXi& k) {
  const Index n = k.size();
  Peeling out;
  out.rank.assign(n, -1);
  out.x = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.residual.assign(n, 0);
  for (Index i = 0; i < n; ++i)
    if (k[i] < 0 || k[i] > n - 1) throw Error("degree sequence is not realizable");
  int round = 0;
  while (true) {
    Index active = 0;
    for (Index i = 0; i < n; ++i) active += out.rank[i] < 0;
    if (active == 0) break;
    std::vector<Index> full, empty;
    for (Index i = 0; i < n; ++i) {
      if (out.rank[i] >= 0) continue;
      const Count r = k[i] - out.full_count;
      if (r < 0 || r > active - 1) throw Error("degree sequence is not realizable");
      if (r == active - 1 && active > 1) full.push_back(i);
      if (r == 0) empty.push_back(i);
    }
    if (!full.empty()) {
      for (Index i : full) {
        out.rank[i] = round;
        out.x[i] = kInf;
      }
      out.full_count += static_cast<Count>(full.size());
    } else if (!empty.empty()) {
      for (Index i : empty) {
        out.rank[i] = round;
        out.x[i] = 0.0;
      }
    } else {
      break;
    }
    ++round;
  }
  for (Index i = 0; i < n; ++i)
    if (out.rank[i] < 0) out.residual[i] = k[i] - out.full_count;
  return out;
}

// ---------------------------------------------------------------------------
// Logistic maximum-entropy systems.
//
// Dyads are grouped; every dyad in a group shares the natural parameter
// s = a . phi, with at most three non-zero coefficients. The negative
// log-likelihood  Phi(phi) = sum_g c_g softplus(a_g . phi) - t . phi  is convex
// and its gradient is the residual of the moment equations.

struct DyadGroup {
  double count = 0.0;
  std::array<Index, 3> idx{};
  std::array<double, 3> coef{};
  int nnz = 0;

  double natural(const Eigen::VectorXd& phi) const {
    double s = 0.0;
    for (int a = 0; a < nnz; ++a) s += coef[a] * phi[idx[a]];
    return s;
  }
};

struct LogisticSystem {
  Eigen::VectorXd target;
  Eigen::VectorXd weight;  // residual of parameter j is gradient_j / weight_j
  std::vector<DyadGroup> groups;

  Index size() const { return target.size(); }

  void add(double count, std::initializer_list<std::pair<Index, double>> terms) {
    if (count <= 0.0) return;
    DyadGroup g;
    g.count = count;
    for (const auto& [i, c] : terms) {
      bool merged = false;
      for (int a = 0; a < g.nnz; ++a)
        if (g.idx[a] == i) {
          g.coef[a] += c;
          merged = true;
        }
      if (!merged) {
        g.idx[g.nnz] = i;
        g.coef[g.nnz] = c;
        ++g.nnz;
      }
    }
    groups.push_back(g);
  }

  double objective(const Eigen::VectorXd& phi) const {
    double f = -target.dot(phi);
    for (const auto& g : groups) f += g.count * softplus(g.natural(phi));
    return f;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd grad = -target;
    for (const auto& g : groups) {
      const double p = g.count * sigmoid(g.natural(phi));
      for (int a = 0; a < g.nnz; ++a) grad[g.idx[a]] += g.coef[a] * p;
    }
    return grad;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& phi) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(size(), size());
    for (const auto& g : groups) {
      const double p = sigmoid(g.natural(phi));
      const double v = g.count * p * (1.0 - p);
      for (int a = 0; a < g.nnz; ++a)
        for (int b = 0; b < g.nnz; ++b) h(g.idx[a], g.idx[b]) += v * g.coef[a] * g.coef[b];
    }
    return h;
  }

  double residual_norm(const Eigen::VectorXd& grad) const {
    return std::sqrt((grad.array().square() / weight.array()).sum());
  }
};

struct SolveOutcome {
  Eigen::VectorXd phi;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Damped Newton on Phi with Armijo backtracking. The best iterate by residual
// norm is kept; the search stops once the residual drops below tol or after
// `patience` consecutive iterations without a new best.
SolveOutcome solve_logistic(const LogisticSystem& sys, Eigen::VectorXd phi,
                            const SolverOptions& opts) {
  SolveOutcome best;
  best.phi = phi;
  if (sys.size() == 0) {
    best.converged = true;
    return best;
  }
  Eigen::VectorXd grad = sys.gradient(phi);
  double f = sys.objective(phi);
  best.residual = sys.residual_norm(grad);
  if (best.residual <= opts.tol) {
    best.converged = true;
    return best;
  }
  int patience = opts.patience;
  double damping = 1e-12;
  for (int it = 1; it <= opts.max_iter; ++it) {
    best.iterations = it;
    Eigen::MatrixXd h = sys.hessian(phi);
    const double scale = std::max(h.diagonal().maxCoeff(), 1e-300);
    h.diagonal().array() += damping * scale;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step = -ldlt.solve(grad);
    double slope = grad.dot(step);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || slope >= 0.0) {
      step = -grad;
      slope = grad.dot(step);
    }
    const double current = sys.residual_norm(grad);
    double t = 1.0;
    Eigen::VectorXd trial = phi + step;
    double f_trial = sys.objective(trial);
    Eigen::VectorXd grad_trial = sys.gradient(trial);
    // Close to the root the decrease of Phi drowns in its rounding error; a
    // full step that shrinks the residual is accepted on that ground alone.
    bool accepted = f_trial <= f + 1e-4 * slope || sys.residual_norm(grad_trial) < current;
    for (int bt = 0; bt < 60 && !accepted; ++bt) {
      t *= 0.5;
      trial = phi + t * step;
      f_trial = sys.objective(trial);
      accepted = f_trial <= f + 1e-4 * t * slope;
    }
    if (accepted) {
      if (t != 1.0) grad_trial = sys.gradient(trial);
      phi = std::move(trial);
      f = f_trial;
      grad = std::move(grad_trial);
      damping = std::max(damping * 0.1, 1e-14);
    } else {
      damping *= 100.0;
    }
    const double residual = sys.residual_norm(grad);
    if (residual < best.residual) {
      best.phi = phi;
      best.residual = residual;
      patience = opts.patience;
    } else if (--patience <= 0) {
      break;
    }
    if (residual <= opts.tol) break;
  }
  best.converged = best.residual <= opts.tol;
  return best;
}

double pair_dyads(const std::vector<Count>& sizes, Index r, Index s) {
  const auto nr = static_cast<double>(sizes[r]);
  if (r == s) return nr * (nr - 1.0) / 2.0;
  return nr * static_cast<double>(sizes[s]);
}

// Dense k x k edge counts L_rs (L_rr on the diagonal).
Eigen::MatrixXd block_edge_matrix(const Graph& g, const Partition& p) {
  const Index k = p.block_count();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [i, j] : g.edge_list()) {
    const Index r = p[i], s = p[j];
    l(r, s) += 1.0;
    if (r != s) l(s, r) += 1.0;
  }
  return l;
}

void check_pairing(const Graph& g, const Partition& p) {
  if (p.node_count() != g.node_count())
    throw Error("partition has " + std::to_string(p.node_count()) + " nodes, graph has " +
                std::to_string(g.node_count()));
}

// Node classes for the dcSBM: free nodes grouped by (block, residual degree).
struct NodeClasses {
  std::vector<Index> of_node;  // -1 for pinned nodes
  std::vector<Index> block;
  std::vector<Count> degree;
  std::vector<double> multiplicity;
  Index size() const { return static_cast<Index>(block.size()); }
};

NodeClasses classify(const Partition& p, const std::vector<int>& rank,
                     const std::vector<Count>& residual) {
  NodeClasses c;
  c.of_node.assign(p.node_count(), -1);
  std::map<std::pair<Index, Count>, Index> index;
  for (Index i = 0; i < p.node_count(); ++i) {
    if (rank[i] >= 0) continue;
    auto [it, inserted] = index.try_emplace({p[i], residual[i]}, c.size());
    if (inserted) {
      c.block.push_back(p[i]);
      c.degree.push_back(residual[i]);
      c.multiplicity.push_back(0.0);
    }
    c.of_node[i] = it->second;
    c.multiplicity[it->second] += 1.0;
  }
  return c;
}

// Ones forced into each block pair by pinned nodes, and the number of dyads
// left free (both endpoints free).
struct PairBudget {
  Eigen::MatrixXd forced;
  Eigen::MatrixXd free_dyads;
};

PairBudget pair_budget(const Partition& p, const NodeMultipliers& nodes) {
  const Index k = p.block_count();
  const Index n = p.node_count();
  PairBudget b{Eigen::MatrixXd::Zero(k, k), Eigen::MatrixXd::Zero(k, k)};
  std::vector<Count> free_in(k, 0);
  for (Index i = 0; i < n; ++i)
    if (!nodes.pinned(i)) ++free_in[p[i]];
  for (Index r = 0; r < k; ++r)
    for (Index s = r; s < k; ++s) {
      b.free_dyads(r, s) = pair_dyads(free_in, r, s);
      b.free_dyads(s, r) = b.free_dyads(r, s);
    }
  // dyads with at least one pinned endpoint resolve to 0 or 1
  for (Index i = 0; i < n; ++i) {
    if (!nodes.pinned(i)) continue;
    for (Index j = 0; j < n; ++j) {
      if (j == i || (nodes.pinned(j) && j < i)) continue;
      if (nodes.probability(i, j) == 1.0) {
        b.forced(p[i], p[j]) += 1.0;
        if (p[i] != p[j]) b.forced(p[j], p[i]) += 1.0;
      }
    }
  }
  return b;
}

// Solves L = sum_groups count * sigma(base + eta) for eta by bracketing the
// affinity chi = e^eta on [0, upper], growing upper geometrically.
double solve_affinity(const std::vector<std::pair<double, double>>& groups, double target) {
  // groups: (count, ln(x_i x_j))
  auto expected = [&](double eta) {
    double e = 0.0, d = 0.0;
    for (const auto& [c, base] : groups) {
      const double q = sigmoid(base + eta);
      e += c * q;
      d += c * q * (1.0 - q);
    }
    return std::pair{e, d};
  };
  double mass = 0.0;
  for (const auto& [c, base] : groups) mass += c * std::exp(base);
  double eta = std::log(target / mass);
  // bracket in eta; lower end corresponds to chi -> 0
  double lo = -kInf, hi = eta;
  while (expected(hi).first < target) {
    lo = hi;
    hi += std::log(2.0) * std::max(1.0, std::abs(hi - eta));
  }
  if (lo == -kInf) {
    double step = std::log(2.0);
    lo = hi - step;
    while (expected(lo).first > target) {
      hi = lo;
      step *= 2.0;
      lo -= step;
    }
  }
  eta = 0.5 * (lo + hi);
  const double tol = 1e-13 * std::max(1.0, target);
  for (int it = 0; it < 200; ++it) {
    const auto [e, d] = expected(eta);
    const double r = e - target;
    if (std::abs(r) <= tol) break;
    if (r > 0)
      hi = eta;
    else
      lo = eta;
    double next = d > 0.0 ? eta - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(eta))) break;
    eta = next;
  }
  return eta;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json score_json(const BicScore& s) {
  return {{"model", to_string(s.model)},
          {"kappa", s.param_count},
          {"n", number(s.sample_size)},
          {"loglik", number(s.loglik)},
          {"bic", number(s.bic)}};
}

}  // namespace

double sample_size(Index node_count, SampleSize convention) {
  const auto n = static_cast<double>(node_count);
  return convention == SampleSize::dyads ? n * (n - 1.0) / 2.0 : n;
}

BicScore make_bic_score(Model model, double loglik, Count param_count, double n) {
  BicScore s;
  s.model = model;
  s.loglik = loglik;
  s.param_count = param_count;
  s.sample_size = n;
  s.bic = static_cast<double>(param_count) * std::log(n) - 2.0 * loglik;
  return s;
}

Count sbm_param_count(Index block_count) { return block_count * (block_count + 1) / 2; }

Count dcsbm_param_count(Index block_count, Index node_count) {
  return sbm_param_count(block_count) + node_count;
}

SbmParams fit_sbm(const BlockStats& s) {
  Index k = 0;
  for (Index r = 0; r < s.capacity(); ++r)
    if (s.members(r) > 0) k = r + 1;
  if (k != s.block_count()) throw Error("fit_sbm needs dense block ids");
  SbmParams params;
  params.probabilities = Eigen::MatrixXd::Zero(k, k);
  for (Index r = 0; r < k; ++r) {
    const auto nr = static_cast<double>(s.size(r));
    if (s.size(r) > 1) params.probabilities(r, r) = 2.0 * static_cast<double>(s.intra(r)) / (nr * (nr - 1.0));
    for (const auto& [t, l] : s.inter_row(r)) {
      params.probabilities(r, t) = static_cast<double>(l) / (nr * static_cast<double>(s.size(t)));
    }
  }
  return params;
}

double loglik_sbm(const BlockStats& s, const SbmParams& params) {
  const Index k = params.probabilities.rows();
  auto term = [](double edges, double dyads, double prob) {
    double v = 0.0;
    if (edges > 0.0) v += edges * std::log(prob);
    if (dyads - edges > 0.0) v += (dyads - edges) * std::log1p(-prob);
    return v;
  };
  double ll = 0.0;
  for (Index r = 0; r < k; ++r) {
    const auto nr = static_cast<double>(s.size(r));
    ll += term(static_cast<double>(s.intra(r)), nr * (nr - 1.0) / 2.0, params.probabilities(r, r));
    for (Index t = r + 1; t < k; ++t)
      ll += term(static_cast<double>(s.inter(r, t)), nr * static_cast<double>(s.size(t)),
                 params.probabilities(r, t));
  }
  return ll;
}

double block_pair_loglik(double edges, double dyads) {
  if (edges <= 0.0 || edges >= dyads) return 0.0;
  const double p = edges / dyads;
  return edges * std::log(p) + (dyads - edges) * std::log1p(-p);
}

BicScore bic_sbm(const Graph& g, const Partition& p, SampleSize n) {
  check_pairing(g, p);
  const auto s = block_stats(g, p);
  const auto params = fit_sbm(s);
  return make_bic_score(Model::sbm, loglik_sbm(s, params), sbm_param_count(p.block_count()),
                        sample_size(g.node_count(), n));
}

// ---------------------------------------------------------------------------

double NodeMultipliers::probability(Index i, Index j, double chi) const {
  const int ri = pin_rank[i], rj = pin_rank[j];
  if (ri >= 0 || rj >= 0) {
    const Index decider = (rj < 0 || (ri >= 0 && ri <= rj)) ? i : j;
    return x[decider] == 0.0 ? 0.0 : 1.0;
  }
  if (chi == 0.0) return 0.0;
  if (std::isinf(chi)) return 1.0;
  const double y = x[i] * x[j] * chi;
  return y / (1.0 + y);
}

double NodeMultipliers::log_prob(Index i, Index j, double chi, bool linked) const {
  const bool forced = pinned(i) || pinned(j) || chi == 0.0 || std::isinf(chi);
  if (forced) {
    const double q = probability(i, j, chi);
    return (q == 1.0) == linked ? 0.0 : -kInf;
  }
  const double s = std::log(x[i]) + std::log(x[j]) + std::log(chi);
  return linked ? -softplus(-s) : -softplus(s);
}

UbcmParams solve_ubcm(const Eigen::VectorXi& degrees, const SolverOptions& opts) {
  const Index n = degrees.size();
  const Peeling peel = peel_degrees(degrees);
  UbcmParams out;
  out.nodes.x = peel.x;
  out.nodes.pin_rank = peel.rank;

  // free nodes with equal residual degree share one multiplier
  std::map<Count, Index> class_of;
  std::vector<Count> class_degree;
  std::vector<double> mult;
  std::vector<Index> node_class(n, -1);
  for (Index i = 0; i < n; ++i) {
    if (peel.rank[i] >= 0) continue;
    auto [it, inserted] = class_of.try_emplace(peel.residual[i], static_cast<Index>(class_degree.size()));
    if (inserted) {
      class_degree.push_back(peel.residual[i]);
      mult.push_back(0.0);
    }
    node_class[i] = it->second;
    mult[it->second] += 1.0;
  }
  const auto c = static_cast<Index>(class_degree.size());
  LogisticSystem sys;
  sys.target.resize(c);
  sys.weight.resize(c);
  double stubs = 0.0;
  for (Index a = 0; a < c; ++a) {
    sys.target[a] = mult[a] * static_cast<double>(class_degree[a]);
    sys.weight[a] = mult[a];
    stubs += sys.target[a];
    sys.add(mult[a] * (mult[a] - 1.0) / 2.0, {{a, 2.0}});
    for (Index b = a + 1; b < c; ++b) sys.add(mult[a] * mult[b], {{a, 1.0}, {b, 1.0}});
  }
  Eigen::VectorXd phi(c);
  for (Index a = 0; a < c; ++a)
    phi[a] = std::log(static_cast<double>(class_degree[a]) / std::sqrt(std::max(stubs, 1.0)));
  const auto result = solve_logistic(sys, phi, opts);
  for (Index i = 0; i < n; ++i)
    if (node_class[i] >= 0) out.nodes.x[i] = std::exp(result.phi[node_class[i]]);
  out.residual_norm = result.residual;
  out.converged = result.converged;
  out.iterations = result.iterations;
  return out;
}

Eigen::VectorXd ubcm_expected_degrees(const NodeMultipliers& nodes) {
  const Index n = nodes.size();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double q = nodes.probability(i, j);
      e[i] += q;
      e[j] += q;
    }
  return e;
}

double loglik_ubcm(const Graph& g, const NodeMultipliers& nodes) {
  double ll = 0.0;
  for (Index i = 0; i < g.node_count(); ++i)
    for (Index j = i + 1; j < g.node_count(); ++j) ll += nodes.log_prob(i, j, 1.0, g.has_edge(i, j));
  return ll;
}

DcSbmParams solve_chi_decoupled(const Graph& g, const Partition& p, const UbcmParams& ubcm) {
  return solve_chi_decoupled(g, p, ubcm.nodes);
}

DcSbmParams solve_chi_decoupled(const Graph& g, const Partition& p, const NodeMultipliers& nodes) {
  check_pairing(g, p);
  if (nodes.size() != g.node_count()) throw Error("multipliers do not match the graph");
  const Index k = p.block_count();
  const Index n = g.node_count();
  DcSbmParams out;
  out.nodes = nodes;
  out.mode = DcMode::decoupled;
  out.chi = Eigen::MatrixXd::Zero(k, k);

  const Eigen::MatrixXd edges = block_edge_matrix(g, p);
  const PairBudget budget = pair_budget(p, nodes);

  // free nodes of each block grouped by multiplier value
  std::vector<std::map<double, double>> values(k);
  for (Index i = 0; i < n; ++i)
    if (!nodes.pinned(i)) values[p[i]][nodes.x[i]] += 1.0;

  Eigen::MatrixXd residual = Eigen::MatrixXd::Zero(k, k);
  for (Index r = 0; r < k; ++r) {
    for (Index s = r; s < k; ++s) {
      const double target = edges(r, s) - budget.forced(r, s);
      const double free = budget.free_dyads(r, s);
      double chi = 0.0;
      if (free > 0.0 && target >= free) {
        chi = kInf;
      } else if (free > 0.0 && target > 0.0) {
        std::vector<std::pair<double, double>> groups;
        for (auto a = values[r].begin(); a != values[r].end(); ++a) {
          auto b = (r == s) ? a : values[s].begin();
          for (; b != values[s].end(); ++b) {
            double count = a->second * b->second;
            if (r == s && a == b) count = a->second * (a->second - 1.0) / 2.0;
            if (count > 0.0) groups.emplace_back(count, std::log(a->first) + std::log(b->first));
          }
        }
        const double eta = solve_affinity(groups, target);
        chi = std::exp(eta);
        double expected = 0.0;
        for (const auto& [c, base] : groups) expected += c * sigmoid(base + eta);
        residual(r, s) = expected - target;
      }
      out.chi(r, s) = out.chi(s, r) = chi;
    }
  }
  out.residual_norm = residual.norm();
  out.converged = true;
  return out;
}

DcSbmParams solve_dcsbm_joint(const Graph& g, const Partition& p, const Eigen::VectorXd& x0,
                              const SolverOptions& opts) {
  check_pairing(g, p);
  const Index n = g.node_count();
  const Index k = p.block_count();
  if (x0.size() != n) throw Error("initial multipliers do not match the graph");

  const Peeling peel = peel_degrees(g.degrees());
  NodeMultipliers nodes;
  nodes.x = peel.x;
  nodes.pin_rank = peel.rank;
  for (Index i = 0; i < n; ++i)
    if (peel.rank[i] < 0) {
      if (!(x0[i] > 0.0) || !std::isfinite(x0[i]))
        throw Error("initial multiplier of node " + std::to_string(i) + " must be positive");
      nodes.x[i] = x0[i];
    }

  // warm start for the affinities
  DcSbmParams start = solve_chi_decoupled(g, p, nodes);

  const Eigen::MatrixXd edges = block_edge_matrix(g, p);
  const PairBudget budget = pair_budget(p, nodes);
  NodeClasses classes = classify(p, peel.rank, peel.residual);
  const Index c = classes.size();

  // affinities fixed at 0 or inf remove ones from the free nodes' degree budget
  std::vector<double> free_in(k, 0.0);
  for (Index i = 0; i < n; ++i)
    if (!nodes.pinned(i)) free_in[p[i]] += 1.0;
  std::vector<double> class_target(c);
  for (Index a = 0; a < c; ++a) {
    double forced = 0.0;
    for (Index s = 0; s < k; ++s)
      if (std::isinf(start.chi(classes.block[a], s)))
        forced += free_in[s] - (s == classes.block[a] ? 1.0 : 0.0);
    class_target[a] = static_cast<double>(classes.degree[a]) - forced;
  }

  // parameter layout: node classes first, then free block pairs (r <= s)
  Eigen::MatrixXi pair_index = Eigen::MatrixXi::Constant(k, k, -1);
  Index m = c;
  for (Index r = 0; r < k; ++r)
    for (Index s = r; s < k; ++s) {
      const double chi = start.chi(r, s);
      if (budget.free_dyads(r, s) > 0.0 && chi > 0.0 && std::isfinite(chi)) {
        pair_index(r, s) = pair_index(s, r) = static_cast<int>(m++);
      }
    }

  LogisticSystem sys;
  sys.target.resize(m);
  sys.weight = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd phi(m);
  for (Index a = 0; a < c; ++a) {
    sys.target[a] = classes.multiplicity[a] * class_target[a];
    sys.weight[a] = classes.multiplicity[a];
  }
  std::vector<double> class_log_x(c, 0.0);
  for (Index i = 0; i < n; ++i)
    if (classes.of_node[i] >= 0)
      class_log_x[classes.of_node[i]] += std::log(nodes.x[i]) / classes.multiplicity[classes.of_node[i]];
  for (Index a = 0; a < c; ++a) phi[a] = class_log_x[a];
  for (Index r = 0; r < k; ++r)
    for (Index s = r; s < k; ++s)
      if (pair_index(r, s) >= 0) {
        sys.target[pair_index(r, s)] = edges(r, s) - budget.forced(r, s);
        phi[pair_index(r, s)] = std::log(start.chi(r, s));
      }
  for (Index a = 0; a < c; ++a) {
    const Index r = classes.block[a];
    const double ma = classes.multiplicity[a];
    if (pair_index(r, r) >= 0) sys.add(ma * (ma - 1.0) / 2.0, {{a, 2.0}, {pair_index(r, r), 1.0}});
    for (Index b = a + 1; b < c; ++b) {
      const Index s = classes.block[b];
      if (pair_index(r, s) < 0) continue;
      sys.add(ma * classes.multiplicity[b], {{a, 1.0}, {b, 1.0}, {pair_index(r, s), 1.0}});
    }
  }

  const auto result = solve_logistic(sys, phi, opts);

  DcSbmParams out;
  out.mode = DcMode::joint;
  out.nodes = nodes;
  for (Index i = 0; i < n; ++i)
    if (classes.of_node[i] >= 0) out.nodes.x[i] = std::exp(result.phi[classes.of_node[i]]);
  out.chi = start.chi;
  for (Index r = 0; r < k; ++r)
    for (Index s = 0; s < k; ++s)
      if (pair_index(r, s) >= 0) out.chi(r, s) = std::exp(result.phi[pair_index(r, s)]);
  out.residual_norm = result.residual;
  out.converged = result.converged;
  out.iterations = result.iterations;
  return out;
}

double loglik_dcsbm(const Graph& g, const Partition& p, const DcSbmParams& params) {
  check_pairing(g, p);
  double ll = 0.0;
  const Index n = g.node_count();
  for (Index i = 0; i < n; ++i) {
    auto nb = g.neighbors(i);
    auto it = nb.begin();
    for (Index j = i + 1; j < n; ++j) {
      while (it != nb.end() && *it < j) ++it;
      const bool linked = it != nb.end() && *it == j;
      ll += params.nodes.log_prob(i, j, params.chi(p[i], p[j]), linked);
    }
  }
  return ll;
}

BicScore bic_dcsbm(const Graph& g, const Partition& p, const DcSbmParams& params, SampleSize n) {
  return make_bic_score(Model::dcsbm, loglik_dcsbm(g, p, params),
                        dcsbm_param_count(p.block_count(), g.node_count()),
                        sample_size(g.node_count(), n));
}

double DcSbmResiduals::norm() const {
  // each unordered block pair once
  const Eigen::MatrixXd upper = block.triangularView<Eigen::Upper>();
  return std::sqrt(degree.squaredNorm() + upper.squaredNorm());
}

DcSbmResiduals dcsbm_residuals(const Graph& g, const Partition& p, const DcSbmParams& params) {
  check_pairing(g, p);
  const Index n = g.node_count();
  DcSbmResiduals res;
  res.degree = -g.degrees().cast<double>();
  res.block = -block_edge_matrix(g, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double q = params.nodes.probability(i, j, params.chi(p[i], p[j]));
      res.degree[i] += q;
      res.degree[j] += q;
      res.block(p[i], p[j]) += q;
      if (p[i] != p[j]) res.block(p[j], p[i]) += q;
    }
  return res;
}

std::string fit_record(const BicScore& score, const SbmParams& params) {
  auto j = score_json(score);
  j["probabilities"] = matrix_json(params.probabilities);
  return j.dump(2);
}

std::string fit_record(const BicScore& score, const DcSbmParams& params) {
  auto j = score_json(score);
  j["mode"] = params.mode == DcMode::joint ? "joint" : "decoupled";
  j["residual_norm"] = number(params.residual_norm);
  j["converged"] = params.converged;
  auto x = nlohmann::json::array();
  for (Index i = 0; i < params.nodes.size(); ++i) x.push_back(number(params.nodes.x[i]));
  j["node_multipliers"] = std::move(x);
  j["block_affinities"] = matrix_json(params.chi);
  return j.dump(2);
}

const char* to_string(Model m) { return m == Model::sbm ? "sbm" : "dcsbm"; }
const char* to_string(SampleSize n) { return n == SampleSize::dyads ? "dyads" : "nodes"; }

}  // namespace mesonet
