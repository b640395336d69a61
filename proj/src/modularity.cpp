#include <algorithm>
#include <cmath>
#include <limits>

#include "mesonet/detection.hpp"

namespace mesonet {

double modularity(const Graph& g, const Partition& p) {
  if (p.node_count() != g.node_count()) throw Error("partition does not match graph");
  if (g.edge_count() == 0) throw Error("modularity is undefined for a graph without edges");
  const auto s = block_stats(g, p);
  const auto two_l = 2.0 * static_cast<double>(g.edge_count());
  double q = 0.0;
  for (Index r = 0; r < s.capacity(); ++r) {
    if (s.members(r) == 0) continue;
    const double share = static_cast<double>(s.degree_sum(r)) / two_l;
    q += 2.0 * static_cast<double>(s.intra(r)) / two_l - share * share;
  }
  return q;
}

QualityFunction QualityFunction::modularity(const Graph& g) {
  QualityFunction q;
  q.kind_ = QualityKind::modularity;
  q.total_edges_ = static_cast<double>(g.edge_count());
  q.node_count_ = g.node_count();
  return q;
}

QualityFunction QualityFunction::bic_sbm(const Graph& g, SampleSize n) {
  if (g.node_count() < 2) throw Error("BIC needs at least two nodes");
  QualityFunction q;
  q.kind_ = QualityKind::bic_sbm;
  q.convention_ = n;
  q.total_edges_ = static_cast<double>(g.edge_count());
  q.node_count_ = g.node_count();
  q.log_n_ = std::log(sample_size(g.node_count(), n));
  return q;
}

QualityFunction QualityFunction::bic_dcsbm(const Graph& g, const NodeMultipliers& fixed,
                                           SampleSize n) {
  if (fixed.size() != g.node_count()) throw Error("multipliers do not match graph");
  QualityFunction q = bic_sbm(g, n);
  q.kind_ = QualityKind::bic_dcsbm;
  q.fixed_ = fixed;
  double cap = 0.0;
  for (Index i = 0; i < fixed.size(); ++i)
    if (std::isfinite(fixed.x[i])) cap = std::max(cap, fixed.x[i]);
  cap = cap > 0.0 ? 10.0 * cap : 1.0;
  q.surrogate_x_ = fixed.x.unaryExpr([cap](double v) { return std::isfinite(v) ? v : cap; });
  return q;
}

double QualityFunction::full(const Graph& g, const Partition& p) const {
  switch (kind_) {
    case QualityKind::modularity:
      return mesonet::modularity(g, p);
    case QualityKind::bic_sbm:
      return -mesonet::bic_sbm(g, p, convention_).bic;
    case QualityKind::bic_dcsbm:
      return -bic_dcsbm_score(g, p);
  }
  return 0.0;
}

double QualityFunction::bic_dcsbm_score(const Graph& g, const Partition& p) const {
  return mesonet::bic_dcsbm(g, p, solve_chi_decoupled(g, p, fixed_), convention_).bic;
}

double QualityFunction::pair_term(double edges, double measure) const {
  if (kind_ == QualityKind::bic_sbm) return block_pair_loglik(edges, measure);
  if (edges <= 0.0) return 0.0;
  const double t = std::max(measure, std::numeric_limits<double>::min());
  return edges * std::log(edges / t) - edges;
}

double QualityFunction::measure(double a_r, double b_r, double a_s, double, bool same) const {
  if (same) return std::max(0.0, (a_r * a_r - b_r) / 2.0);
  return a_r * a_s;
}

double QualityFunction::penalty(Index blocks) const {
  Count kappa = sbm_param_count(blocks);
  if (kind_ == QualityKind::bic_dcsbm) kappa += node_count_;
  return static_cast<double>(kappa) * log_n_;
}

namespace {

struct Weights {
  double a = 0.0;
  double b = 0.0;
};

}  // namespace

double QualityFunction::value(const BlockStats& s) const {
  if (kind_ == QualityKind::modularity) {
    const double l = total_edges_;
    if (l == 0.0) return 0.0;
    double q = 0.0;
    for (Index r = 0; r < s.capacity(); ++r) {
      if (s.members(r) == 0) continue;
      const double share = static_cast<double>(s.degree_sum(r)) / (2.0 * l);
      q += static_cast<double>(s.intra(r)) / l - share * share;
    }
    return q;
  }
  double total = 0.0;
  for (Index r = 0; r < s.capacity(); ++r) {
    if (s.members(r) == 0) continue;
    const double ar = block_a(s, r);
    const double br = block_b(s, r);
    total += pair_term(static_cast<double>(s.intra(r)), measure(ar, br, ar, br, true));
    for (const auto& [t, l] : s.inter_row(r)) {
      if (t < r) continue;
      total += pair_term(static_cast<double>(l), measure(ar, br, block_a(s, t), block_b(s, t), false));
    }
  }
  return 2.0 * total - penalty(s.block_count());
}

double QualityFunction::block_a(const BlockStats& s, Index r) const {
  if (r >= s.capacity()) return 0.0;
  return kind_ == QualityKind::bic_dcsbm ? s.x_sum(r) : static_cast<double>(s.size(r));
}

double QualityFunction::block_b(const BlockStats& s, Index r) const {
  if (r >= s.capacity()) return 0.0;
  return kind_ == QualityKind::bic_dcsbm ? s.x2_sum(r) : static_cast<double>(s.size(r));
}

double QualityFunction::delta(const BlockStats& s, Index v, Index to) const {
  const Index from = s.label(v);
  if (from == to) return 0.0;
  const WeightedGraph& wg = s.graph();
  const bool to_empty = to >= s.capacity() || s.members(to) == 0;
  const auto w_from = static_cast<double>(s.node_to_block(v, from));
  const auto w_to = to_empty ? 0.0 : static_cast<double>(s.node_to_block(v, to));

  if (kind_ == QualityKind::modularity) {
    const double l = total_edges_;
    if (l == 0.0) return 0.0;
    const auto d = static_cast<double>(wg.degree[v]);
    const auto d_from = static_cast<double>(s.degree_sum(from));
    const double d_to = to_empty ? 0.0 : static_cast<double>(s.degree_sum(to));
    return (w_to - w_from) / l - (2.0 * d * (d_to - d_from) + 2.0 * d * d) / (4.0 * l * l);
  }

  const Weights node = kind_ == QualityKind::bic_dcsbm
                           ? Weights{wg.x_sum[v], wg.x2_sum[v]}
                           : Weights{static_cast<double>(wg.size[v]), static_cast<double>(wg.size[v])};
  const Weights a{block_a(s, from), block_b(s, from)};
  const Weights b = to_empty ? Weights{} : Weights{block_a(s, to), block_b(s, to)};
  const Weights a2{a.a - node.a, a.b - node.b};
  const Weights b2{b.a + node.a, b.b + node.b};
  const auto e = static_cast<double>(wg.internal_edges[v]);
  const auto l_aa = static_cast<double>(s.intra(from));
  const double l_bb = to_empty ? 0.0 : static_cast<double>(s.intra(to));
  const double l_ab = to_empty ? 0.0 : static_cast<double>(s.inter(from, to));

  double before = pair_term(l_aa, measure(a.a, a.b, a.a, a.b, true)) +
                  pair_term(l_bb, measure(b.a, b.b, b.a, b.b, true)) +
                  pair_term(l_ab, measure(a.a, a.b, b.a, b.b, false));
  double after = pair_term(l_aa - w_from - e, measure(a2.a, a2.b, a2.a, a2.b, true)) +
                 pair_term(l_bb + w_to + e, measure(b2.a, b2.b, b2.a, b2.b, true)) +
                 pair_term(l_ab + w_from - w_to, measure(a2.a, a2.b, b2.a, b2.b, false));

  auto third = [&](Index t, double l_at, double l_bt) {
    const double at = block_a(s, t);
    const double bt = block_b(s, t);
    const auto wt = static_cast<double>(s.node_to_block(v, t));
    before += pair_term(l_at, measure(a.a, a.b, at, bt, false)) +
              pair_term(l_bt, measure(b.a, b.b, at, bt, false));
    after += pair_term(l_at - wt, measure(a2.a, a2.b, at, bt, false)) +
             pair_term(l_bt + wt, measure(b2.a, b2.b, at, bt, false));
  };
  const auto& row_a = s.inter_row(from);
  for (const auto& [t, l] : row_a) {
    if (t == to) continue;
    third(t, static_cast<double>(l), to_empty ? 0.0 : static_cast<double>(s.inter(to, t)));
  }
  if (!to_empty) {
    for (const auto& [t, l] : s.inter_row(to)) {
      if (t == from || row_a.count(t)) continue;
      third(t, 0.0, static_cast<double>(l));
    }
  }

  const Index k = s.block_count();
  const Index k2 = k - (s.members(from) == 1 ? 1 : 0) + (to_empty ? 1 : 0);
  return 2.0 * (after - before) - (penalty(k2) - penalty(k));
}

}  // namespace mesonet
