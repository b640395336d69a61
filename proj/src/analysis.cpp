#include "mesonet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace mesonet {

namespace {

void check_pairing(const Graph& g, const Partition& p) {
  if (p.node_count() != g.node_count())
    throw Error("partition has " + std::to_string(p.node_count()) + " nodes, graph has " +
                std::to_string(g.node_count()));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

Count pairs(Count n) { return n * (n - 1) / 2; }

}  // namespace

ClusterReport cluster_report(const Graph& g, const Partition& p) {
  check_pairing(g, p);
  const Index k = p.block_count();
  ClusterReport r;
  r.cluster_count = k;
  r.sizes = p.block_sizes();
  std::vector<double> sum(k, 0.0);
  std::vector<double> sum_sq(k, 0.0);
  for (Index i = 0; i < g.node_count(); ++i) {
    Count within = 0;
    for (Index j : g.neighbors(i))
      if (p[j] == p[i]) ++within;
    const auto w = static_cast<double>(within);
    sum[p[i]] += w;
    sum_sq[p[i]] += w * w;
  }
  r.mean_within_degree.resize(k);
  r.std_within_degree.resize(k);
  for (Index c = 0; c < k; ++c) {
    const auto n = static_cast<double>(r.sizes[c]);
    const double mean = sum[c] / n;
    r.mean_within_degree[c] = mean;
    r.std_within_degree[c] = std::sqrt(std::max(0.0, sum_sq[c] / n - mean * mean));
    r.mean_within += mean;
    r.std_within += r.std_within_degree[c];
  }
  if (k > 0) {
    r.mean_within /= static_cast<double>(k);
    r.std_within /= static_cast<double>(k);
  }
  r.ic_ec = ic_ec_ratio(block_stats(g, p));
  return r;
}

double ipc_entropy(std::span<const PatentRecord* const> patents) {
  std::map<std::string, Count> counts;
  Count total = 0;
  for (const PatentRecord* rec : patents) {
    for (const auto& code : rec->ipc_codes) {
      ++counts[code];
      ++total;
    }
  }
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [code, c] : counts) {
    const double share = static_cast<double>(c) / static_cast<double>(total);
    h -= share * std::log(share);
  }
  return std::max(0.0, h);
}

DiversityReport diversity_report(const Partition& p,
                                 const std::vector<std::vector<const PatentRecord*>>& patents) {
  if (static_cast<Index>(patents.size()) != p.block_count())
    throw Error("patent sets given for " + std::to_string(patents.size()) + " clusters, partition has " +
                std::to_string(p.block_count()));
  DiversityReport r;
  r.clusters.resize(patents.size());
  std::vector<double> entropies;
  for (std::size_t c = 0; c < patents.size(); ++c) {
    auto& d = r.clusters[c];
    d.patents = static_cast<Count>(patents[c].size());
    d.defined = !patents[c].empty();
    if (!d.defined) continue;
    std::set<std::string> owners;
    for (const PatentRecord* rec : patents[c]) owners.insert(rec->owners.begin(), rec->owners.end());
    d.owners = static_cast<Count>(owners.size());
    d.multi_company = d.owners > 1;
    d.ipc_entropy = ipc_entropy(patents[c]);
    entropies.push_back(d.ipc_entropy);
  }
  if (!entropies.empty()) {
    std::sort(entropies.begin(), entropies.end());
    const std::size_t m = entropies.size();
    r.median_entropy = m % 2 == 1 ? entropies[m / 2]
                                  : (entropies[m / 2 - 1] + entropies[m / 2]) / 2.0;
  }
  for (auto& d : r.clusters)
    if (d.defined) d.generalist = d.ipc_entropy > r.median_entropy;
  return r;
}

DiversityReport diversity_report(const Network& net, const Partition& p) {
  const auto groups = cluster_patents(net, p);
  std::vector<std::vector<const PatentRecord*>> sets(groups.size());
  for (std::size_t c = 0; c < groups.size(); ++c)
    for (std::size_t idx : groups[c]) sets[c].push_back(&net.patents[idx]);
  return diversity_report(p, sets);
}

LorenzCurve lorenz_gini(std::span<const double> totals) {
  if (totals.empty()) throw Error("inequality needs at least one cluster");
  std::vector<double> sorted(totals.begin(), totals.end());
  for (double v : sorted)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("cluster totals must be finite and non-negative");
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  if (total <= 0.0) throw Error("inequality is undefined when every total is zero");

  const std::size_t k = sorted.size();
  LorenzCurve curve;
  curve.x.assign(k + 1, 0.0);
  curve.y.assign(k + 1, 0.0);
  double prefix = 0.0;
  double area = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    prefix += sorted[j - 1];
    curve.x[j] = static_cast<double>(j) / static_cast<double>(k);
    curve.y[j] = j == k ? 1.0 : prefix / total;
    area += (curve.x[j] - curve.x[j - 1]) * (curve.y[j] + curve.y[j - 1]) / 2.0;
  }
  curve.gini = 1.0 - 2.0 * area;
  return curve;
}

SimilarityReport similarity(const Partition& c, const Partition& d) {
  if (c.node_count() != d.node_count())
    throw Error("partitions have different node counts");
  const Index n = c.node_count();
  SimilarityReport r;
  r.contingency.assign(c.block_count(), std::vector<Count>(d.block_count(), 0));
  for (Index i = 0; i < n; ++i) ++r.contingency[c[i]][d[i]];
  const auto a = c.block_sizes();
  const auto b = d.block_sizes();

  Count together_both = 0;
  for (const auto& row : r.contingency)
    for (Count v : row) together_both += pairs(v);
  Count together_c = 0;
  for (Count v : a) together_c += pairs(v);
  Count together_d = 0;
  for (Count v : b) together_d += pairs(v);
  const Count all = pairs(n);
  r.tp = together_both;
  r.fn = together_c - together_both;
  r.fp = together_d - together_both;
  r.tn = all - r.tp - r.fp - r.fn;
  r.rand = all > 0 ? static_cast<double>(r.tp + r.tn) / static_cast<double>(all) : 1.0;
  const Count jac_den = r.tp + r.fp + r.fn;
  r.jaccard = jac_den > 0 ? static_cast<double>(r.tp) / static_cast<double>(jac_den) : 1.0;

  const auto nn = static_cast<double>(n);
  auto entropy = [nn](const std::vector<Count>& sizes) {
    std::vector<double> terms;
    for (Count v : sizes) {
      const double f = static_cast<double>(v) / nn;
      terms.push_back(-f * std::log(f));
    }
    std::sort(terms.begin(), terms.end());
    double h = 0.0;
    for (double t : terms) h += t;
    return h;
  };
  r.entropy_c = n > 0 ? entropy(a) : 0.0;
  r.entropy_d = n > 0 ? entropy(b) : 0.0;
  // Terms are summed in sorted order so that swapping the arguments gives
  // bit-identical results.
  std::vector<double> terms;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Count nij = r.contingency[i][j];
      if (nij == 0) continue;
      const double ratio = (nn * static_cast<double>(nij)) / static_cast<double>(a[i] * b[j]);
      terms.push_back(static_cast<double>(nij) / nn * std::log(ratio));
    }
  }
  std::sort(terms.begin(), terms.end());
  for (double t : terms) r.mutual_information += t;

  const double hsum = r.entropy_c + r.entropy_d;
  if (c.same_grouping(d)) {
    r.nmi = 1.0;
  } else if (r.entropy_c == 0.0 || r.entropy_d == 0.0) {
    r.nmi = 0.0;
  } else {
    r.nmi = std::clamp(2.0 * r.mutual_information / hsum, 0.0, 1.0);
  }
  return r;
}

void write_cluster_csv(const ClusterReport& r, const std::string& path) {
  auto out = open_output(path);
  out << "cluster,size,mean_within_degree,std_within_degree\n";
  for (Index c = 0; c < r.cluster_count; ++c)
    out << c << ',' << r.sizes[c] << ',' << format_number(r.mean_within_degree[c]) << ','
        << format_number(r.std_within_degree[c]) << '\n';
}

void write_diversity_csv(const DiversityReport& r, const std::string& path) {
  auto out = open_output(path);
  out << "cluster,patents,d_own,d_ipc,company,scope\n";
  for (std::size_t c = 0; c < r.clusters.size(); ++c) {
    const auto& d = r.clusters[c];
    out << c << ',' << d.patents << ',';
    if (!d.defined) {
      out << ",,undefined,undefined\n";
      continue;
    }
    out << d.owners << ',' << format_number(d.ipc_entropy) << ','
        << (d.multi_company ? "multi" : "single") << ','
        << (d.generalist ? "generalist" : "specialized") << '\n';
  }
}

void write_lorenz_csv(const LorenzCurve& curve, const std::string& path) {
  auto out = open_output(path);
  out << "j,x,y\n";
  for (std::size_t j = 0; j < curve.x.size(); ++j)
    out << j << ',' << format_number(curve.x[j]) << ',' << format_number(curve.y[j]) << '\n';
}

void write_similarity_csv(const std::vector<std::string>& names,
                          const std::vector<Partition>& partitions, const std::string& path) {
  if (names.size() != partitions.size()) throw Error("one name per partition is required");
  auto out = open_output(path);
  out << "a,b,rand,jaccard,nmi\n";
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    for (std::size_t j = i + 1; j < partitions.size(); ++j) {
      const auto s = similarity(partitions[i], partitions[j]);
      out << names[i] << ',' << names[j] << ',' << format_number(s.rand) << ','
          << format_number(s.jaccard) << ',' << format_number(s.nmi) << '\n';
    }
  }
}

}  // namespace mesonet
