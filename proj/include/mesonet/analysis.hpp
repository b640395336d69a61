#pragma once

#include <span>
#include <string>
#include <vector>

#include "mesonet/graph.hpp"
#include "mesonet/partition.hpp"
#include "mesonet/patents.hpp"

namespace mesonet {

struct ClusterReport {
  std::vector<Count> sizes;
  std::vector<double> mean_within_degree;  // on the induced subgraph
  std::vector<double> std_within_degree;
  double mean_within = 0.0;  // unweighted average over clusters
  double std_within = 0.0;
  double ic_ec = 0.0;  // +inf without inter-cluster edges
  Index cluster_count = 0;
};

ClusterReport cluster_report(const Graph& g, const Partition& p);

struct ClusterDiversity {
  Count patents = 0;
  Count owners = 0;           // D_own
  double ipc_entropy = 0.0;   // D_IPC in nats
  bool defined = false;       // false when the cluster has no patents
  bool multi_company = false;
  bool generalist = false;    // entropy above the median
};

struct DiversityReport {
  std::vector<ClusterDiversity> clusters;
  double median_entropy = 0.0;
};

/// Shannon entropy of the IPC code shares, where a code's share counts the
/// cluster patents carrying it.
double ipc_entropy(std::span<const PatentRecord* const> patents);

/// `patents[r]` lists the patents associated with cluster r.
DiversityReport diversity_report(const Partition& p,
                                 const std::vector<std::vector<const PatentRecord*>>& patents);
DiversityReport diversity_report(const Network& net, const Partition& p);

struct LorenzCurve {
  std::vector<double> x;  // x[0] = 0
  std::vector<double> y;  // y[0] = 0
  double gini = 0.0;
};

/// Lorenz points of the ascending-sorted totals and G = 1 - 2 * (trapezoid
/// area). Throws on negative or non-finite input and when every total is 0.
LorenzCurve lorenz_gini(std::span<const double> totals);

struct SimilarityReport {
  double rand = 0.0;
  double jaccard = 0.0;
  double nmi = 0.0;
  Count tp = 0;  // pairs together in both
  Count tn = 0;  // pairs apart in both
  Count fp = 0;  // together only in the second partition
  Count fn = 0;  // together only in the first partition
  std::vector<std::vector<Count>> contingency;  // n_ij
  double mutual_information = 0.0;
  double entropy_c = 0.0;
  double entropy_d = 0.0;
};

SimilarityReport similarity(const Partition& c, const Partition& d);

void write_cluster_csv(const ClusterReport& r, const std::string& path);
void write_diversity_csv(const DiversityReport& r, const std::string& path);
void write_lorenz_csv(const LorenzCurve& curve, const std::string& path);
/// One row per unordered pair of named partitions.
void write_similarity_csv(const std::vector<std::string>& names,
                          const std::vector<Partition>& partitions, const std::string& path);

}  // namespace mesonet
