#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mesonet/graph.hpp"
#include "mesonet/partition.hpp"

namespace mesonet {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  /// Parses YYYY-MM-DD; throws on malformed or impossible dates.
  static Date parse(const std::string& text);
  std::string to_string() const;
  auto operator<=>(const Date&) const = default;
};

struct PatentRecord {
  std::string patent_id;
  std::vector<std::string> inventors;  // sorted, unique
  std::vector<std::string> owners;     // sorted, unique
  std::vector<std::string> ipc_codes;  // sorted, unique
  Count forward_citations = 0;
  Date date;
};

struct LoadIssue {
  std::size_t line = 0;
  std::string message;
};

struct Corpus {
  std::vector<PatentRecord> records;
  std::vector<LoadIssue> issues;
};

/// One JSON object per line with fields patent_id, inventors, owners,
/// ipc_codes, forward_citations, date. Bad lines are skipped and reported.
Corpus load_patents(const std::string& path);
Corpus parse_patents(std::istream& in);

std::string to_json_line(const PatentRecord& r);

enum class Level { inventors, organizations };

Level parse_level(const std::string& name);
const char* to_string(Level level);

struct NetworkSpec {
  Level level = Level::inventors;
  Index top_n = 500;
  std::optional<Date> from;  // inclusive
  std::optional<Date> to;    // inclusive
  std::vector<std::string> ipc_prefixes;  // keep patents with a code starting with any of these
};

struct ActorInfo {
  std::string id;
  Count citations = 0;
  Count patent_count = 0;
  std::vector<std::size_t> patents;  // indices into Network::patents
};

/// Collaboration network of the top-ranked actors plus what the analyses
/// need to know about them. actors[i] describes node i.
struct Network {
  Graph graph;
  std::vector<ActorInfo> actors;
  std::vector<PatentRecord> patents;  // patents inside the window
};

/// Actors are ranked by summed forward citations over window patents (ties:
/// more patents first, then smaller id); the top_n become nodes, linked when
/// they share a patent.
Network build_network(const Corpus& corpus, const NetworkSpec& spec);

/// Patent indices per cluster. A patent belongs to every cluster holding one
/// of its selected actors, once.
std::vector<std::vector<std::size_t>> cluster_patents(const Network& net, const Partition& p);

/// Summed forward citations of each cluster's patents.
std::vector<double> cluster_citations(const Network& net, const Partition& p);

void write_network(const Network& net, const std::string& path);
Network read_network(const std::string& path);

}  // namespace mesonet
