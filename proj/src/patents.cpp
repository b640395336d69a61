#include "mesonet/patents.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace mesonet {

using nlohmann::json;

Date Date::parse(const std::string& text) {
  Date d;
  char tail = 0;
  if (text.size() != 10 ||
      std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &d.year, &d.month, &d.day, &tail) != 3 ||
      text[4] != '-' || text[7] != '-')
    throw Error("malformed date '" + text + "' (expected YYYY-MM-DD)");
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{static_cast<unsigned>(d.month)},
                                        std::chrono::day{static_cast<unsigned>(d.day)}};
  if (!ymd.ok()) throw Error("impossible date '" + text + "'");
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

namespace {

std::vector<std::string> string_set(const json& obj, const char* field) {
  std::vector<std::string> out;
  if (!obj.contains(field) || obj[field].is_null()) return out;
  const json& arr = obj[field];
  if (!arr.is_array()) throw Error(std::string("field '") + field + "' must be an array of strings");
  for (const auto& v : arr) {
    if (!v.is_string()) throw Error(std::string("field '") + field + "' must be an array of strings");
    auto s = v.get<std::string>();
    if (s.empty()) throw Error(std::string("field '") + field + "' contains an empty id");
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PatentRecord parse_record(const json& obj) {
  if (!obj.is_object()) throw Error("line is not a JSON object");
  PatentRecord r;
  if (!obj.contains("patent_id") || !obj["patent_id"].is_string() ||
      obj["patent_id"].get<std::string>().empty())
    throw Error("missing field 'patent_id'");
  r.patent_id = obj["patent_id"].get<std::string>();
  r.inventors = string_set(obj, "inventors");
  r.owners = string_set(obj, "owners");
  r.ipc_codes = string_set(obj, "ipc_codes");
  if (r.inventors.empty() && r.owners.empty()) throw Error("record names neither inventors nor owners");
  if (!obj.contains("forward_citations")) throw Error("missing field 'forward_citations'");
  const json& cit = obj["forward_citations"];
  if (!cit.is_number_integer() || cit.get<long long>() < 0)
    throw Error("'forward_citations' must be a non-negative integer");
  r.forward_citations = cit.get<Count>();
  if (!obj.contains("date") || !obj["date"].is_string()) throw Error("missing field 'date'");
  r.date = Date::parse(obj["date"].get<std::string>());
  return r;
}

const std::vector<std::string>& actors_of(const PatentRecord& r, Level level) {
  return level == Level::inventors ? r.inventors : r.owners;
}

bool in_window(const PatentRecord& r, const NetworkSpec& spec) {
  if (spec.from && r.date < *spec.from) return false;
  if (spec.to && *spec.to < r.date) return false;
  if (spec.ipc_prefixes.empty()) return true;
  for (const auto& code : r.ipc_codes)
    for (const auto& prefix : spec.ipc_prefixes)
      if (code.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

Corpus parse_patents(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto rec = parse_record(json::parse(line));
      if (!seen.insert(rec.patent_id).second) throw Error("duplicate patent_id '" + rec.patent_id + "'");
      corpus.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      corpus.issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
    } catch (const Error& e) {
      corpus.issues.push_back({line_no, e.what()});
    }
  }
  return corpus;
}

Corpus load_patents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path);
  return parse_patents(in);
}

std::string to_json_line(const PatentRecord& r) {
  json j = {{"patent_id", r.patent_id},   {"inventors", r.inventors},
            {"owners", r.owners},         {"ipc_codes", r.ipc_codes},
            {"forward_citations", r.forward_citations}, {"date", r.date.to_string()}};
  return j.dump();
}

Level parse_level(const std::string& name) {
  if (name == "inventors" || name == "inventor") return Level::inventors;
  if (name == "organizations" || name == "owners" || name == "organization") return Level::organizations;
  throw Error("unknown level '" + name + "' (expected inventors or organizations)");
}

const char* to_string(Level level) {
  return level == Level::inventors ? "inventors" : "organizations";
}

Network build_network(const Corpus& corpus, const NetworkSpec& spec) {
  if (spec.top_n < 2) throw Error("top_n must be at least 2");
  if (spec.from && spec.to && *spec.to < *spec.from) throw Error("date window is empty");
  Network net;
  for (const auto& r : corpus.records)
    if (in_window(r, spec)) net.patents.push_back(r);
  if (net.patents.empty()) throw Error("no patents inside the selected window");

  std::map<std::string, ActorInfo> scores;
  for (std::size_t idx = 0; idx < net.patents.size(); ++idx) {
    for (const auto& a : actors_of(net.patents[idx], spec.level)) {
      auto& info = scores[a];
      info.id = a;
      info.citations += net.patents[idx].forward_citations;
      ++info.patent_count;
      info.patents.push_back(idx);
    }
  }
  if (scores.size() < 2) throw Error("fewer than two actors after filtering");

  std::vector<ActorInfo> ranked;
  ranked.reserve(scores.size());
  for (auto& [id, info] : scores) ranked.push_back(std::move(info));
  std::sort(ranked.begin(), ranked.end(), [](const ActorInfo& a, const ActorInfo& b) {
    if (a.citations != b.citations) return a.citations > b.citations;
    if (a.patent_count != b.patent_count) return a.patent_count > b.patent_count;
    return a.id < b.id;
  });
  if (static_cast<Index>(ranked.size()) > spec.top_n) ranked.resize(spec.top_n);
  net.actors = std::move(ranked);

  std::unordered_map<std::string, Index> node_of;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < net.actors.size(); ++i) {
    node_of.emplace(net.actors[i].id, static_cast<Index>(i));
    labels.push_back(net.actors[i].id);
  }
  std::set<std::pair<Index, Index>> edges;
  std::vector<Index> present;
  for (const auto& r : net.patents) {
    present.clear();
    for (const auto& a : actors_of(r, spec.level)) {
      auto it = node_of.find(a);
      if (it != node_of.end()) present.push_back(it->second);
    }
    for (std::size_t x = 0; x < present.size(); ++x)
      for (std::size_t y = x + 1; y < present.size(); ++y)
        edges.emplace(std::min(present[x], present[y]), std::max(present[x], present[y]));
  }
  std::vector<std::pair<Index, Index>> edge_list(edges.begin(), edges.end());
  net.graph = Graph::from_edges(edge_list, std::move(labels));
  return net;
}

std::vector<std::vector<std::size_t>> cluster_patents(const Network& net, const Partition& p) {
  if (p.node_count() != static_cast<Index>(net.actors.size()))
    throw Error("partition does not match the network's actors");
  std::vector<std::set<std::size_t>> sets(p.block_count());
  for (std::size_t i = 0; i < net.actors.size(); ++i)
    for (std::size_t idx : net.actors[i].patents) sets[p[static_cast<Index>(i)]].insert(idx);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(sets.size());
  for (auto& s : sets) out.emplace_back(s.begin(), s.end());
  return out;
}

std::vector<double> cluster_citations(const Network& net, const Partition& p) {
  std::vector<double> totals;
  for (const auto& group : cluster_patents(net, p)) {
    double t = 0.0;
    for (std::size_t idx : group) t += static_cast<double>(net.patents[idx].forward_citations);
    totals.push_back(t);
  }
  return totals;
}

void write_network(const Network& net, const std::string& path) {
  json j;
  j["actors"] = json::array();
  for (const auto& a : net.actors) {
    json patents = json::array();
    for (std::size_t idx : a.patents) patents.push_back(net.patents[idx].patent_id);
    j["actors"].push_back({{"id", a.id},
                           {"citations", a.citations},
                           {"patent_count", a.patent_count},
                           {"patents", patents}});
  }
  j["edges"] = json::array();
  for (const auto& [u, v] : net.graph.edge_list()) j["edges"].push_back({u, v});
  j["patents"] = json::array();
  for (const auto& r : net.patents) j["patents"].push_back(json::parse(to_json_line(r)));
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(1) << '\n';
}

Network read_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open network metadata " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": invalid JSON: " + e.what());
  }
  Network net;
  std::unordered_map<std::string, std::size_t> patent_index;
  for (const auto& pj : j.at("patents")) {
    patent_index.emplace(pj.at("patent_id").get<std::string>(), net.patents.size());
    net.patents.push_back(parse_record(pj));
  }
  std::vector<std::string> labels;
  for (const auto& aj : j.at("actors")) {
    ActorInfo a;
    a.id = aj.at("id").get<std::string>();
    a.citations = aj.at("citations").get<Count>();
    a.patent_count = aj.at("patent_count").get<Count>();
    for (const auto& pid : aj.at("patents")) {
      auto it = patent_index.find(pid.get<std::string>());
      if (it == patent_index.end()) throw Error(path + ": actor " + a.id + " cites unknown patent");
      a.patents.push_back(it->second);
    }
    labels.push_back(a.id);
    net.actors.push_back(std::move(a));
  }
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<Index>(), e.at(1).get<Index>());
  net.graph = Graph::from_edges(edges, std::move(labels));
  return net;
}

}  // namespace mesonet
