#pragma once

#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace haai::test {

/// Just enough DOT to check exported reactor graphs.
struct DotGraph {
  struct Node {
    std::string id, label, shape, attrs;
    std::vector<std::string> clusters;  // enclosing cluster labels, outermost first
  };
  struct Edge {
    std::string from, to, attrs;
    bool dashed() const { return attrs.find("style=dashed") != std::string::npos; }
  };
  std::map<std::string, Node> nodes;
  std::vector<Edge> edges;
  std::size_t cluster_count = 0;

  static DotGraph parse(const std::string& text) {
    static const std::regex node_re(R"re(^\s*(n\d+) \[label="((?:[^"\\]|\\.)*)", shape=(\w+)(.*)\];$)re");
    static const std::regex edge_re(R"re(^\s*(n\d+) -> (n\d+)(?: \[(.*)\])?;$)re");
    static const std::regex label_re(R"re(^\s*label="((?:[^"\\]|\\.)*)";$)re");
    DotGraph g;
    std::vector<std::string> stack;
    std::istringstream in(text);
    std::string line;
    bool pending_cluster = false;
    std::smatch m;
    while (std::getline(in, line)) {
      if (line.find("subgraph cluster_") != std::string::npos) {
        ++g.cluster_count;
        stack.push_back("");
        pending_cluster = true;
      } else if (pending_cluster && std::regex_match(line, m, label_re)) {
        stack.back() = m[1];
        pending_cluster = false;
      } else if (std::regex_match(line, m, node_re)) {
        g.nodes[m[1]] = {m[1], m[2], m[3], m[4], stack};
      } else if (std::regex_match(line, m, edge_re)) {
        g.edges.push_back({m[1], m[2], m[3]});
      } else if (line.find('}') != std::string::npos && !stack.empty()) {
        stack.pop_back();
      }
    }
    return g;
  }

  std::vector<const Node*> in_cluster(const std::string& label) const {
    std::vector<const Node*> out;
    for (const auto& [id, n] : nodes) {
      for (const auto& c : n.clusters) {
        if (c == label) {
          out.push_back(&n);
          break;
        }
      }
    }
    return out;
  }

  std::size_t count_clusters(const std::string& label) const {
    std::set<std::vector<std::string>> seen;
    for (const auto& [id, n] : nodes) {
      for (std::size_t i = 0; i < n.clusters.size(); ++i) {
        if (n.clusters[i] == label) seen.insert({n.clusters.begin(), n.clusters.begin() + static_cast<long>(i) + 1});
      }
    }
    return seen.size();
  }

  /// Kahn's algorithm over the edges that are not dashed.
  bool acyclic_without_dashed() const {
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [id, n] : nodes) indeg[id] = 0;
    for (const auto& e : edges) {
      if (e.dashed()) continue;
      adj[e.from].push_back(e.to);
      ++indeg[e.to];
    }
    std::vector<std::string> ready;
    for (const auto& [id, d] : indeg) {
      if (d == 0) ready.push_back(id);
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
      std::string v = ready.back();
      ready.pop_back();
      ++seen;
      for (const auto& w : adj[v]) {
        if (--indeg[w] == 0) ready.push_back(w);
      }
    }
    return seen == indeg.size();
  }
};

}  // namespace haai::test
