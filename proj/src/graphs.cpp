#include "formation/graphs.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "formation/errors.hpp"

namespace formation {

namespace {

void check_node(int node, int nodes) {
  if (node < 0 || node >= nodes) {
    throw ConfigError(fmt::format("node {} out of range [1, {}]", node + 1, nodes));
  }
}

std::vector<int> one_based(const std::vector<int>& nodes) {
  std::vector<int> out(nodes);
  for (auto& n : out) ++n;
  return out;
}

}  // namespace

bool TaskGraph::has_edge(int from, int to) const {
  return std::binary_search(edges.begin(), edges.end(), std::pair{from, to});
}

CommGraph::CommGraph(int nodes, std::vector<std::pair<int, int>> edges)
    : nodes_(nodes), neighbors_(static_cast<std::size_t>(std::max(nodes, 0))) {
  if (nodes < 1) throw ConfigError("communication graph needs at least one node");
  for (auto& [a, b] : edges) {
    check_node(a, nodes);
    check_node(b, nodes);
    if (a == b) throw ConfigError(fmt::format("self-loop on agent {}", a + 1));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [a, b] : edges_) {
    neighbors_[a].push_back(b);
    neighbors_[b].push_back(a);
  }
  for (auto& n : neighbors_) std::sort(n.begin(), n.end());
}

int ClusterPartition::cluster_of(int node) const {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (std::binary_search(clusters[c].begin(), clusters[c].end(), node)) {
      return static_cast<int>(c);
    }
  }
  return -1;
}

std::string CommunicationReport::describe() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    std::vector<std::string> parts;
    for (const auto& comp : v.components) {
      parts.push_back(fmt::format("{{{}}}", fmt::join(one_based(comp), ",")));
    }
    out += fmt::format("cluster {{{}}} is not connected in the communication graph; "
                       "components: {}\n",
                       fmt::join(one_based(v.cluster), ","), fmt::join(parts, " "));
  }
  return out;
}

DisjointSets::DisjointSets(int n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int DisjointSets::find(int x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool DisjointSets::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return true;
}

TaskGraph build_task_graph(std::span<const AgentConstraintSet> sets, int nodes) {
  if (nodes < 1) throw ConfigError("task graph needs at least one node");
  TaskGraph g;
  g.nodes = nodes;
  for (const auto& set : sets) {
    check_node(set.owner(), nodes);
    for (const auto& atom : set.atoms()) {
      const auto refs = atom.referenced_agents();
      if (refs.empty()) g.edges.emplace_back(set.owner(), set.owner());
      for (int j : refs) {
        check_node(j, nodes);
        g.edges.emplace_back(set.owner(), j);
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.out_neighbors.assign(nodes, {});
  for (const auto& [i, j] : g.edges) g.out_neighbors[i].push_back(j);
  return g;
}

namespace {

ClusterPartition components(DisjointSets& ds, const std::vector<int>& members) {
  std::map<int, std::vector<int>> by_root;
  for (int v : members) by_root[ds.find(v)].push_back(v);
  ClusterPartition p;
  for (auto& [root, nodes] : by_root) {
    std::sort(nodes.begin(), nodes.end());
    p.clusters.push_back(std::move(nodes));
  }
  std::sort(p.clusters.begin(), p.clusters.end());
  return p;
}

}  // namespace

ClusterPartition maximal_clusters(const TaskGraph& g) {
  DisjointSets ds(g.nodes);
  for (const auto& [i, j] : g.edges) {
    if (i != j) ds.unite(i, j);
  }
  std::vector<int> all(g.nodes);
  std::iota(all.begin(), all.end(), 0);
  return components(ds, all);
}

CommunicationReport validate_communication(const CommGraph& c, const ClusterPartition& p) {
  CommunicationReport report;
  for (const auto& cluster : p.clusters) {
    if (cluster.size() <= 1) continue;
    DisjointSets ds(c.nodes());
    for (const auto& [a, b] : c.edges()) {
      if (std::binary_search(cluster.begin(), cluster.end(), a) &&
          std::binary_search(cluster.begin(), cluster.end(), b)) {
        ds.unite(a, b);
      }
    }
    auto parts = components(ds, cluster);
    if (parts.clusters.size() > 1) {
      report.violations.push_back({cluster, std::move(parts.clusters)});
    }
  }
  return report;
}

Eigen::MatrixXi laplacian(const CommGraph& c) {
  Eigen::MatrixXi l = Eigen::MatrixXi::Zero(c.nodes(), c.nodes());
  for (const auto& [a, b] : c.edges()) {
    l(a, b) -= 1;
    l(b, a) -= 1;
    l(a, a) += 1;
    l(b, b) += 1;
  }
  return l;
}

std::string to_dot(const TaskGraph& g) {
  std::string out = "digraph task_dependency {\n";
  for (int i = 0; i < g.nodes; ++i) out += fmt::format("  {};\n", i + 1);
  for (const auto& [i, j] : g.edges) out += fmt::format("  {} -> {};\n", i + 1, j + 1);
  out += "}\n";
  return out;
}

std::string to_dot(const CommGraph& c) {
  std::string out = "graph communication {\n";
  for (int i = 0; i < c.nodes(); ++i) out += fmt::format("  {};\n", i + 1);
  for (const auto& [a, b] : c.edges()) out += fmt::format("  {} -- {};\n", a + 1, b + 1);
  out += "}\n";
  return out;
}

}  // namespace formation
