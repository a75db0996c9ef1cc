#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "formation/constraints.hpp"

namespace formation {

// Directed task-dependency graph. Edge (i, j) exists iff some atom of agent i
// references agent j; self-edge (i, i) iff some atom of i depends on x_i only.
struct TaskGraph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;  // sorted, unique
  std::vector<std::vector<int>> out_neighbors;

  bool has_edge(int from, int to) const;
};

// Undirected communication graph without self-loops.
class CommGraph {
 public:
  CommGraph(int nodes, std::vector<std::pair<int, int>> edges);

  int nodes() const { return nodes_; }
  // Normalized (min, max), sorted, unique.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int node) const { return neighbors_[node]; }

 private:
  int nodes_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

// Disjoint node sets; each set sorted ascending, sets ordered by smallest
// member.
struct ClusterPartition {
  std::vector<std::vector<int>> clusters;

  int cluster_of(int node) const;
};

// One cluster whose induced communication subgraph is disconnected.
struct ClusterViolation {
  std::vector<int> cluster;
  std::vector<std::vector<int>> components;
};

struct CommunicationReport {
  std::vector<ClusterViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;  // 1-based agent labels
};

// Union-find with path halving and union by size.
class DisjointSets {
 public:
  explicit DisjointSets(int n);

  int find(int x);
  bool unite(int a, int b);

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

TaskGraph build_task_graph(std::span<const AgentConstraintSet> sets, int nodes);

// Connected components of the undirected closure of the task graph
// (self-edges ignored).
ClusterPartition maximal_clusters(const TaskGraph& g);

// Each cluster must induce a connected communication subgraph. Task-graph
// neighbors need not be communication neighbors.
CommunicationReport validate_communication(const CommGraph& c, const ClusterPartition& p);

// L = D - A.
Eigen::MatrixXi laplacian(const CommGraph& c);

// Graphviz export, 1-based labels.
std::string to_dot(const TaskGraph& g);
std::string to_dot(const CommGraph& c);

}  // namespace formation
