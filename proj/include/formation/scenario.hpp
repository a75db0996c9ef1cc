#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formation/constraints.hpp"
#include "formation/errors.hpp"
#include "formation/graphs.hpp"
#include "formation/schedule.hpp"

namespace formation {

inline constexpr int kScenarioFormatVersion = 1;

struct Box {
  Vector lower;
  Vector upper;

  bool operator==(const Box& o) const { return lower == o.lower && upper == o.upper; }
};

struct IntegrationSettings {
  double dt = 0.01;
  double horizon = 300.0;
  double sample_every = 0.1;

  bool operator==(const IntegrationSettings&) const = default;
};

// Opt-in ball c_aux - |x_i|^2 > 0 appended to every agent's constraints.
struct AuxiliarySettings {
  bool enabled = false;
  std::optional<double> c_aux;  // defaults to (10 * scene extent)^2

  bool operator==(const AuxiliarySettings&) const = default;
};

struct Scenario {
  std::string name;
  int agents = 0;
  int dim = 0;
  std::vector<ConstraintAtom> constraints;
  std::vector<std::pair<int, int>> communication;  // zero-based agent pairs
  GainSchedule gains;
  IntegrationSettings integration;
  std::optional<Vector> initial_positions;  // stacked, size agents * dim
  std::optional<Box> init_box;              // estimate/position sampling box
  std::uint64_t seed = 1;
  AuxiliarySettings auxiliary;

  Layout layout() const { return {agents, dim}; }
  bool operator==(const Scenario& o) const;
};

// Largest |anchor| + radius over all atoms (at least 1).
double scene_extent(const Scenario& s);
double default_c_aux(const Scenario& s);

// Axis-aligned box around all FixedPoint anchors with each half-width
// doubled. Half-widths below 1 are raised to 1 before doubling so the box
// always has volume (a single anchor gives a 4x4 box around it).
Box default_init_box(const Scenario& s);
Box effective_init_box(const Scenario& s);

// Per-agent constraint sets in agent order, auxiliary atoms included.
std::vector<AgentConstraintSet> constraint_sets(const Scenario& s);

// Every problem found, with field paths. Graph checks: each task-graph
// cluster must be connected in the communication graph; with
// `require_single_cluster` the task graph must also form one cluster.
std::vector<Issue> validate(const Scenario& s, bool require_single_cluster = false);

// Scenario file format (JSON, format_version 1). Agent indices are 1-based
// in the file. Throws ScenarioError listing every issue.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);

// "A".."E" and "Example1".
Scenario builtin_case(std::string_view name);
const std::vector<std::string>& builtin_case_names();

// Validated scenario with derived structures, ready for simulation.
struct Problem {
  Scenario scenario;
  Layout layout;
  std::vector<AgentConstraintSet> sets;
  TaskGraph task_graph;
  CommGraph comm_graph;
  ClusterPartition clusters;
  Eigen::MatrixXi laplacian;
};

// Throws ScenarioError. Multiple clusters are refused unless allowed.
Problem compile(const Scenario& s, bool allow_multiple_clusters = false);

// Sub-scenario for one cluster; agents renumbered in ascending order of the
// original indices. Communication edges leaving the cluster are dropped.
Scenario restrict_to_cluster(const Scenario& s, const std::vector<int>& cluster);

}  // namespace formation
