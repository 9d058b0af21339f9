#pragma once

#include "enflow/model.hpp"

#include <string>
#include <utility>
#include <vector>

namespace enflow {

struct NetworkNode {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Directed edge; each one is a hidden state.
struct NetworkEdge {
  int from = 0;
  int to = 0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Directed graph whose edges are the hidden states, plus sensor positions
/// and the set of preferred edges used by the weighted transition rule.
struct NetworkModel {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkEdge> edges;
  std::vector<Point> sensors;
  std::vector<NetworkEdge> preferred;

  const NetworkNode& node(int id) const;
  /// State index of the directed edge (from, to); throws ModelError if absent.
  Eigen::Index edge_index(int from, int to) const;
  Point midpoint(Eigen::Index edge) const;
  /// Throws ModelError for dangling node references or duplicate ids/edges.
  void check() const;
};

enum class WeightMode { uniform, weighted };

/// a_ii = 0.5 and the remaining 0.5 split over successor edges in
/// proportion to their weights. Weighted mode: 20 for preferred successors,
/// 0 for the reverse edge, 1 otherwise. Uniform mode: 1 for every successor.
TransitionModel build_network_transitions(const NetworkModel& model, WeightMode mode);

/// min(0.99, 2 exp(-5 d)) with d the distance from sensor to edge midpoint.
double detection_probability(double distance);

/// One n x 2 model per sensor, columns [detected, not detected].
std::vector<ObservationModel> build_sensor_models(const NetworkModel& model);

/// The bundled 11-node, 28-edge, 7-sensor layout (same as
/// data/paper_network.json).
NetworkModel build_paper_network();

}  // namespace enflow
