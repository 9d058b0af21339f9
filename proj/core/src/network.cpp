#include "enflow/network.hpp"

#include "enflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace enflow {

const NetworkNode& NetworkModel::node(int id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return n;
  }
  throw ModelError("network: unknown node " + std::to_string(id));
}

Eigen::Index NetworkModel::edge_index(int from, int to) const {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].from == from && edges[i].to == to) return static_cast<Eigen::Index>(i);
  }
  throw ModelError("network: no edge (" + std::to_string(from) + "," + std::to_string(to) + ")");
}

Point NetworkModel::midpoint(Eigen::Index edge) const {
  const auto& e = edges.at(static_cast<std::size_t>(edge));
  const auto& a = node(e.from);
  const auto& b = node(e.to);
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

void NetworkModel::check() const {
  std::set<int> ids;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second) throw ModelError("network: duplicate node " + std::to_string(n.id));
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (!ids.count(e.from) || !ids.count(e.to)) {
      throw ModelError("network: edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                       ") references a missing node");
    }
    if (e.from == e.to) throw ModelError("network: self-loop edges are not allowed");
    if (!seen.insert({e.from, e.to}).second) {
      throw ModelError("network: duplicate edge (" + std::to_string(e.from) + "," +
                       std::to_string(e.to) + ")");
    }
  }
  for (const auto& p : preferred) edge_index(p.from, p.to);
}

TransitionModel build_network_transitions(const NetworkModel& model, WeightMode mode) {
  model.check();
  const auto n = static_cast<Eigen::Index>(model.edges.size());
  std::set<std::pair<int, int>> preferred;
  for (const auto& p : model.preferred) preferred.insert({p.from, p.to});

  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ei = model.edges[static_cast<std::size_t>(i)];
    Vector w = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& ej = model.edges[static_cast<std::size_t>(j)];
      if (ej.from != ei.to) continue;
      if (mode == WeightMode::uniform) {
        w[j] = 1.0;
      } else if (ej.to == ei.from) {
        w[j] = 0.0;
      } else {
        w[j] = preferred.count({ej.from, ej.to}) ? 20.0 : 1.0;
      }
    }
    const double total = w.sum();
    if (!(total > 0.0)) {
      throw ModelError("network: edge (" + std::to_string(ei.from) + "," + std::to_string(ei.to) +
                       ") has no admissible successor");
    }
    a.row(i) = 0.5 * w.transpose() / total;
    a(i, i) = 0.5;
  }
  return TransitionModel(std::move(a));
}

double detection_probability(double distance) {
  return std::min(0.99, 2.0 * std::exp(-5.0 * distance));
}

std::vector<ObservationModel> build_sensor_models(const NetworkModel& model) {
  model.check();
  const auto n = static_cast<Eigen::Index>(model.edges.size());
  std::vector<ObservationModel> out;
  for (const auto& s : model.sensors) {
    Matrix b(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Point m = model.midpoint(i);
      const double p = detection_probability(std::hypot(m.x - s.x, m.y - s.y));
      b(i, 0) = p;
      b(i, 1) = 1.0 - p;
    }
    out.emplace_back(std::move(b));
  }
  return out;
}

NetworkModel build_paper_network() {
  NetworkModel model;
  model.nodes = {{1, 0.0, 0.0}, {2, 0.0, 1.0}, {3, 0.6, 0.2}, {4, 0.7, 1.0},
                 {5, 1.2, 0.5}, {6, 1.4, 0.0}, {7, 1.5, 1.1}, {8, 2.0, 0.4},
                 {9, 2.1, 1.0}, {10, 2.6, 0.1}, {11, 2.7, 0.9}};
  const std::pair<int, int> links[] = {{1, 2}, {1, 3}, {2, 4}, {3, 5},  {3, 6},
                                       {4, 7}, {4, 5}, {5, 7}, {5, 8},  {6, 8},
                                       {7, 9}, {8, 10}, {9, 11}, {10, 11}};
  for (const auto& [a, b] : links) {
    model.edges.push_back({a, b});
    model.edges.push_back({b, a});
  }
  model.sensors = {{0.3, 0.1}, {0.35, 1.0}, {0.9, 0.35}, {1.3, 0.8},
                   {1.7, 0.2}, {2.1, 0.7},  {2.65, 0.5}};
  model.preferred = {{1, 3}, {3, 5}, {5, 8}, {8, 10}, {10, 11}, {11, 9}, {9, 7}};
  return model;
}

}  // namespace enflow
