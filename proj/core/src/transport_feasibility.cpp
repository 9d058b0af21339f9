#include "enflow/transport_feasibility.hpp"

#include "enflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace enflow {
namespace {

// Dense residual graph: node 0 is the source, 1..n the rows, n+1..n+m the
// columns, n+m+1 the sink. Edmonds-Karp is plenty at desk scale.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes)
      : nodes_(nodes), capacity_(nodes * nodes, 0.0) {}

  void add_arc(std::size_t from, std::size_t to, double cap) {
    capacity_[from * nodes_ + to] += cap;
  }

  double max_flow(std::size_t source, std::size_t sink, double eps) {
    double total = 0.0;
    std::vector<std::size_t> parent(nodes_);
    for (;;) {
      std::fill(parent.begin(), parent.end(), nodes_);
      parent[source] = source;
      std::queue<std::size_t> frontier;
      frontier.push(source);
      while (!frontier.empty() && parent[sink] == nodes_) {
        const auto u = frontier.front();
        frontier.pop();
        for (std::size_t v = 0; v < nodes_; ++v) {
          if (parent[v] == nodes_ && capacity_[u * nodes_ + v] > eps) {
            parent[v] = u;
            frontier.push(v);
          }
        }
      }
      if (parent[sink] == nodes_) break;
      double push = std::numeric_limits<double>::infinity();
      for (auto v = sink; v != source; v = parent[v]) {
        push = std::min(push, capacity_[parent[v] * nodes_ + v]);
      }
      for (auto v = sink; v != source; v = parent[v]) {
        capacity_[parent[v] * nodes_ + v] -= push;
        capacity_[v * nodes_ + parent[v]] += push;
      }
      total += push;
    }
    return total;
  }

 private:
  std::size_t nodes_;
  std::vector<double> capacity_;
};

}  // namespace

double max_transportable_mass(const Matrix& support, const Vector& source,
                              const Vector& target) {
  if (support.rows() != source.size() || support.cols() != target.size()) {
    throw DimensionError("max_transportable_mass: shape mismatch");
  }
  const auto n = static_cast<std::size_t>(support.rows());
  const auto m = static_cast<std::size_t>(support.cols());
  const std::size_t sink = n + m + 1;
  FlowNetwork network(n + m + 2);
  const double total = source.sum();
  for (std::size_t i = 0; i < n; ++i) {
    if (source[i] > 0.0) network.add_arc(0, 1 + i, source[i]);
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (target[j] > 0.0) network.add_arc(1 + n + j, sink, target[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (support(i, j) > 0.0) network.add_arc(1 + i, 1 + n + j, 2.0 * total + 1.0);
    }
  }
  return network.max_flow(0, sink, 1e-15 * std::max(1.0, total));
}

bool transport_feasible(const Matrix& support, const Vector& source,
                        const Vector& target, double relative_tol) {
  const double total = source.sum();
  const double scale = std::max(1.0, total);
  if (std::abs(total - target.sum()) > kMassTolerance * scale) {
    return false;
  }
  return max_transportable_mass(support, source, target) >=
         total - relative_tol * scale;
}

}  // namespace enflow
