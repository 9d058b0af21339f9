#include "random_instances.hpp"

#include "enflow/simulator.hpp"

namespace enflow::fixtures {

Matrix random_stochastic(Rng& rng, int rows, int cols, double floor) {
  Matrix k(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) k(i, j) = floor + rng.uniform();
    k.row(i) /= k.row(i).sum();
  }
  return k;
}

Vector random_positive(Rng& rng, int size, double total) {
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = 0.2 + rng.uniform();
  return v * (total / v.sum());
}

Vector random_counts(Rng& rng, int size, int total) {
  Vector v = Vector::Zero(size);
  for (int k = 0; k < total; ++k) {
    v[static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(size))] += 1.0;
  }
  return v;
}

ChainProblem random_chain_problem(Rng& rng, int states, int horizon) {
  ChainProblem p;
  const double mass = 1.0 + 9.0 * rng.uniform();
  p.mu0 = Marginal(random_positive(rng, states, mass));
  p.muT = Marginal(random_positive(rng, states, mass));
  p.transition = TransitionModel(random_stochastic(rng, states, states), Normalization::renormalize_rows);
  p.horizon = horizon;
  return p;
}

ProblemInstance random_hmm_instance(Rng& rng, int states, int symbols, int horizon,
                                    int sensors) {
  const int particles = 5 + static_cast<int>(rng.next() % 16);
  Vector prior = random_counts(rng, states, particles);
  const TransitionModel a(random_stochastic(rng, states, states), Normalization::renormalize_rows);
  std::vector<ObservationModel> b;
  for (int s = 0; s < sensors; ++s) {
    b.emplace_back(random_stochastic(rng, states, symbols), Normalization::renormalize_rows);
  }
  const Marginal mu0(prior);
  return make_instance(mu0, a, b, simulate(mu0, a, b, horizon, rng.next()));
}

}  // namespace enflow::fixtures
