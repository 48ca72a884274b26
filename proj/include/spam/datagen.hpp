#ifndef SPAM_DATAGEN_HPP
#define SPAM_DATAGEN_HPP

// Synthetic federated ridge-regression instances with controllable
// heterogeneity.
//
// Construction (deterministic in the seed):
//   A0   : d x d, entries N(0,1)            -> A = A0 A0^T        (shared)
//   B0_i : d x d, entries N(0,1)            -> B_i = s * B0_i B0_i^T  (per client)
//   A'_i = A + B_i
//   A_i  = A'_i + max(0, -lambda_min(A'_i)) * I   (PSD guard)
//   y_i  : entries N(0,1)
// where s = hetero_scale.  s = 0 collapses every client to the shared A, so
// the Hessian-similarity constant is exactly zero.
//
// All draws come from streams keyed by (seed, purpose, client index); matrix
// entries are filled row by row.  See rng.hpp for the exact N(0,1) transform.

#include "spam/problem.hpp"
#include "spam/rng.hpp"

#include <cstdint>
#include <stdexcept>

namespace spam {

struct GenConfig {
  uint64_t seed = 0;
  int n = 10;
  int d = 100;
  double lambda = 0.1;
  double hetero_scale = 1.0;
};

namespace detail {
inline Eigen::MatrixXd gaussian_matrix(int d, RandomStream& stream) {
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = stream.normal();
  return m;
}
}  // namespace detail

inline FedQuadProblem generate(const GenConfig& cfg) {
  if (cfg.n < 1 || cfg.d < 1) throw std::invalid_argument("generate: n and d must be positive");
  if (cfg.lambda < 0.0) throw std::invalid_argument("generate: lambda must be nonnegative");
  if (cfg.hetero_scale < 0.0) {
    throw std::invalid_argument("generate: hetero_scale must be nonnegative");
  }

  RandomStream design(cfg.seed, StreamPurpose::design, 0);
  const SymMatrix A = SymMatrix::gram(detail::gaussian_matrix(cfg.d, design));

  std::vector<ClientData> clients;
  clients.reserve(static_cast<size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    SymMatrix a_prime = A;
    if (cfg.hetero_scale > 0.0) {
      RandomStream perturb(cfg.seed, StreamPurpose::perturbation, static_cast<uint64_t>(i));
      const SymMatrix b = SymMatrix::gram(detail::gaussian_matrix(cfg.d, perturb))
                              .scaled(cfg.hetero_scale);
      a_prime = A + b;
    }
    const auto [lo, hi] = extreme_eigenvalues(a_prime);
    (void)hi;
    const double shift = std::max(0.0, -lo);
    const SymMatrix a = shift > 0.0 ? a_prime.plus_identity(shift) : a_prime;

    RandomStream targets(cfg.seed, StreamPurpose::targets, static_cast<uint64_t>(i));
    DenseVector y(cfg.d);
    for (int j = 0; j < cfg.d; ++j) y(j) = targets.normal();
    clients.push_back(ClientData{a, std::move(y)});
  }
  return FedQuadProblem(std::move(clients), cfg.lambda);
}

inline DenseVector generate_x0(uint64_t seed, int d) {
  if (d < 1) throw std::invalid_argument("generate_x0: d must be positive");
  RandomStream stream(seed, StreamPurpose::x0, 0);
  DenseVector x(d);
  for (int j = 0; j < d; ++j) x(j) = stream.normal();
  return x;
}

}  // namespace spam

#endif  // SPAM_DATAGEN_HPP
