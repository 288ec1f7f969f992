#pragma once

#include <random>

#include "qlstab/statelib.hpp"

namespace qlstab::testing {

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline Matrix random_hermitian(Index d, std::mt19937_64& rng) {
  Matrix a = random_matrix(d, d, rng);
  return 0.5 * (a + a.adjoint());
}

inline Matrix random_density(Index d, std::mt19937_64& rng) {
  Matrix a = random_matrix(d, d, rng);
  Matrix r = a * a.adjoint();
  return r / r.trace().real();
}

inline Matrix random_unitary(Index d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(d, d, rng));
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline Vector random_state(Index d, std::mt19937_64& rng) {
  Vector v = random_matrix(d, 1, rng);
  return v / v.norm();
}

// random quasi-local generator leaving psi invariant: dissipators and Hamiltonian drawn from the
// admissible operator spaces; `sparse` drops most coordinates so some draws fail to stabilize
inline LindbladGenerator random_invariant_generator(const Vector& psi, const NeighborhoodStructure& nb,
                                                    std::uint64_t seed, bool with_h, double keep = 1.0) {
  auto cs = build_constraints(psi, nb, SynthesisMode::Qls, std::nullopt, with_h);
  auto c = randomize(cs, 1.0, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<LocalOperator> ds;
  for (auto& d : c.dissipators)
    if (u(rng) < keep) ds.push_back(d);
  return LindbladGenerator(nb.space(), c.hamiltonian, ds);
}

}  // namespace qlstab::testing
