#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "qlstab/dynamics.hpp"

using namespace qlstab;
using namespace qlstab::testing;

namespace {

double min_eig(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double fid(const Matrix& rho, const Vector& psi) { return psi.dot(rho * psi).real(); }

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("t = 0 returns the initial state") {
  std::mt19937_64 rng(51);
  auto g = ghz3_qls_controls().generator();
  Matrix rho = random_density(8, rng);
  auto e = evolve(g, rho, 0.0);
  CHECK((e.rho - rho).norm() == 0.0);
  CHECK_THROWS(evolve(g, rho, -1.0));
}

TEST_CASE("amplitude damping") {
  LindbladGenerator g(MultipartiteSpace::qubits(1), {}, {{Neighborhood{0}, pauli::lowering()}});
  Matrix one = Matrix::Zero(2, 2);
  one(1, 1) = 1.0;
  auto e = evolve(g, one, 10.0);
  CHECK(fid(e.rho, Vector::Unit(2, 0)) >= 1 - std::exp(-10.0) - 1e-6);
  CHECK(std::abs(e.rho(1, 1).real() - std::exp(-10.0)) < 1e-10);
  for (double t : {0.3, 1.0, 4.0}) CHECK(std::abs(evolve(g, one, t).rho(1, 1).real() - std::exp(-t)) < 1e-12);
}

TEST_CASE("GHZ3 fixture converges") {
  std::mt19937_64 rng(52);
  auto g = ghz3_qls_controls().generator();
  const double gap = gas_report(g, ghz(3).vector).gap;
  // horizon from the gap: infidelity prefactor is O(1), so ln(1e4)/gap reaches 1 - 1e-3 with margin
  const double horizon = std::log(1e4) / gap;
  Propagator p(g);
  for (int t = 0; t < 3; ++t) {
    Matrix rho0 = random_density(8, rng);
    CHECK(fid(evolve(p, rho0, horizon).rho, ghz(3).vector) >= 0.999);
    // at t = 50 the slow mode has decayed only by exp(-50 gap) ~ 8e-3
    const double f50 = fid(evolve(p, rho0, 50.0).rho, ghz(3).vector);
    CHECK(1 - f50 <= 2 * std::exp(-50 * gap));
    CHECK(f50 >= 0.99);
  }
}

TEST_CASE("semigroup, trace and positivity") {
  std::mt19937_64 rng(53);
  auto s = MultipartiteSpace::qubits(3);
  auto g = random_invariant_generator(w(3).vector, NeighborhoodStructure::chain(s), 54, true);
  Propagator p(g);
  for (int k = 0; k < 5; ++k) {
    Matrix rho = random_density(8, rng);
    const double a = 0.2 + 0.3 * k, b = 1.1;
    Matrix two = evolve(p, evolve(p, rho, a).rho, b).rho;
    CHECK((two - evolve(p, rho, a + b).rho).norm() < 1e-8);
    for (double t : {0.1, 1.0, 10.0}) {
      auto e = evolve(p, rho, t);
      CHECK(std::abs(e.raw_trace - 1.0) < 1e-7);
      CHECK(min_eig(e.rho) > -1e-7);
      CHECK(hermiticity_defect(e.rho) < 1e-14);
    }
  }
}

TEST_CASE("flawed fixture stays away from the target") {
  auto g = ghz3_qls_controls().generator(true);
  // the odd-parity GHZ partner
  Vector minus = Vector::Zero(8);
  minus(0) = 1 / std::sqrt(2.0);
  minus(7) = -1 / std::sqrt(2.0);
  Matrix rho = minus * minus.adjoint();
  auto e = evolve(g, rho, 200.0);
  MESSAGE("flawed fixture fidelity at t=200: " << fid(e.rho, ghz(3).vector));
  CHECK(fid(e.rho, ghz(3).vector) < 0.99);
}

TEST_CASE("conditional dynamics") {
  std::mt19937_64 rng(55);
  auto g = ghz_conditional_generator(3);
  auto hp = pauli_eigenspace("xxx", 1);
  auto perp = complement(hp);
  Matrix pp = hp.projector();
  Propagator p(g);
  for (double eps : {0.0, 0.01, 0.1, 0.3}) {
    Vector in = hp.basis() * random_state(4, rng);
    Vector out = perp.basis() * random_state(4, rng);
    Matrix rho0 = (1 - eps) * in * in.adjoint() + eps * out * out.adjoint();
    auto tr = trajectory(p, rho0, ghz(3).vector, log_times(400.0, 40));
    const double infid = 1 - tr.fidelities.back();
    CHECK(infid <= eps + 1e-6);
    double prev = -1;
    for (auto& r : tr.states) {
      const double w = (pp * r).trace().real();
      CHECK(w >= prev - 1e-9);
      prev = w;
    }
  }
  // W-type generator: weight on H' grows from any start
  auto s = MultipartiteSpace::qubits(3);
  auto wt = construct_wtype(w(3).vector, NeighborhoodStructure::chain(s));
  Propagator pw(wt.generator(s));
  Matrix pw_proj = wt.h_prime.projector();
  Matrix rho0 = random_density(8, rng);
  auto tr = trajectory(pw, rho0, w(3).vector, log_times(100.0, 40));
  double prev = -1;
  for (auto& r : tr.states) {
    const double wgt = (pw_proj * r).trace().real();
    CHECK(wgt >= prev - 1e-9);
    prev = wgt;
  }
}

TEST_CASE("trajectory output and convergence summary") {
  auto g = ghz3_qls_controls().generator();
  Matrix rho0 = DensityOperator::maximally_mixed(8).matrix();
  auto times = log_times(50.0, 40);
  CHECK(times.size() == 41);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(50.0));
  CHECK(times[1] == doctest::Approx(0.05));
  auto tr = trajectory(Propagator(g), rho0, ghz(3).vector, times);
  std::ostringstream os;
  tr.write_csv(os);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,fidelity,trace,min_eigenvalue\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 42);

  auto sum = convergence_report(g, ghz(3).vector, {rho0, Matrix(product("000").vector * product("000").vector.adjoint())}, 150.0);
  CHECK(sum.final_fidelities.size() == 2);
  for (double f : sum.final_fidelities) CHECK(f >= 0.999);
  CHECK(sum.rate > 0.0);
  CHECK_FALSE(sum.trace_drift);
}

TEST_CASE("fallback exponential agrees with the eigendecomposition") {
  std::mt19937_64 rng(56);
  auto g = ghz3_qls_controls().generator();
  Matrix l = liouvillian(g);
  Propagator eig(l), fb(l, 0.5);
  CHECK_FALSE(eig.uses_fallback());
  CHECK(fb.uses_fallback());
  Matrix rho = random_density(8, rng);
  for (double t : {0.5, 5.0, 20.0}) {
    auto a = evolve(eig, rho, t), b = evolve(fb, rho, t);
    CHECK((a.rho - b.rho).norm() < 1e-8);
    CHECK(b.fallback);
  }
}

}
