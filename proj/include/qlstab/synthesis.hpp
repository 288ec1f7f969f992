#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlstab/analysis.hpp"

namespace qlstab {

struct NotCompensable : std::runtime_error {
  NotCompensable(int k, const std::string& what) : std::runtime_error(what), index(k) {}
  int index;
};
struct EmptyNullspace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// real-linear basis of operators on one neighborhood
struct QlOperatorBasis {
  Neighborhood support;
  std::vector<Matrix> hermitian;  // orthonormal Hermitian basis, d_N^2 elements
  std::vector<Matrix> complex;    // hermitian followed by i * hermitian, 2 d_N^2 elements
};

QlOperatorBasis operator_basis(const MultipartiteSpace& space, const Neighborhood& nb);
// single-factor orthonormal Hermitian basis: Paulis for d = 2, generalized Gell-Mann otherwise
std::vector<Matrix> hermitian_basis(int d);

enum class SynthesisMode { Qls, Conditional };

struct ConstraintSystem {
  SynthesisMode mode = SynthesisMode::Qls;
  MultipartiteSpace space;
  Vector target;
  std::optional<Subspace> h_prime;
  std::vector<QlOperatorBasis> bases;
  std::vector<RealMatrix> dissipator_constraints;  // stacked [P0; P'] in local coordinates
  std::vector<RealMatrix> dissipator_nullspace;    // columns: admissible coordinate vectors
  // Hamiltonian: joint over all supports, coordinates concatenated support by support
  std::vector<Neighborhood> hamiltonian_supports;
  std::vector<QlOperatorBasis> hamiltonian_bases;
  RealMatrix hamiltonian_constraint;
  RealMatrix hamiltonian_nullspace;
  bool with_hamiltonian = false;

  Index free_dissipator_dims() const;
};

ConstraintSystem build_constraints(const Vector& psi, const NeighborhoodStructure& nbhds, SynthesisMode mode,
                                   const std::optional<Subspace>& h_prime = std::nullopt,
                                   bool with_hamiltonian = true,
                                   const std::vector<Neighborhood>& hamiltonian_supports = {},
                                   double tol = kDefaultTol);

struct Candidate {
  std::vector<LocalOperator> hamiltonian;
  std::vector<LocalOperator> dissipators;
  std::uint64_t seed = 0;
};

Candidate randomize(const ConstraintSystem& cs, double gamma, std::uint64_t seed);
// seed of trial t derived from the master seed
std::uint64_t trial_seed(std::uint64_t master, int trial);

enum class Verified { Gas, ConditionallyAs, Failed, Infeasible };
std::string to_string(Verified v);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string method;  // "spectral" or "did"
  int multiplicity = 0;
  bool multiplicity_is_bound = false;
  double fidelity = 0.0;
  double gap = 0.0;
  std::vector<cplx> rightmost;
  int did_steps = 0;
  std::vector<Index> basin_dims;
  bool success = false;
};

struct SynthesisResult {
  LindbladGenerator generator;
  Verified verified = Verified::Failed;
  std::optional<Subspace> h_prime;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<TrialRecord> records;
  std::string diagnostic;
  std::optional<DqlsReport> dqls;
};

struct SynthesisOptions {
  double gamma = 1.0;
  int trials = 16;
  std::uint64_t seed = 42;
  double tol = kDefaultTol;
  int jobs = 1;
  bool force = false;             // run trials even when a no-go result applies
  bool stop_at_success = true;
  Index spectral_limit = 1024;    // largest superoperator size verified spectrally
  std::vector<Neighborhood> hamiltonian_supports;  // defaults to the neighborhoods
  std::optional<std::vector<LocalOperator>> fixed_hamiltonian;
  std::optional<LindbladGenerator> background;     // drift plus compensation, included in verification
};

// GAS check on a candidate, spectral below the size limit and through the DID above it
TrialRecord verify_gas(const LindbladGenerator& gen, const Vector& target, Index spectral_limit = 1024,
                       double tol = kDefaultTol);

struct ConditionalCheck {
  bool invariant_hp = false;       // H' invariant
  bool invariant_complement = false;
  double commutator = 0.0;         // max |[L_k, P']|
  GasReport restricted;
  bool conditionally_as = false;
};

ConditionalCheck verify_conditional(const LindbladGenerator& gen, const Vector& target, const Subspace& h_prime,
                                    double tol = 1e-8);

SynthesisResult synthesize_qls(const Vector& psi, const NeighborhoodStructure& nbhds,
                               const SynthesisOptions& opts = {});
SynthesisResult synthesize_conditional(const Vector& psi, const NeighborhoodStructure& nbhds,
                                       const std::optional<Subspace>& h_prime = std::nullopt,
                                       const SynthesisOptions& opts = {});

struct WtypeNeighborhood {
  Subspace wanted;    // supp(rho_N)
  Subspace unwanted;  // supp(Tr(P_w)) on the neighborhood
  bool strict = false;
};

struct WtypeResult {
  bool applicable = false;
  int failing_neighborhood = -1;
  Subspace h_prime;
  std::vector<LocalOperator> dissipators;
  std::vector<WtypeNeighborhood> neighborhoods;

  LindbladGenerator generator(const MultipartiteSpace& space) const {
    return LindbladGenerator(space, {}, dissipators);
  }
};

WtypeResult construct_wtype(const Vector& psi, const NeighborhoodStructure& nbhds, double tol = kDefaultTol);

struct Compensator {
  Neighborhood source;  // neighborhood of the drift terms it cancels
  LocalOperator op;     // tagged with `source` when it is quasi-local there, global otherwise
  bool quasi_local = false;
};

// throws NotCompensable or QlViolation
std::vector<Compensator> drift_compensate(const LindbladGenerator& drift, const Vector& psi,
                                          double tol = kDefaultTol);
LindbladGenerator with_compensation(const LindbladGenerator& drift, const std::vector<Compensator>& comp);

}  // namespace qlstab
