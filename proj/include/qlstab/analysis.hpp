#pragma once

#include <string>
#include <vector>

#include "qlstab/generator.hpp"

namespace qlstab {

struct InvariancePrecondition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DqlsVerdict { Dqls, NotDqls };

struct DqlsReport {
  Subspace h0;
  std::vector<Subspace> local_supports;  // supp(rho_Nk), local coordinates
  std::vector<Subspace> extended;        // supp(rho_Nk) (x) I
  DqlsVerdict verdict = DqlsVerdict::NotDqls;
  Index d0 = 0;

  Subspace unwanted(const Vector& psi) const;  // H0 minus the target line
};

DqlsReport dqls_test(const Vector& psi, const NeighborhoodStructure& nbhds, double tol = kDefaultTol);

enum class DidOutcome { Completed, NotGas };

struct DidDecomposition {
  std::vector<Subspace> basins;  // H_S, T1, ..., Tq
  int steps = 0;
  DidOutcome outcome = DidOutcome::Completed;
  Subspace remainder;  // invariant remainder when NotGas

  std::vector<Index> basin_dims() const;
};

// throws InvariancePrecondition when hs is not invariant
DidDecomposition did(const Matrix& h, const std::vector<Matrix>& ls, const Subspace& hs, double tol = kDefaultTol);
DidDecomposition did(const LindbladGenerator& gen, const Subspace& hs, double tol = kDefaultTol);

struct CheckResult {
  bool pass = false;
  std::string reason;
};

CheckResult qls_necessary(const Vector& psi, const NeighborhoodStructure& nbhds, const Matrix& hc,
                          double tol = kDefaultTol);
CheckResult conditional_necessary(const Vector& psi, const NeighborhoodStructure& nbhds, const Subspace& h_prime,
                                  double tol = kDefaultTol);

enum class NogoVerdict { Blocked, Possible };

NogoVerdict nogo_ghz(int n, const NeighborhoodStructure& nbhds);

// +-1 eigenspace of a Pauli string
Subspace pauli_eigenspace(const std::string& letters, int eigenvalue);

}  // namespace qlstab
