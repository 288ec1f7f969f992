#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qlstab/tensor.hpp"

namespace qlstab {

struct NotInvariant : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QlViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// operator acting on `support` (nullopt: acts globally, local == full)
struct LocalOperator {
  std::optional<Neighborhood> support;
  Matrix local;

  Matrix full(const MultipartiteSpace& space) const;
};

class LindbladGenerator {
 public:
  LindbladGenerator() = default;
  LindbladGenerator(MultipartiteSpace space, std::vector<LocalOperator> hamiltonian,
                    std::vector<LocalOperator> lindblads);

  const MultipartiteSpace& space() const { return space_; }
  Index dim() const { return space_.total_dim(); }
  const std::vector<LocalOperator>& hamiltonian_terms() const { return hterms_; }
  const std::vector<LocalOperator>& lindblad_terms() const { return lterms_; }
  const Matrix& hamiltonian() const { return h_; }
  const std::vector<Matrix>& lindblads() const { return ls_; }

  LindbladGenerator scaled(double lambda) const;
  LindbladGenerator merged(const LindbladGenerator& other) const;
  // every tagged term sits inside some neighborhood of `nb`
  bool quasi_local(const NeighborhoodStructure& nb) const;

 private:
  MultipartiteSpace space_;
  std::vector<LocalOperator> hterms_, lterms_;
  Matrix h_;
  std::vector<Matrix> ls_;
};

// column-stacking superoperator, vec(L[X]) = Lhat vec(X)
Matrix liouvillian(const Matrix& h, const std::vector<Matrix>& ls);
Matrix liouvillian(const LindbladGenerator& gen);
// same generator restricted to B(V) for an invariant subspace with orthonormal basis V
Matrix restricted_liouvillian(const Matrix& h, const std::vector<Matrix>& ls, const Matrix& v);
Matrix evaluate(const Matrix& h, const std::vector<Matrix>& ls, const Matrix& x);
Matrix evaluate(const LindbladGenerator& gen, const Matrix& x);
double spectral_norm(const Matrix& m);

struct InvarianceReport {
  bool invariant = false;
  std::vector<cplx> ell;            // <psi|L_k|psi>
  std::vector<double> residuals;    // |L_k psi - ell_k psi|
  double h = 0.0;                   // <psi|H~|psi>
  double hamiltonian_residual = 0.0;
  std::string first_violation;
};

InvarianceReport is_invariant(const LindbladGenerator& gen, const Vector& psi, double tol = 1e-9);

struct StandardForm {
  LindbladGenerator generator;
  double h = 0.0;
  double certification = 0.0;  // max |L[X] - L~[X]| over probes
};

// throws NotInvariant
StandardForm standard_form(const LindbladGenerator& gen, const Vector& psi, double tol = 1e-9);

struct ZeroEigenspace {
  int multiplicity = 0;
  std::vector<Matrix> fixed_points;  // Hermitian; trace-normalized when the trace is not negligible
  std::vector<cplx> eigenvalues;     // full spectrum sorted by decreasing real part
  double threshold = 0.0;
  double norm = 0.0;
  double max_real_nonzero = -std::numeric_limits<double>::infinity();
  int marginal = 0;  // nonzero eigenvalues with Re > -threshold
};

// scale_floor: lower bound for the norm used in the zero threshold (restricted blocks of a larger generator)
ZeroEigenspace zero_eigenspace(const Matrix& lhat, double tol = 1e-8, double scale_floor = 0.0);

struct GasReport {
  bool gas = false;
  int multiplicity = 0;
  double fidelity = 0.0;
  double gap = 0.0;  // -max Re over nonzero eigenvalues
  int marginal = 0;
  std::vector<cplx> rightmost;  // up to ten
};

GasReport gas_report(const Matrix& lhat, const Vector& target, double tol = 1e-8);
GasReport gas_report(const LindbladGenerator& gen, const Vector& target, double tol = 1e-8);
// throws NotInvariant when the target is not invariant
bool is_gas(const LindbladGenerator& gen, const Vector& target, double tol = 1e-8);

}  // namespace qlstab
