#pragma once

#include <string>

#include "qlstab/synthesis.hpp"

namespace qlstab {

struct NamedState {
  std::string label;
  Vector vector;
  int n = 0;

  MultipartiteSpace space() const { return MultipartiteSpace::qubits(n); }
};

NamedState ghz(int n);
NamedState w(int n);
NamedState dicke(int n, int k);
// computational basis state from a bit string such as "0101"
NamedState product(const std::string& bits);
// "ghz:4", "w:3", "dicke:4:2", "product:010"
NamedState state_by_name(const std::string& name);
bool is_ghz(const Vector& psi, int n, double tol = 1e-9);

namespace pauli {
Matrix id();
Matrix x();
Matrix y();
Matrix z();
// |0><1|, sends |1> to |0>
Matrix lowering();
Matrix ket_bra(int dim, Index row, Index col);
// "xzi..." -> product operator, one letter per qubit
Matrix string(const std::string& letters);
}  // namespace pauli

struct Ghz3Controls {
  LocalOperator hc_x1;    // sigma_x on qubit 1
  LocalOperator hc_xx23;  // -sigma_x sigma_x on qubits 2,3
  LocalOperator d1;
  LocalOperator d2;
  LocalOperator d2_flawed;

  LindbladGenerator generator(bool flawed = false) const;
};

Ghz3Controls ghz3_qls_controls();

// the two-qubit dissipator that cools a pair toward span{|00>,|11>} while commuting with X(x)X
Matrix ghz_pair_dissipator();
std::vector<LocalOperator> ghz_conditional_dissipators(int n);
LindbladGenerator ghz_conditional_generator(int n);

struct WControls {
  std::vector<LocalOperator> hamiltonian;
  std::vector<LocalOperator> dissipators;
  Matrix p0;  // acting on qubits 2..n-1

  LindbladGenerator generator(int n) const;
};

Matrix w_ladder();
WControls w_qls_controls(int n, bool nearest_neighbor_only = false);

WtypeResult w_conditional(int n, const NeighborhoodStructure& nbhds);

}  // namespace qlstab
