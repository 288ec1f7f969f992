#include "qlstab/statelib.hpp"

#include <bit>
#include <sstream>

namespace qlstab {

namespace {

void require_n(int n, int lo) {
  if (n < lo) throw std::invalid_argument("qubit count too small: " + std::to_string(n));
  if (n > 20) throw std::invalid_argument("qubit count too large: " + std::to_string(n));
}

}  // namespace

NamedState ghz(int n) {
  require_n(n, 2);
  const Index d = Index(1) << n;
  Vector v = Vector::Zero(d);
  v(0) = v(d - 1) = 1.0 / std::sqrt(2.0);
  return {"ghz:" + std::to_string(n), v, n};
}

NamedState dicke(int n, int k) {
  require_n(n, 2);
  if (k < 0 || k > n) throw std::invalid_argument("dicke excitation out of range");
  const Index d = Index(1) << n;
  Vector v = Vector::Zero(d);
  for (Index i = 0; i < d; ++i)
    if (std::popcount(static_cast<unsigned long long>(i)) == k) v(i) = 1.0;
  v.normalize();
  return {"dicke:" + std::to_string(n) + ":" + std::to_string(k), v, n};
}

NamedState w(int n) {
  auto s = dicke(n, 1);
  s.label = "w:" + std::to_string(n);
  return s;
}

NamedState product(const std::string& bits) {
  require_n(static_cast<int>(bits.size()), 1);
  Index idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("product state needs a bit string");
    idx = 2 * idx + (c - '0');
  }
  const int n = static_cast<int>(bits.size());
  Vector v = Vector::Zero(Index(1) << n);
  v(idx) = 1.0;
  return {"product:" + bits, v, n};
}

NamedState state_by_name(const std::string& name) {
  std::vector<std::string> parts;
  std::stringstream ss(name);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto num = [&](std::size_t i) {
    if (i >= parts.size()) throw std::invalid_argument("malformed state name: " + name);
    std::size_t used = 0;
    int v = std::stoi(parts[i], &used);
    if (used != parts[i].size()) throw std::invalid_argument("malformed state name: " + name);
    return v;
  };
  if (parts.empty()) throw std::invalid_argument("empty state name");
  if (parts[0] == "ghz" && parts.size() == 2) return ghz(num(1));
  if ((parts[0] == "w" || parts[0] == "w-qls") && parts.size() == 2) return w(num(1));
  if (parts[0] == "dicke" && parts.size() == 3) return dicke(num(1), num(2));
  if (parts[0] == "product" && parts.size() == 2) return product(parts[1]);
  throw std::invalid_argument("unknown state: " + name);
}

bool is_ghz(const Vector& psi, int n, double tol) {
  if (psi.size() != (Index(1) << n)) return false;
  return std::abs(std::abs(ghz(n).vector.dot(psi)) - psi.norm()) < tol;
}

namespace pauli {

Matrix id() { return Matrix::Identity(2, 2); }
Matrix x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Matrix y() {
  Matrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Matrix z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Matrix lowering() { return ket_bra(2, 0, 1); }

Matrix ket_bra(int dim, Index row, Index col) {
  Matrix m = Matrix::Zero(dim, dim);
  m(row, col) = 1.0;
  return m;
}

Matrix string(const std::string& letters) {
  std::vector<Matrix> ops;
  for (char c : letters) {
    switch (c) {
      case 'i': case 'I': ops.push_back(id()); break;
      case 'x': case 'X': ops.push_back(x()); break;
      case 'y': case 'Y': ops.push_back(y()); break;
      case 'z': case 'Z': ops.push_back(z()); break;
      default: throw std::invalid_argument(std::string("bad Pauli letter: ") + c);
    }
  }
  if (ops.empty()) throw std::invalid_argument("empty Pauli string");
  return kron_all(ops);
}

}  // namespace pauli

LindbladGenerator Ghz3Controls::generator(bool flawed) const {
  return LindbladGenerator(MultipartiteSpace::qubits(3), {hc_x1, hc_xx23}, {d1, flawed ? d2_flawed : d2});
}

Ghz3Controls ghz3_qls_controls() {
  using pauli::ket_bra;
  Ghz3Controls c;
  c.hc_x1 = {Neighborhood{0}, pauli::x()};
  c.hc_xx23 = {Neighborhood{1, 2}, -kron(pauli::x(), pauli::x())};
  // |00><01| + |11><10|
  Matrix d = ket_bra(4, 0, 1) + ket_bra(4, 3, 2);
  c.d1 = {Neighborhood{0, 1}, d};
  c.d2 = {Neighborhood{1, 2}, ket_bra(4, 0, 1) + cplx(0, 1) * ket_bra(4, 3, 2)};
  c.d2_flawed = {Neighborhood{1, 2}, d};
  return c;
}

Matrix ghz_pair_dissipator() {
  // |00><10| + |11><01|
  return pauli::ket_bra(4, 0, 2) + pauli::ket_bra(4, 3, 1);
}

std::vector<LocalOperator> ghz_conditional_dissipators(int n) {
  require_n(n, 2);
  std::vector<LocalOperator> out;
  for (int k = 0; k + 1 < n; ++k) out.push_back({Neighborhood{k, k + 1}, ghz_pair_dissipator()});
  return out;
}

LindbladGenerator ghz_conditional_generator(int n) {
  return LindbladGenerator(MultipartiteSpace::qubits(n), {}, ghz_conditional_dissipators(n));
}

Matrix w_ladder() {
  const Matrix s = pauli::lowering();
  return kron(pauli::id(), s) - kron(s, pauli::id());
}

LindbladGenerator WControls::generator(int n) const {
  return LindbladGenerator(MultipartiteSpace::qubits(n), hamiltonian, dissipators);
}

WControls w_qls_controls(int n, bool nearest_neighbor_only) {
  require_n(n, 3);
  WControls c;
  const int m = n - 2;
  Matrix zsum = Matrix::Zero(Index(1) << m, Index(1) << m);
  for (int a = 0; a < m; ++a) zsum += embed(pauli::z(), {a}, MultipartiteSpace::qubits(m));
  c.p0 = 0.5 * (zsum - (n - 4) * Matrix::Identity(zsum.rows(), zsum.cols()));

  const Matrix xz = kron(pauli::x(), pauli::z());
  const Matrix zx = kron(pauli::z(), pauli::x());
  const int last = n - 1;
  for (int a = 1; a < last; ++a) {
    c.hamiltonian.push_back({Neighborhood{0, a}, 0.5 * xz});
    c.hamiltonian.push_back({Neighborhood{a, last}, -0.5 * zx});
  }
  if (n != 4) {
    c.hamiltonian.push_back({Neighborhood{0}, -0.5 * (n - 4) * pauli::x()});
    c.hamiltonian.push_back({Neighborhood{last}, 0.5 * (n - 4) * pauli::x()});
  }
  const Matrix d = w_ladder();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!nearest_neighbor_only || b == a + 1) c.dissipators.push_back({Neighborhood{a, b}, d});
  return c;
}

WtypeResult w_conditional(int n, const NeighborhoodStructure& nbhds) {
  require_n(n, 3);
  if (nbhds.space().total_dim() != (Index(1) << n)) throw DimensionError("neighborhoods do not match the W size");
  return construct_wtype(w(n).vector, nbhds);
}

}  // namespace qlstab
