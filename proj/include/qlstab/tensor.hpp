#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlstab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// subsystem indices are zero-based in the library, one-based only at the JSON boundary
using Neighborhood = std::vector<int>;

inline constexpr double kDefaultTol = 1e-9;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NeighborhoodError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotHermitian : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NotDensity : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class MultipartiteSpace {
 public:
  MultipartiteSpace() = default;
  explicit MultipartiteSpace(std::vector<int> dims);
  static MultipartiteSpace qubits(int n) { return MultipartiteSpace(std::vector<int>(n, 2)); }

  int size() const { return static_cast<int>(dims_.size()); }
  int dim(int a) const { return dims_.at(a); }
  const std::vector<int>& dims() const { return dims_; }
  Index total_dim() const { return total_; }
  Index dim_of(const Neighborhood& nb) const;
  bool all_qubits() const;

  bool operator==(const MultipartiteSpace& o) const { return dims_ == o.dims_; }

 private:
  std::vector<int> dims_;
  Index total_ = 1;
};

enum class FullNeighborhood { Reject, Allow };

class NeighborhoodStructure {
 public:
  NeighborhoodStructure() = default;
  NeighborhoodStructure(const MultipartiteSpace& space, std::vector<Neighborhood> nbhds,
                        FullNeighborhood full = FullNeighborhood::Reject);

  const MultipartiteSpace& space() const { return space_; }
  const std::vector<Neighborhood>& list() const { return nbhds_; }
  int count() const { return static_cast<int>(nbhds_.size()); }
  const Neighborhood& operator[](int k) const { return nbhds_.at(k); }
  std::size_t max_size() const;
  // smallest k whose neighborhood contains `sub`, or -1
  int containing(const Neighborhood& sub) const;

  static NeighborhoodStructure chain(const MultipartiteSpace& space, int width = 2);
  static NeighborhoodStructure all_pairs(const MultipartiteSpace& space);

 private:
  MultipartiteSpace space_;
  std::vector<Neighborhood> nbhds_;
};

// index bookkeeping for H = H_N (x) H_rest; full index of (local l, rest r) is at(l, r)
class Split {
 public:
  Split(const MultipartiteSpace& space, const Neighborhood& nb);
  Index local_dim() const { return dl_; }
  Index rest_dim() const { return dr_; }
  Index at(Index l, Index r) const { return table_[static_cast<std::size_t>(r * dl_ + l)]; }

 private:
  Index dl_ = 1, dr_ = 1;
  std::vector<Index> table_;
};

Neighborhood normalized(Neighborhood nb);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix kron_all(const std::vector<Matrix>& ops);

Matrix embed(const Matrix& op, const Neighborhood& nb, const MultipartiteSpace& space);
Matrix partial_trace(const Matrix& x, const Neighborhood& keep, const MultipartiteSpace& space);
// |psi> reshaped as d_N x d_rest
Matrix reshape_local(const Vector& psi, const Neighborhood& nb, const MultipartiteSpace& space);

double hermiticity_defect(const Matrix& x);

// orthonormal basis of the null space of a, singular values <= threshold count as zero
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel(
    const Eigen::MatrixBase<Derived>& a, double threshold) {
  using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index c = a.cols();
  if (a.rows() == 0 || c == 0) return M::Identity(c, c);
  Eigen::BDCSVD<M> svd(a.derived(), Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++rank;
  return svd.matrixV().rightCols(c - rank);
}

class Subspace {
 public:
  Subspace() = default;
  // columns are taken as spanning vectors; rank cut at tol relative to the largest singular value
  static Subspace span(const Matrix& columns, double tol = kDefaultTol);
  static Subspace from_orthonormal(Matrix basis);
  static Subspace zero(Index ambient) { return from_orthonormal(Matrix(ambient, 0)); }
  static Subspace full(Index ambient) { return from_orthonormal(Matrix::Identity(ambient, ambient)); }

  Index dim() const { return basis_.cols(); }
  Index ambient() const { return basis_.rows(); }
  const Matrix& basis() const { return basis_; }
  Matrix projector() const { return basis_ * basis_.adjoint(); }
  bool empty() const { return dim() == 0; }

 private:
  Matrix basis_;
};

Subspace support(const Matrix& rho, double tol = kDefaultTol);
Subspace complement(const Subspace& v);
Subspace intersect(const std::vector<Subspace>& vs, double tol = kDefaultTol);
Subspace difference(const Subspace& v1, const Subspace& v2, double tol = kDefaultTol);
Subspace join(const Subspace& v1, const Subspace& v2, double tol = kDefaultTol);
// V (x) H_rest, V given in local coordinates of nb
Subspace extend(const Subspace& local, const Neighborhood& nb, const MultipartiteSpace& space);
bool contains(const Subspace& v, const Vector& x, double tol = 1e-8);
bool contains(const Subspace& v, const Subspace& w, double tol = 1e-8);
bool equal(const Subspace& v, const Subspace& w, double tol = 1e-8);

class DensityOperator {
 public:
  explicit DensityOperator(Matrix rho, double tol = 1e-8);
  static DensityOperator pure(const Vector& psi);
  static DensityOperator maximally_mixed(Index d);

  const Matrix& matrix() const { return rho_; }
  Index dim() const { return rho_.rows(); }
  double fidelity(const Vector& psi) const { return (psi.adjoint() * rho_ * psi)(0, 0).real(); }

 private:
  Matrix rho_;
};

DensityOperator partial_trace(const DensityOperator& rho, const Neighborhood& keep,
                              const MultipartiteSpace& space);

}  // namespace qlstab
