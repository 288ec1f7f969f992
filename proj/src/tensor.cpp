#include "qlstab/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace qlstab {

MultipartiteSpace::MultipartiteSpace(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("space needs at least one subsystem");
  for (int d : dims_)
    if (d < 2) throw DimensionError("subsystem dimension must be >= 2");
  total_ = 1;
  for (int d : dims_) total_ *= d;
}

Index MultipartiteSpace::dim_of(const Neighborhood& nb) const {
  Index d = 1;
  for (int a : nb) d *= dim(a);
  return d;
}

bool MultipartiteSpace::all_qubits() const {
  return std::all_of(dims_.begin(), dims_.end(), [](int d) { return d == 2; });
}

Neighborhood normalized(Neighborhood nb) {
  std::sort(nb.begin(), nb.end());
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  return nb;
}

NeighborhoodStructure::NeighborhoodStructure(const MultipartiteSpace& space,
                                             std::vector<Neighborhood> nbhds, FullNeighborhood full)
    : space_(space) {
  if (nbhds.empty()) throw NeighborhoodError("no neighborhoods given");
  std::set<int> covered;
  for (auto& nb : nbhds) {
    nb = normalized(nb);
    if (nb.empty()) throw NeighborhoodError("empty neighborhood");
    for (int a : nb) {
      if (a < 0 || a >= space.size()) throw NeighborhoodError("index out of range");
      covered.insert(a);
    }
    if (static_cast<int>(nb.size()) == space.size() && full == FullNeighborhood::Reject)
      throw NeighborhoodError("neighborhood equals the whole system");
    nbhds_.push_back(nb);
  }
  if (static_cast<int>(covered.size()) != space.size())
    throw NeighborhoodError("uncovered subsystem");
}

std::size_t NeighborhoodStructure::max_size() const {
  std::size_t m = 0;
  for (auto& nb : nbhds_) m = std::max(m, nb.size());
  return m;
}

int NeighborhoodStructure::containing(const Neighborhood& sub) const {
  for (int k = 0; k < count(); ++k)
    if (std::includes(nbhds_[k].begin(), nbhds_[k].end(), sub.begin(), sub.end())) return k;
  return -1;
}

NeighborhoodStructure NeighborhoodStructure::chain(const MultipartiteSpace& space, int width) {
  std::vector<Neighborhood> v;
  for (int a = 0; a + width <= space.size(); ++a) {
    Neighborhood nb(width);
    std::iota(nb.begin(), nb.end(), a);
    v.push_back(nb);
  }
  return NeighborhoodStructure(space, v, FullNeighborhood::Allow);
}

NeighborhoodStructure NeighborhoodStructure::all_pairs(const MultipartiteSpace& space) {
  std::vector<Neighborhood> v;
  for (int a = 0; a < space.size(); ++a)
    for (int b = a + 1; b < space.size(); ++b) v.push_back({a, b});
  return NeighborhoodStructure(space, v, FullNeighborhood::Allow);
}

Split::Split(const MultipartiteSpace& space, const Neighborhood& nb) {
  const int n = space.size();
  std::vector<bool> in(n, false);
  for (int a : nb) {
    if (a < 0 || a >= n) throw NeighborhoodError("index out of range");
    in[a] = true;
  }
  dl_ = space.dim_of(nb);
  dr_ = space.total_dim() / dl_;
  table_.assign(static_cast<std::size_t>(space.total_dim()), 0);
  std::vector<int> digit(n, 0);
  for (Index i = 0; i < space.total_dim(); ++i) {
    Index l = 0, r = 0;
    for (int a = 0; a < n; ++a) {
      if (in[a])
        l = l * space.dim(a) + digit[a];
      else
        r = r * space.dim(a) + digit[a];
    }
    table_[static_cast<std::size_t>(r * dl_ + l)] = i;
    for (int a = n - 1; a >= 0; --a) {
      if (++digit[a] < space.dim(a)) break;
      digit[a] = 0;
    }
  }
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_all(const std::vector<Matrix>& ops) {
  Matrix out = Matrix::Identity(1, 1);
  for (auto& op : ops) out = kron(out, op);
  return out;
}

Matrix embed(const Matrix& op, const Neighborhood& nb, const MultipartiteSpace& space) {
  Split s(space, normalized(nb));
  if (op.rows() != s.local_dim() || op.cols() != s.local_dim())
    throw DimensionError("operator does not match neighborhood dimension");
  const Index d = space.total_dim();
  Matrix out = Matrix::Zero(d, d);
  for (Index r = 0; r < s.rest_dim(); ++r)
    for (Index j = 0; j < s.local_dim(); ++j)
      for (Index i = 0; i < s.local_dim(); ++i) out(s.at(i, r), s.at(j, r)) = op(i, j);
  return out;
}

Matrix partial_trace(const Matrix& x, const Neighborhood& keep, const MultipartiteSpace& space) {
  if (x.rows() != space.total_dim() || x.cols() != space.total_dim())
    throw DimensionError("operator does not match space dimension");
  Split s(space, normalized(keep));
  Matrix out = Matrix::Zero(s.local_dim(), s.local_dim());
  for (Index r = 0; r < s.rest_dim(); ++r)
    for (Index j = 0; j < s.local_dim(); ++j)
      for (Index i = 0; i < s.local_dim(); ++i) out(i, j) += x(s.at(i, r), s.at(j, r));
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, const Neighborhood& keep,
                              const MultipartiteSpace& space) {
  return DensityOperator(partial_trace(rho.matrix(), keep, space));
}

Matrix reshape_local(const Vector& psi, const Neighborhood& nb, const MultipartiteSpace& space) {
  if (psi.size() != space.total_dim()) throw DimensionError("vector does not match space");
  Split s(space, normalized(nb));
  Matrix out(s.local_dim(), s.rest_dim());
  for (Index r = 0; r < s.rest_dim(); ++r)
    for (Index l = 0; l < s.local_dim(); ++l) out(l, r) = psi(s.at(l, r));
  return out;
}

double hermiticity_defect(const Matrix& x) { return (x - x.adjoint()).norm(); }

Subspace Subspace::span(const Matrix& columns, double tol) {
  if (columns.cols() == 0) return zero(columns.rows());
  Eigen::BDCSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index rank = 0;
  const double smax = s.size() ? s(0) : 0.0;
  if (smax > 1e3 * std::numeric_limits<double>::epsilon())
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > tol * smax) ++rank;
  return from_orthonormal(svd.matrixU().leftCols(rank));
}

Subspace Subspace::from_orthonormal(Matrix basis) {
  Subspace s;
  s.basis_ = std::move(basis);
  return s;
}

Subspace support(const Matrix& rho, double tol) {
  if (rho.rows() != rho.cols()) throw DimensionError("support of a non-square matrix");
  const double scale = std::max(1.0, rho.norm());
  if (hermiticity_defect(rho) > 1e-8 * scale) throw NotHermitian("support needs a Hermitian operator");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const auto& ev = es.eigenvalues();
  const double lmax = ev.size() ? ev(ev.size() - 1) : 0.0;
  std::vector<Index> keep;
  if (lmax > 1e3 * std::numeric_limits<double>::epsilon())
    for (Index i = ev.size() - 1; i >= 0; --i)
      if (ev(i) > tol * lmax) keep.push_back(i);
  Matrix b(rho.rows(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) b.col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]);
  return Subspace::from_orthonormal(std::move(b));
}

Subspace complement(const Subspace& v) {
  const Index d = v.ambient(), r = v.dim();
  if (r == 0) return Subspace::full(d);
  Eigen::HouseholderQR<Matrix> qr(v.basis());
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return Subspace::from_orthonormal(q.rightCols(d - r));
}

Subspace intersect(const std::vector<Subspace>& vs, double tol) {
  if (vs.empty()) throw std::invalid_argument("intersection of an empty family");
  const Index d = vs.front().ambient();
  Matrix m = Matrix::Zero(d, d);
  for (auto& v : vs) {
    if (v.ambient() != d) throw DimensionError("subspaces live in different spaces");
    m += Matrix::Identity(d, d) - v.projector();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i)
    if (es.eigenvalues()(i) < tol) keep.push_back(i);
  Matrix b(d, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) b.col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]);
  return Subspace::from_orthonormal(std::move(b));
}

Subspace difference(const Subspace& v1, const Subspace& v2, double tol) {
  if (v1.ambient() != v2.ambient()) throw DimensionError("subspaces live in different spaces");
  if (v1.dim() == 0 || v2.dim() == 0) return v1;
  Matrix overlap = v2.basis().adjoint() * v1.basis();
  Matrix n = kernel(overlap, std::sqrt(tol));
  return Subspace::from_orthonormal(v1.basis() * n);
}

Subspace join(const Subspace& v1, const Subspace& v2, double tol) {
  Matrix c(v1.ambient(), v1.dim() + v2.dim());
  c << v1.basis(), v2.basis();
  return Subspace::span(c, tol);
}

Subspace extend(const Subspace& local, const Neighborhood& nb, const MultipartiteSpace& space) {
  Split s(space, normalized(nb));
  if (local.ambient() != s.local_dim()) throw DimensionError("local subspace does not match neighborhood");
  const Index r = local.dim();
  Matrix b = Matrix::Zero(space.total_dim(), r * s.rest_dim());
  for (Index q = 0; q < r; ++q)
    for (Index rr = 0; rr < s.rest_dim(); ++rr)
      for (Index l = 0; l < s.local_dim(); ++l) b(s.at(l, rr), q * s.rest_dim() + rr) = local.basis()(l, q);
  return Subspace::from_orthonormal(std::move(b));
}

bool contains(const Subspace& v, const Vector& x, double tol) {
  Vector res = x - v.basis() * (v.basis().adjoint() * x);
  return res.norm() <= tol * std::max(1.0, x.norm());
}

bool contains(const Subspace& v, const Subspace& w, double tol) {
  if (w.dim() == 0) return true;
  Matrix res = w.basis() - v.basis() * (v.basis().adjoint() * w.basis());
  return res.norm() <= tol * std::sqrt(static_cast<double>(w.dim()));
}

bool equal(const Subspace& v, const Subspace& w, double tol) {
  return v.dim() == w.dim() && contains(v, w, tol) && contains(w, v, tol);
}

DensityOperator::DensityOperator(Matrix rho, double tol) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw DimensionError("density operator must be square");
  if (hermiticity_defect(rho_) > tol) throw NotDensity("density operator is not Hermitian");
  if (std::abs(rho_.trace() - cplx(1.0)) > tol) throw NotDensity("density operator trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().size() && es.eigenvalues()(0) < -tol) throw NotDensity("density operator is not positive");
}

DensityOperator DensityOperator::pure(const Vector& psi) {
  Vector u = psi / psi.norm();
  return DensityOperator(u * u.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(Index d) {
  return DensityOperator(Matrix::Identity(d, d) / static_cast<double>(d));
}

}  // namespace qlstab
