#include "qlstab/generator.hpp"

#include <algorithm>
#include <random>

namespace qlstab {

Matrix LocalOperator::full(const MultipartiteSpace& space) const {
  if (!support) {
    if (local.rows() != space.total_dim()) throw DimensionError("global operator has the wrong dimension");
    return local;
  }
  return embed(local, *support, space);
}

LindbladGenerator::LindbladGenerator(MultipartiteSpace space, std::vector<LocalOperator> hamiltonian,
                                     std::vector<LocalOperator> lindblads)
    : space_(std::move(space)), hterms_(std::move(hamiltonian)), lterms_(std::move(lindblads)) {
  const Index d = space_.total_dim();
  for (auto& t : hterms_)
    if (t.support) t.support = normalized(*t.support);
  for (auto& t : lterms_)
    if (t.support) t.support = normalized(*t.support);
  h_ = Matrix::Zero(d, d);
  for (auto& t : hterms_) h_ += t.full(space_);
  if (hermiticity_defect(h_) > 1e-10 * std::max(1.0, h_.norm())) throw NotHermitian("Hamiltonian is not Hermitian");
  h_ = 0.5 * (h_ + h_.adjoint());
  for (auto& t : lterms_) ls_.push_back(t.full(space_));
}

LindbladGenerator LindbladGenerator::scaled(double lambda) const {
  auto hs = hterms_;
  auto ls = lterms_;
  for (auto& t : hs) t.local *= lambda;
  for (auto& t : ls) t.local *= std::sqrt(lambda);
  return LindbladGenerator(space_, hs, ls);
}

LindbladGenerator LindbladGenerator::merged(const LindbladGenerator& other) const {
  if (!(space_ == other.space_)) throw DimensionError("merging generators on different spaces");
  auto hs = hterms_;
  auto ls = lterms_;
  hs.insert(hs.end(), other.hterms_.begin(), other.hterms_.end());
  ls.insert(ls.end(), other.lterms_.begin(), other.lterms_.end());
  return LindbladGenerator(space_, hs, ls);
}

bool LindbladGenerator::quasi_local(const NeighborhoodStructure& nb) const {
  auto ok = [&](const LocalOperator& t) { return t.support && nb.containing(*t.support) >= 0; };
  return std::all_of(hterms_.begin(), hterms_.end(), ok) && std::all_of(lterms_.begin(), lterms_.end(), ok);
}

namespace {

Matrix effective(const Matrix& h, const std::vector<Matrix>& ls) {
  Matrix k = cplx(0, -1) * h;
  for (auto& l : ls) k -= 0.5 * (l.adjoint() * l);
  return k;
}

Matrix superop(const Matrix& k, const std::vector<Matrix>& ls) {
  const Index d = k.rows();
  const Matrix id = Matrix::Identity(d, d);
  Matrix out = kron(id, k) + kron(k.conjugate(), id);
  for (auto& l : ls) out += kron(l.conjugate(), l);
  return out;
}

}  // namespace

Matrix liouvillian(const Matrix& h, const std::vector<Matrix>& ls) { return superop(effective(h, ls), ls); }

Matrix liouvillian(const LindbladGenerator& gen) { return liouvillian(gen.hamiltonian(), gen.lindblads()); }

Matrix restricted_liouvillian(const Matrix& h, const std::vector<Matrix>& ls, const Matrix& v) {
  Matrix k = v.adjoint() * effective(h, ls) * v;
  std::vector<Matrix> lr;
  for (auto& l : ls) lr.push_back(v.adjoint() * l * v);
  return superop(k, lr);
}

Matrix evaluate(const Matrix& h, const std::vector<Matrix>& ls, const Matrix& x) {
  Matrix out = cplx(0, -1) * (h * x - x * h);
  for (auto& l : ls) {
    Matrix ll = l.adjoint() * l;
    out += l * x * l.adjoint() - 0.5 * (ll * x + x * ll);
  }
  return out;
}

Matrix evaluate(const LindbladGenerator& gen, const Matrix& x) { return evaluate(gen.hamiltonian(), gen.lindblads(), x); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Vector v(m.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = cplx(1.0 + 0.37 * std::sin(1.0 + i), 0.21 * std::cos(2.0 * i));
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = m.adjoint() * (m * v);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    const double next = std::sqrt(n);
    v = w / n;
    if (std::abs(next - est) <= 1e-12 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est;
}

InvarianceReport is_invariant(const LindbladGenerator& gen, const Vector& psi, double tol) {
  InvarianceReport r;
  r.invariant = true;
  const Index d = gen.dim();
  if (psi.size() != d) throw DimensionError("target does not match generator dimension");
  Matrix ht = gen.hamiltonian();
  const auto& ls = gen.lindblads();
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const cplx ell = psi.dot(ls[k] * psi);
    const double res = (ls[k] * psi - ell * psi).norm();
    r.ell.push_back(ell);
    r.residuals.push_back(res);
    if (res > tol * std::max(1.0, ls[k].norm()) && r.invariant) {
      r.invariant = false;
      r.first_violation = "lindblad " + std::to_string(k) + " does not have the target as eigenvector";
    }
    ht += cplx(0, 0.5) * (std::conj(ell) * ls[k] - ell * ls[k].adjoint());
  }
  r.h = psi.dot(ht * psi).real();
  r.hamiltonian_residual = (ht * psi - r.h * psi).norm();
  if (r.hamiltonian_residual > tol * std::max(1.0, ht.norm()) && r.invariant) {
    r.invariant = false;
    r.first_violation = "shifted Hamiltonian does not have the target as eigenvector";
  }
  return r;
}

StandardForm standard_form(const LindbladGenerator& gen, const Vector& psi, double tol) {
  auto inv = is_invariant(gen, psi, tol);
  if (!inv.invariant) throw NotInvariant(inv.first_violation);
  auto hs = gen.hamiltonian_terms();
  auto ls = gen.lindblad_terms();
  for (std::size_t k = 0; k < ls.size(); ++k) {
    const cplx ell = inv.ell[k];
    const Matrix& l = ls[k].local;
    hs.push_back({ls[k].support, cplx(0, 0.5) * (std::conj(ell) * l - ell * l.adjoint())});
    ls[k].local = l - ell * Matrix::Identity(l.rows(), l.cols());
  }
  StandardForm out{LindbladGenerator(gen.space(), hs, ls), inv.h, 0.0};

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const Index d = gen.dim();
  double scale = 1.0;
  for (int p = 0; p < 4; ++p) {
    Matrix x(d, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i) x(i, j) = cplx(g(rng), g(rng));
    Matrix a = evaluate(gen, x), b = evaluate(out.generator, x);
    scale = std::max(scale, a.norm());
    out.certification = std::max(out.certification, (a - b).norm());
  }
  if (out.certification > 1e-8 * scale) throw std::logic_error("standard form changed the generator");
  return out;
}

ZeroEigenspace zero_eigenspace(const Matrix& lhat, double tol, double scale_floor) {
  ZeroEigenspace z;
  const Index n = lhat.rows();
  const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) throw DimensionError("superoperator size is not a square");
  z.norm = spectral_norm(lhat);
  z.threshold = tol * std::max({z.norm, scale_floor, std::numeric_limits<double>::min()});
  Eigen::ComplexEigenSolver<Matrix> es(lhat, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  const auto& ev = es.eigenvalues();

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev(a).real() > ev(b).real(); });
  std::vector<Index> zero;
  for (Index i : order) {
    z.eigenvalues.push_back(ev(i));
    if (std::abs(ev(i)) <= z.threshold) {
      zero.push_back(i);
    } else {
      z.max_real_nonzero = std::max(z.max_real_nonzero, ev(i).real());
      if (ev(i).real() > -z.threshold) ++z.marginal;
    }
  }
  z.multiplicity = static_cast<int>(zero.size());
  if (zero.empty()) return z;

  // Hermitian and anti-Hermitian parts of every kernel vector, orthonormalized over the reals
  RealMatrix cols(2 * n, 2 * static_cast<Index>(zero.size()));
  Index c = 0;
  for (Index i : zero) {
    Matrix x = Eigen::Map<const Matrix>(es.eigenvectors().col(i).data(), d, d);
    for (const Matrix& y : {Matrix(x + x.adjoint()), Matrix(cplx(0, 1) * (x - x.adjoint()))}) {
      Eigen::Map<const Vector> v(y.data(), n);
      cols.col(c).head(n) = v.real();
      cols.col(c).tail(n) = v.imag();
      ++c;
    }
  }
  Eigen::BDCSVD<RealMatrix> svd(cols, Eigen::ComputeThinU);
  for (int q = 0; q < z.multiplicity; ++q) {
    Vector v(n);
    v.real() = svd.matrixU().col(q).head(n);
    v.imag() = svd.matrixU().col(q).tail(n);
    Matrix y = Eigen::Map<Matrix>(v.data(), d, d);
    y = 0.5 * (y + y.adjoint());
    const cplx tr = y.trace();
    if (std::abs(tr) > 1e-6 * y.norm())
      y /= tr.real();
    else
      y /= y.norm();
    z.fixed_points.push_back(y);
  }
  return z;
}

GasReport gas_report(const Matrix& lhat, const Vector& target, double tol) {
  GasReport g;
  auto z = zero_eigenspace(lhat, tol);
  g.multiplicity = z.multiplicity;
  g.marginal = z.marginal;
  g.gap = std::isfinite(z.max_real_nonzero) ? -z.max_real_nonzero : 0.0;
  for (std::size_t i = 0; i < z.eigenvalues.size() && i < 10; ++i) g.rightmost.push_back(z.eigenvalues[i]);
  if (z.multiplicity == 1) {
    const Vector t = target / target.norm();
    g.fidelity = t.dot(z.fixed_points[0] * t).real();
  }
  g.gas = z.multiplicity == 1 && g.fidelity >= 1.0 - tol && z.marginal == 0;
  return g;
}

GasReport gas_report(const LindbladGenerator& gen, const Vector& target, double tol) {
  return gas_report(liouvillian(gen), target, tol);
}

bool is_gas(const LindbladGenerator& gen, const Vector& target, double tol) {
  auto inv = is_invariant(gen, target / target.norm());
  if (!inv.invariant) throw NotInvariant(inv.first_violation);
  return gas_report(gen, target, tol).gas;
}

}  // namespace qlstab
