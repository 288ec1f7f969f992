#include "qlstab/analysis.hpp"

#include <algorithm>

#include "qlstab/statelib.hpp"

namespace qlstab {

Subspace DqlsReport::unwanted(const Vector& psi) const {
  return difference(h0, Subspace::span(psi));
}

DqlsReport dqls_test(const Vector& psi, const NeighborhoodStructure& nbhds, double tol) {
  const auto& space = nbhds.space();
  if (psi.size() != space.total_dim()) throw DimensionError("target does not match the space");
  const Vector u = psi / psi.norm();
  DqlsReport r;
  for (const auto& nb : nbhds.list()) {
    Matrix m = reshape_local(u, nb, space);
    Subspace loc = support(m * m.adjoint(), tol);
    r.local_supports.push_back(loc);
    r.extended.push_back(extend(loc, nb, space));
  }
  r.h0 = intersect(r.extended, tol);
  r.d0 = r.h0.dim();
  r.verdict = (r.d0 == 1 && contains(r.h0, u)) ? DqlsVerdict::Dqls : DqlsVerdict::NotDqls;
  return r;
}

std::vector<Index> DidDecomposition::basin_dims() const {
  std::vector<Index> v;
  for (auto& b : basins) v.push_back(b.dim());
  return v;
}

namespace {

double op_scale(const std::vector<Matrix>& ls) {
  double s = 1.0;
  for (auto& l : ls) s = std::max(s, l.norm());
  return s;
}

// R minus the span of coordinates n (r x r') inside R
Matrix peel(const Matrix& rbasis, const Matrix& n) {
  if (n.cols() == 0) return rbasis;
  Subspace inner = complement(Subspace::from_orthonormal(n));
  return rbasis * inner.basis();
}

}  // namespace

DidDecomposition did(const Matrix& h, const std::vector<Matrix>& ls, const Subspace& hs, double tol) {
  const Index d = h.rows();
  if (hs.ambient() != d) throw DimensionError("subspace does not match generator");
  if (hs.dim() == 0) throw std::invalid_argument("DID needs a nonzero subspace");
  const double lscale = op_scale(ls);
  const double scale = std::max({1.0, h.norm(), lscale * lscale});

  Matrix s = hs.basis();
  Matrix r = complement(hs).basis();
  {
    Matrix kq = cplx(0, -1) * (r.adjoint() * h * s);
    for (auto& l : ls) {
      Matrix lq = r.adjoint() * l * s;
      if (lq.norm() > 10 * tol * lscale) throw InvariancePrecondition("a Lindblad operator leaks the subspace");
      kq -= 0.5 * (r.adjoint() * l.adjoint() * l * s);
    }
    if (kq.norm() > 10 * tol * scale) throw InvariancePrecondition("the effective Hamiltonian leaks the subspace");
  }

  DidDecomposition out;
  out.basins.push_back(hs);
  while (r.cols() > 0) {
    ++out.steps;
    const Index sd = s.cols(), rd = r.cols();
    Matrix stacked(static_cast<Index>(ls.size()) * sd, rd);
    for (std::size_t k = 0; k < ls.size(); ++k)
      stacked.middleRows(static_cast<Index>(k) * sd, sd) = s.adjoint() * ls[k] * r;
    Matrix n = kernel(stacked, tol * lscale);

    if (n.cols() == rd) {
      Matrix lp = cplx(0, -1) * (s.adjoint() * h * r);
      for (auto& l : ls) {
        Matrix lq = r.adjoint() * l * s;
        Matrix lr = r.adjoint() * l * r;
        lp -= 0.5 * (lq.adjoint() * lr);
      }
      if (lp.norm() <= tol * scale) {
        out.outcome = DidOutcome::NotGas;
        out.remainder = Subspace::from_orthonormal(r);
        return out;
      }
      n = kernel(lp, tol * scale);
    }

    Matrix t = peel(r, n);
    out.basins.push_back(Subspace::from_orthonormal(t));
    Matrix grown(d, s.cols() + t.cols());
    grown << s, t;
    s = grown;
    r = r * n;
  }
  out.outcome = DidOutcome::Completed;
  out.remainder = Subspace::zero(d);
  return out;
}

DidDecomposition did(const LindbladGenerator& gen, const Subspace& hs, double tol) {
  return did(gen.hamiltonian(), gen.lindblads(), hs, tol);
}

CheckResult qls_necessary(const Vector& psi, const NeighborhoodStructure& nbhds, const Matrix& hc, double tol) {
  const Vector u = psi / psi.norm();
  auto rep = dqls_test(u, nbhds, tol);
  if (rep.verdict == DqlsVerdict::Dqls) return {true, "target is DQLS"};
  if (hermiticity_defect(hc) > 1e-10 * std::max(1.0, hc.norm())) throw NotHermitian("H_c is not Hermitian");
  const double scale = std::max(1.0, hc.norm());
  const cplx lambda = u.dot(hc * u);
  if ((hc * u - lambda * u).norm() > tol * scale) return {false, "H_c does not leave the target invariant"};
  const Matrix hs = hc - lambda * Matrix::Identity(hc.rows(), hc.cols());
  const Subspace hw = rep.unwanted(u);
  const Matrix p0 = rep.h0.projector();

  if (rep.d0 == 2) {
    const Vector phi = hw.basis().col(0);
    const double leak = (hs * phi - p0 * (hs * phi)).norm();
    if (leak > tol * scale) return {true, "H_c moves the unwanted state out of H0"};
    return {false, "H0 is invariant under H_c"};
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hs + hs.adjoint()));
  const auto& ev = es.eigenvalues();
  Index total = 0;
  for (Index i = 0; i < ev.size();) {
    Index j = i + 1;
    while (j < ev.size() && ev(j) - ev(j - 1) < 1e-8 * scale) ++j;
    Subspace e = Subspace::from_orthonormal(es.eigenvectors().middleCols(i, j - i));
    total += intersect({e, rep.h0}, tol).dim();
    i = j;
  }
  if (total == 1) return {true, "only the target line is H_c-invariant inside H0"};
  return {false, "H0 contains an H_c-invariant subspace other than the target"};
}

CheckResult conditional_necessary(const Vector& psi, const NeighborhoodStructure& nbhds, const Subspace& h_prime,
                                  double tol) {
  const Vector u = psi / psi.norm();
  if (h_prime.ambient() != u.size()) throw DimensionError("H' does not match the space");
  if (!contains(h_prime, u)) return {false, "H' does not contain the target"};
  auto rep = dqls_test(u, nbhds, tol);
  const Subspace hw = rep.unwanted(u);
  if (hw.dim() > 0 && (h_prime.basis().adjoint() * hw.basis()).norm() > 1e-8)
    return {false, "H' overlaps the unwanted subspace"};
  return {true, "H' contains the target and is orthogonal to the unwanted subspace"};
}

NogoVerdict nogo_ghz(int n, const NeighborhoodStructure& nbhds) {
  const std::size_t need = static_cast<std::size_t>(n % 2 == 0 ? n / 2 : (n + 1) / 2);
  return nbhds.max_size() >= need ? NogoVerdict::Possible : NogoVerdict::Blocked;
}

Subspace pauli_eigenspace(const std::string& letters, int eigenvalue) {
  if (eigenvalue != 1 && eigenvalue != -1) throw std::invalid_argument("Pauli eigenvalue must be +1 or -1");
  const Matrix p = pauli::string(letters);
  const Matrix proj = 0.5 * (Matrix::Identity(p.rows(), p.cols()) + static_cast<double>(eigenvalue) * p);
  return Subspace::span(proj);
}

}  // namespace qlstab
