#include "qlstab/synthesis.hpp"

#include <future>
#include <map>
#include <random>

#include "qlstab/statelib.hpp"

namespace qlstab {

std::vector<Matrix> hermitian_basis(int d) {
  std::vector<Matrix> out;
  if (d == 2) {
    for (const Matrix& p : {pauli::id(), pauli::x(), pauli::y(), pauli::z()}) out.push_back(p / std::sqrt(2.0));
    return out;
  }
  out.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Matrix s = Matrix::Zero(d, d), a = Matrix::Zero(d, d);
      s(j, k) = s(k, j) = 1.0 / std::sqrt(2.0);
      a(j, k) = cplx(0, -1.0 / std::sqrt(2.0));
      a(k, j) = cplx(0, 1.0 / std::sqrt(2.0));
      out.push_back(s);
      out.push_back(a);
    }
  for (int l = 1; l < d; ++l) {
    Matrix g = Matrix::Zero(d, d);
    for (int j = 0; j < l; ++j) g(j, j) = 1.0;
    g(l, l) = -static_cast<double>(l);
    out.push_back(g / std::sqrt(static_cast<double>(l * (l + 1))));
  }
  return out;
}

QlOperatorBasis operator_basis(const MultipartiteSpace& space, const Neighborhood& nb) {
  QlOperatorBasis b;
  b.support = normalized(nb);
  b.hermitian = {Matrix::Identity(1, 1)};
  for (int a : b.support) {
    const auto factor = hermitian_basis(space.dim(a));
    std::vector<Matrix> next;
    for (auto& left : b.hermitian)
      for (auto& f : factor) next.push_back(kron(left, f));
    b.hermitian = std::move(next);
  }
  b.complex = b.hermitian;
  for (auto& h : b.hermitian) b.complex.push_back(cplx(0, 1) * h);
  return b;
}

Index ConstraintSystem::free_dissipator_dims() const {
  Index n = 0;
  for (auto& ns : dissipator_nullspace) n += ns.cols();
  return n;
}

namespace {

void put_complex(RealMatrix& m, Index col, Index row0, const Eigen::Ref<const Vector>& v) {
  m.col(col).segment(row0, v.size()) = v.real();
  m.col(col).segment(row0 + v.size(), v.size()) = v.imag();
}

// sigma (x) I applied to psi, flattened in the full basis
Vector act_local(const Matrix& sigma, const Matrix& psi_local, const Split& split) {
  Matrix out = sigma * psi_local;
  Vector v(split.local_dim() * split.rest_dim());
  for (Index r = 0; r < split.rest_dim(); ++r)
    for (Index l = 0; l < split.local_dim(); ++l) v(split.at(l, r)) = out(l, r);
  return v;
}

RealMatrix null_space(const RealMatrix& c, double tol) {
  const double thr = tol * std::max(1.0, c.norm());
  return kernel(c, thr);
}

double rel(double x, double scale) { return x / std::max(1.0, scale); }

}  // namespace

ConstraintSystem build_constraints(const Vector& psi, const NeighborhoodStructure& nbhds, SynthesisMode mode,
                                   const std::optional<Subspace>& h_prime, bool with_hamiltonian,
                                   const std::vector<Neighborhood>& hamiltonian_supports, double tol) {
  const auto& space = nbhds.space();
  const Index d = space.total_dim();
  if (psi.size() != d) throw DimensionError("target does not match the space");
  ConstraintSystem cs;
  cs.mode = mode;
  cs.space = space;
  cs.target = psi / psi.norm();
  Matrix pp;
  if (mode == SynthesisMode::Conditional) {
    if (!h_prime) throw std::invalid_argument("conditional constraints need H'");
    if (!contains(*h_prime, cs.target)) throw std::invalid_argument("H' does not contain the target");
    cs.h_prime = h_prime;
    pp = h_prime->projector();
  }

  for (const auto& nb : nbhds.list()) {
    auto basis = operator_basis(space, nb);
    Split split(space, nb);
    Matrix loc = reshape_local(cs.target, nb, space);
    const Index m = static_cast<Index>(basis.complex.size());
    const Index rows = 2 * d + (mode == SynthesisMode::Conditional ? 2 * d * d : 0);
    RealMatrix c(rows, m);
    for (Index j = 0; j < m; ++j) {
      put_complex(c, j, 0, act_local(basis.complex[static_cast<std::size_t>(j)], loc, split));
      if (mode == SynthesisMode::Conditional) {
        Matrix full = embed(basis.complex[static_cast<std::size_t>(j)], nb, space);
        Matrix comm = full * pp - pp * full;
        put_complex(c, j, 2 * d, Eigen::Map<const Vector>(comm.data(), d * d));
      }
    }
    cs.dissipator_nullspace.push_back(null_space(c, tol));
    cs.dissipator_constraints.push_back(std::move(c));
    cs.bases.push_back(std::move(basis));
  }

  cs.with_hamiltonian = with_hamiltonian && mode == SynthesisMode::Qls;
  if (cs.with_hamiltonian) {
    cs.hamiltonian_supports = hamiltonian_supports.empty() ? nbhds.list() : hamiltonian_supports;
    Index cols = 0;
    for (auto& s : cs.hamiltonian_supports) {
      if (nbhds.containing(normalized(s)) < 0) throw NeighborhoodError("Hamiltonian support outside every neighborhood");
      cs.hamiltonian_bases.push_back(operator_basis(space, s));
      cols += static_cast<Index>(cs.hamiltonian_bases.back().hermitian.size());
    }
    cs.hamiltonian_constraint = RealMatrix(2 * d, cols);
    Index j = 0;
    for (auto& b : cs.hamiltonian_bases) {
      Split split(space, b.support);
      Matrix loc = reshape_local(cs.target, b.support, space);
      for (auto& h : b.hermitian) put_complex(cs.hamiltonian_constraint, j++, 0, act_local(h, loc, split));
    }
    cs.hamiltonian_nullspace = null_space(cs.hamiltonian_constraint, tol);
  }
  return cs;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Candidate randomize(const ConstraintSystem& cs, double gamma, std::uint64_t seed) {
  bool any = cs.with_hamiltonian && cs.hamiltonian_nullspace.cols() > 0;
  for (auto& ns : cs.dissipator_nullspace) any = any || ns.cols() > 0;
  if (!any) throw EmptyNullspace("no admissible operator on any neighborhood");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-gamma, gamma);
  auto draw = [&](const RealMatrix& ns) {
    Eigen::VectorXd x(ns.cols());
    for (Index i = 0; i < x.size(); ++i) x(i) = u(rng);
    return Eigen::VectorXd(ns * x);
  };

  Candidate c;
  c.seed = seed;
  const Vector& psi = cs.target;
  if (cs.with_hamiltonian && cs.hamiltonian_nullspace.cols() > 0) {
    Eigen::VectorXd coef = draw(cs.hamiltonian_nullspace);
    Index j = 0;
    Matrix total = Matrix::Zero(psi.size(), psi.size());
    for (auto& b : cs.hamiltonian_bases) {
      Matrix h = Matrix::Zero(b.hermitian.front().rows(), b.hermitian.front().cols());
      for (auto& s : b.hermitian) h += coef(j++) * s;
      total += embed(h, b.support, cs.space);
      c.hamiltonian.push_back({b.support, h});
    }
    if (rel((total * psi).norm(), total.norm()) > 1e-10) throw std::logic_error("drawn Hamiltonian moves the target");
  }
  const Matrix pp = cs.h_prime ? cs.h_prime->projector() : Matrix();
  for (std::size_t k = 0; k < cs.bases.size(); ++k) {
    const auto& ns = cs.dissipator_nullspace[k];
    if (ns.cols() == 0) continue;
    Eigen::VectorXd coef = draw(ns);
    const auto& b = cs.bases[k];
    Matrix dk = Matrix::Zero(b.complex.front().rows(), b.complex.front().cols());
    for (std::size_t j = 0; j < b.complex.size(); ++j) dk += coef(static_cast<Index>(j)) * b.complex[j];
    Matrix full = embed(dk, b.support, cs.space);
    if (rel((full * psi).norm(), full.norm()) > 1e-10) throw std::logic_error("drawn dissipator moves the target");
    if (cs.h_prime && rel((full * pp - pp * full).norm(), full.norm()) > 1e-10)
      throw std::logic_error("drawn dissipator does not commute with the H' projector");
    c.dissipators.push_back({b.support, dk});
  }
  return c;
}

std::string to_string(Verified v) {
  switch (v) {
    case Verified::Gas: return "GAS";
    case Verified::ConditionallyAs: return "ConditionallyAS";
    case Verified::Failed: return "Failed";
    case Verified::Infeasible: return "Infeasible";
  }
  return "?";
}

TrialRecord verify_gas(const LindbladGenerator& gen, const Vector& target, Index spectral_limit, double tol) {
  TrialRecord rec;
  const Vector u = target / target.norm();
  const Index d = gen.dim();
  if (d * d <= spectral_limit) {
    rec.method = "spectral";
    auto g = gas_report(gen, u);
    rec.multiplicity = g.multiplicity;
    rec.fidelity = g.fidelity;
    rec.gap = g.gap;
    rec.rightmost = g.rightmost;
    rec.success = g.gas;
    return rec;
  }
  rec.method = "did";
  auto dd = did(gen, Subspace::span(u), tol);
  rec.did_steps = dd.steps;
  rec.basin_dims = dd.basin_dims();
  if (dd.outcome == DidOutcome::Completed) {
    rec.multiplicity = 1;
    rec.fidelity = 1.0;
    rec.success = true;
    return rec;
  }
  rec.multiplicity_is_bound = true;
  const Matrix& v = dd.remainder.basis();
  if (v.cols() * v.cols() <= spectral_limit) {
    // the block can be numerically tiny, so the zero threshold follows the full generator's scale
    double bound = 2 * gen.hamiltonian().norm();
    for (auto& l : gen.lindblads()) bound += 2 * l.squaredNorm();
    auto z = zero_eigenspace(restricted_liouvillian(gen.hamiltonian(), gen.lindblads(), v), 1e-8, bound);
    rec.multiplicity = 1 + z.multiplicity;
  } else {
    rec.multiplicity = 2;
  }
  return rec;
}

ConditionalCheck verify_conditional(const LindbladGenerator& gen, const Vector& target, const Subspace& h_prime,
                                    double tol) {
  ConditionalCheck out;
  const Matrix& v = h_prime.basis();
  const Matrix wc = complement(h_prime).basis();
  const Matrix pp = h_prime.projector();
  const Matrix& h = gen.hamiltonian();
  Matrix k = cplx(0, -1) * h;
  double lscale = 1.0;
  for (auto& l : gen.lindblads()) {
    k -= 0.5 * (l.adjoint() * l);
    out.commutator = std::max(out.commutator, (l * pp - pp * l).norm());
    lscale = std::max(lscale, l.norm());
  }
  const double scale = std::max({1.0, h.norm(), lscale * lscale});
  auto leaks = [&](const Matrix& from, const Matrix& to) {
    if (from.cols() == 0 || to.cols() == 0) return false;
    for (auto& l : gen.lindblads())
      if ((to.adjoint() * l * from).norm() > tol * lscale) return true;
    return (to.adjoint() * k * from).norm() > tol * scale;
  };
  out.invariant_hp = !leaks(v, wc);
  out.invariant_complement = !leaks(wc, v);
  if (!out.invariant_hp) return out;
  out.restricted = gas_report(restricted_liouvillian(h, gen.lindblads(), v), v.adjoint() * (target / target.norm()));
  out.conditionally_as = out.restricted.gas;
  return out;
}

namespace {

template <typename Trial>
std::vector<TrialRecord> run_trials(int trials, int jobs, bool stop_at_success, Trial&& trial) {
  std::vector<TrialRecord> recs;
  jobs = std::max(1, jobs);
  for (int base = 0; base < trials; base += jobs) {
    std::vector<std::future<TrialRecord>> batch;
    for (int t = base; t < std::min(trials, base + jobs); ++t)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, trial, t));
    bool hit = false;
    for (auto& f : batch) {
      recs.push_back(f.get());
      hit = hit || recs.back().success;
    }
    if (hit && stop_at_success) break;
  }
  return recs;
}

}  // namespace

SynthesisResult synthesize_qls(const Vector& psi, const NeighborhoodStructure& nbhds, const SynthesisOptions& opts) {
  const auto& space = nbhds.space();
  const Vector u = psi / psi.norm();
  SynthesisResult res;
  res.seed = opts.seed;
  res.dqls = dqls_test(u, nbhds, opts.tol);

  if (space.all_qubits() && is_ghz(u, space.size()) && nogo_ghz(space.size(), nbhds) == NogoVerdict::Blocked) {
    res.diagnostic = "GHZ no-go: every neighborhood has fewer than half of the qubits, the target is not QLS";
    if (!opts.force) {
      res.verified = Verified::Infeasible;
      res.generator = LindbladGenerator(space, {}, {});
      return res;
    }
  }

  const bool need_h = res.dqls->verdict == DqlsVerdict::NotDqls && !opts.fixed_hamiltonian;
  auto cs = build_constraints(u, nbhds, SynthesisMode::Qls, std::nullopt, need_h, opts.hamiltonian_supports, opts.tol);
  if (opts.fixed_hamiltonian) {
    Matrix hc = LindbladGenerator(space, *opts.fixed_hamiltonian, {}).hamiltonian();
    auto chk = qls_necessary(u, nbhds, hc, opts.tol);
    if (!chk.pass) res.diagnostic = chk.reason;
  }

  std::vector<LindbladGenerator> gens(static_cast<std::size_t>(opts.trials));
  auto trial = [&](int t) {
    const auto seed = trial_seed(opts.seed, t);
    auto c = randomize(cs, opts.gamma, seed);
    auto hs = opts.fixed_hamiltonian ? *opts.fixed_hamiltonian : c.hamiltonian;
    LindbladGenerator g(space, hs, c.dissipators);
    if (opts.background) g = opts.background->merged(g);
    auto rec = verify_gas(g, u, opts.spectral_limit, opts.tol);
    rec.trial = t;
    rec.seed = seed;
    gens[static_cast<std::size_t>(t)] = std::move(g);
    return rec;
  };
  res.records = run_trials(opts.trials, opts.jobs, opts.stop_at_success, trial);
  res.trials = static_cast<int>(res.records.size());
  res.verified = Verified::Failed;
  for (auto& r : res.records)
    if (r.success) {
      res.verified = Verified::Gas;
      res.seed = r.seed;
      res.generator = gens[static_cast<std::size_t>(r.trial)];
      return res;
    }
  if (!res.records.empty()) {
    res.seed = res.records.front().seed;
    res.generator = gens.front();
  }
  if (res.diagnostic.empty()) res.diagnostic = "no trial reached a unique fixed point";
  return res;
}

SynthesisResult synthesize_conditional(const Vector& psi, const NeighborhoodStructure& nbhds,
                                       const std::optional<Subspace>& h_prime, const SynthesisOptions& opts) {
  const auto& space = nbhds.space();
  const Vector u = psi / psi.norm();
  SynthesisResult res;
  res.seed = opts.seed;
  res.dqls = dqls_test(u, nbhds, opts.tol);
  Subspace hp = h_prime ? *h_prime : complement(res.dqls->unwanted(u));
  res.h_prime = hp;
  res.generator = LindbladGenerator(space, {}, {});
  auto chk = conditional_necessary(u, nbhds, hp, opts.tol);
  if (!chk.pass) {
    res.verified = Verified::Infeasible;
    res.diagnostic = chk.reason;
    return res;
  }
  if (hp.dim() == 1) {
    res.verified = Verified::ConditionallyAs;
    res.diagnostic = "H' is the target line, dynamics on it are trivial";
    return res;
  }
  auto cs = build_constraints(u, nbhds, SynthesisMode::Conditional, hp, false, {}, opts.tol);
  if (cs.free_dissipator_dims() == 0) {
    res.verified = Verified::Infeasible;
    res.diagnostic = "empty nullspace on every neighborhood";
    return res;
  }
  std::vector<LindbladGenerator> gens(static_cast<std::size_t>(opts.trials));
  auto trial = [&](int t) {
    const auto seed = trial_seed(opts.seed, t);
    auto c = randomize(cs, opts.gamma, seed);
    LindbladGenerator g(space, {}, c.dissipators);
    if (opts.background) g = opts.background->merged(g);
    auto chk2 = verify_conditional(g, u, hp);
    TrialRecord rec;
    rec.trial = t;
    rec.seed = seed;
    rec.method = "restricted-spectral";
    rec.multiplicity = chk2.restricted.multiplicity;
    rec.fidelity = chk2.restricted.fidelity;
    rec.gap = chk2.restricted.gap;
    rec.rightmost = chk2.restricted.rightmost;
    rec.success = chk2.conditionally_as;
    gens[static_cast<std::size_t>(t)] = std::move(g);
    return rec;
  };
  res.records = run_trials(opts.trials, opts.jobs, opts.stop_at_success, trial);
  res.trials = static_cast<int>(res.records.size());
  res.verified = Verified::Failed;
  for (auto& r : res.records)
    if (r.success) {
      res.verified = Verified::ConditionallyAs;
      res.seed = r.seed;
      res.generator = gens[static_cast<std::size_t>(r.trial)];
      return res;
    }
  if (!res.records.empty()) res.generator = gens.front();
  res.diagnostic = "no trial reached a unique fixed point on H'";
  return res;
}

namespace {

Matrix fix_phases(Matrix b) {
  for (Index c = 0; c < b.cols(); ++c) {
    Index i = 0;
    b.col(c).cwiseAbs().maxCoeff(&i);
    const cplx z = b(i, c);
    if (std::abs(z) > 0) b.col(c) *= std::conj(z) / std::abs(z);
  }
  return b;
}

// extend the orthonormal columns of `have` by Gram-Schmidt over e_0, e_1, ...
Matrix completion(const Matrix& have, Index dim) {
  std::vector<Vector> added;
  for (Index i = 0; i < dim && have.cols() + static_cast<Index>(added.size()) < dim; ++i) {
    Vector v = Vector::Zero(dim);
    v(i) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      v -= have * (have.adjoint() * v);
      for (auto& a : added) v -= a * a.dot(v);
    }
    if (v.norm() > 1e-8) added.push_back(v / v.norm());
  }
  Matrix out(dim, static_cast<Index>(added.size()));
  for (std::size_t c = 0; c < added.size(); ++c) out.col(static_cast<Index>(c)) = added[c];
  return out;
}

}  // namespace

WtypeResult construct_wtype(const Vector& psi, const NeighborhoodStructure& nbhds, double tol) {
  const auto& space = nbhds.space();
  const Vector u = psi / psi.norm();
  WtypeResult out;
  auto rep = dqls_test(u, nbhds, tol);
  const Subspace hw = rep.unwanted(u);
  const Matrix pw = hw.projector();

  std::vector<Subspace> ext;
  out.applicable = true;
  for (int k = 0; k < nbhds.count(); ++k) {
    const auto& nb = nbhds[k];
    WtypeNeighborhood w;
    w.wanted = rep.local_supports[static_cast<std::size_t>(k)];
    const Index dl = space.dim_of(nb);
    w.unwanted = hw.dim() ? support(partial_trace(pw, nb, space), tol) : Subspace::zero(dl);
    w.strict = w.unwanted.dim() < w.wanted.dim() && contains(w.wanted, w.unwanted);
    if (!w.strict && out.applicable) {
      out.applicable = false;
      out.failing_neighborhood = k;
    }
    ext.push_back(extend(w.unwanted, nb, space));
    out.neighborhoods.push_back(std::move(w));
  }
  if (!out.applicable) return out;
  out.h_prime = complement(intersect(ext, tol));

  for (int k = 0; k < nbhds.count(); ++k) {
    const auto& w = out.neighborhoods[static_cast<std::size_t>(k)];
    const Index dl = w.wanted.ambient();
    Matrix wb = fix_phases(w.unwanted.basis());
    Matrix tb = fix_phases(difference(w.wanted, w.unwanted, tol).basis());
    Matrix have(dl, wb.cols() + tb.cols());
    have << wb, tb;
    Matrix rb = completion(have, dl);
    if (rb.cols() == 0 || tb.cols() == 0) continue;
    Matrix d = tb.col(0) * rb.col(0).adjoint();
    for (Index i = 1; i < rb.cols(); ++i) d += rb.col(i - 1) * rb.col(i).adjoint();
    out.dissipators.push_back({nbhds[k], d});
  }
  return out;
}

std::vector<Compensator> drift_compensate(const LindbladGenerator& drift, const Vector& psi, double tol) {
  const auto& space = drift.space();
  const Index d = space.total_dim();
  if (psi.size() != d) throw DimensionError("target does not match the drift");
  const Vector u = psi / psi.norm();
  const Matrix q = Matrix::Identity(d, d) - u * u.adjoint();

  std::map<Neighborhood, Eigen::RowVectorXcd> rows;
  for (std::size_t k = 0; k < drift.lindblad_terms().size(); ++k) {
    const auto& t = drift.lindblad_terms()[k];
    if (!t.support) throw QlViolation("drift Lindblad " + std::to_string(k) + " is not tagged with a neighborhood");
    const Matrix& l = drift.lindblads()[k];
    const cplx ell = u.dot(l * u);
    if ((l * u - ell * u).norm() > tol * std::max(1.0, l.norm()))
      throw NotCompensable(static_cast<int>(k), "drift Lindblad " + std::to_string(k) +
                                                    " does not have the target as eigenvector");
    auto& row = rows.try_emplace(*t.support, Eigen::RowVectorXcd::Zero(d)).first->second;
    row -= std::conj(ell) * (u.adjoint() * l * q);
  }
  for (const auto& t : drift.hamiltonian_terms()) {
    if (!t.support) throw QlViolation("drift Hamiltonian term is not supported on a single neighborhood");
    auto& row = rows.try_emplace(*t.support, Eigen::RowVectorXcd::Zero(d)).first->second;
    row += cplx(0, 2) * (u.adjoint() * t.full(space) * q);
  }

  std::vector<Compensator> out;
  for (auto& [nb, row] : rows) {
    if (row.norm() <= tol * std::max(1.0, drift.hamiltonian().norm())) continue;
    Matrix full = u * (u.adjoint() + row);
    Compensator c;
    c.source = nb;
    const Index dr = d / space.dim_of(nb);
    Matrix local = partial_trace(full, nb, space) / static_cast<double>(dr);
    c.quasi_local = (embed(local, nb, space) - full).norm() <= 1e-10 * std::max(1.0, full.norm());
    c.op = c.quasi_local ? LocalOperator{nb, local} : LocalOperator{std::nullopt, full};
    out.push_back(std::move(c));
  }
  auto inv = is_invariant(with_compensation(drift, out), u, 1e-8);
  if (!inv.invariant) throw std::logic_error("compensated generator does not leave the target invariant");
  return out;
}

LindbladGenerator with_compensation(const LindbladGenerator& drift, const std::vector<Compensator>& comp) {
  std::vector<LocalOperator> ls;
  for (auto& c : comp) ls.push_back(c.op);
  return drift.merged(LindbladGenerator(drift.space(), {}, ls));
}

}  // namespace qlstab
