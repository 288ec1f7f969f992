#include "qlstab/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>

namespace qlstab {

Propagator::Propagator(Matrix lhat, double cond_limit) : lhat_(std::move(lhat)) {
  const Index n = lhat_.rows();
  d_ = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d_ * d_ != n) throw DimensionError("superoperator size is not a square");
  Eigen::ComplexEigenSolver<Matrix> es(lhat_, true);
  if (es.info() == Eigen::Success) {
    v_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    vinv_.compute(v_);
    const double rc = vinv_.rcond();
    cond_ = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  } else {
    cond_ = std::numeric_limits<double>::infinity();
  }
  fallback_ = !(cond_ < cond_limit);
}

Matrix Propagator::apply(const Matrix& rho0, double t) const {
  if (t < 0) throw std::invalid_argument("negative evolution time");
  if (rho0.rows() != d_ || rho0.cols() != d_) throw DimensionError("state does not match the generator");
  if (t == 0) return rho0;
  Eigen::Map<const Vector> v0(rho0.data(), d_ * d_);
  Vector out;
  if (!fallback_) {
    Vector c = vinv_.solve(v0);
    for (Index i = 0; i < c.size(); ++i) c(i) *= std::exp(lambda_(i) * t);
    out = v_ * c;
  } else {
    Matrix e = (lhat_ * cplx(t)).exp();
    out = e * v0;
  }
  return Eigen::Map<Matrix>(out.data(), d_, d_);
}

Evolved evolve(const Propagator& p, const Matrix& rho0, double t) {
  Evolved e;
  e.fallback = p.uses_fallback();
  Matrix raw = p.apply(rho0, t);
  e.raw_trace = raw.trace().real();
  if (t == 0) {
    e.rho = raw;
    return e;
  }
  Matrix h = 0.5 * (raw + raw.adjoint());
  const cplx tr = h.trace();
  e.rho = std::abs(tr) > 0 ? Matrix(h / tr.real()) : h;
  e.correction = (e.rho - raw).norm();
  return e;
}

Evolved evolve(const LindbladGenerator& gen, const Matrix& rho0, double t) { return evolve(Propagator(gen), rho0, t); }

std::vector<double> log_times(double horizon, int samples) {
  if (horizon <= 0 || samples < 2) throw std::invalid_argument("bad sampling");
  std::vector<double> ts{0.0};
  const double lo = std::log(horizon * 1e-3), hi = std::log(horizon);
  for (int i = 0; i < samples; ++i) ts.push_back(std::exp(lo + (hi - lo) * i / (samples - 1)));
  ts.back() = horizon;
  return ts;
}

Trajectory trajectory(const Propagator& p, const Matrix& rho0, const Vector& target, const std::vector<double>& times) {
  Trajectory tr;
  const Vector u = target / target.norm();
  for (double t : times) {
    auto e = evolve(p, rho0, t);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (e.rho + e.rho.adjoint()), Eigen::EigenvaluesOnly);
    tr.times.push_back(t);
    tr.fidelities.push_back(u.dot(e.rho * u).real());
    tr.traces.push_back(e.raw_trace);
    tr.min_eigenvalues.push_back(es.eigenvalues()(0));
    tr.max_correction = std::max(tr.max_correction, e.correction);
    tr.states.push_back(std::move(e.rho));
  }
  return tr;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t,fidelity,trace,min_eigenvalue\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < times.size(); ++i)
    os << times[i] << ',' << fidelities[i] << ',' << traces[i] << ',' << min_eigenvalues[i] << '\n';
}

namespace {

// least squares of log(1 - F) against t on the tail
std::pair<double, double> fit_rate(const Trajectory& tr) {
  std::vector<double> xs, ys;
  const std::size_t start = tr.times.size() / 2;
  for (std::size_t i = start; i < tr.times.size(); ++i) {
    const double inf = 1.0 - tr.fidelities[i];
    if (inf > 1e-12) {
      xs.push_back(tr.times[i]);
      ys.push_back(std::log(inf));
    }
  }
  if (xs.size() < 3) return {std::numeric_limits<double>::infinity(), 1.0};
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (vx <= 0) return {0.0, 0.0};
  const double slope = cxy / vx;
  const double r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
  return {-slope, r2};
}

}  // namespace

ConvergenceSummary convergence_report(const LindbladGenerator& gen, const Vector& target,
                                      const std::vector<Matrix>& rho0s, double horizon, int samples, int jobs) {
  auto inv = is_invariant(gen, target / target.norm());
  if (!inv.invariant) throw NotInvariant(inv.first_violation);
  const Propagator p(gen);
  const auto times = log_times(horizon, samples);
  ConvergenceSummary s;
  s.fallback = p.uses_fallback();
  std::vector<std::future<Trajectory>> fs;
  const auto policy = jobs > 1 ? std::launch::async : std::launch::deferred;
  for (auto& r : rho0s) fs.push_back(std::async(policy, [&, r] { return trajectory(p, r, target, times); }));
  s.rate = std::numeric_limits<double>::infinity();
  for (auto& f : fs) {
    auto tr = f.get();
    s.final_fidelities.push_back(tr.fidelities.back());
    for (std::size_t i = 1; i < tr.fidelities.size(); ++i)
      if (tr.fidelities[i] < tr.fidelities[i - 1] - 1e-9) s.non_monotone = true;
    for (double t : tr.traces)
      if (std::abs(t - 1.0) > 1e-7) s.trace_drift = true;
    auto [rate, r2] = fit_rate(tr);
    if (rate < s.rate) {
      s.rate = rate;
      s.r_squared = r2;
    }
    s.trajectories.push_back(std::move(tr));
  }
  return s;
}

}  // namespace qlstab
