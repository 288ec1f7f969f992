#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "qlstab/generator.hpp"

namespace qlstab {

// exp(t Lhat), decomposition computed once and shared
class Propagator {
 public:
  explicit Propagator(Matrix lhat, double cond_limit = 1e8);
  explicit Propagator(const LindbladGenerator& gen) : Propagator(liouvillian(gen)) {}

  Index dim() const { return d_; }
  bool uses_fallback() const { return fallback_; }
  double condition() const { return cond_; }
  Matrix apply(const Matrix& rho0, double t) const;  // raw, no clean-up

 private:
  Matrix lhat_;
  Index d_ = 0;
  bool fallback_ = false;
  double cond_ = 0.0;
  Vector lambda_;
  Matrix v_;
  Eigen::PartialPivLU<Matrix> vinv_;
};

struct Evolved {
  Matrix rho;
  double raw_trace = 1.0;    // trace before renormalization
  double correction = 0.0;   // |rho - raw|
  bool fallback = false;
};

Evolved evolve(const Propagator& p, const Matrix& rho0, double t);
Evolved evolve(const LindbladGenerator& gen, const Matrix& rho0, double t);

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<double> fidelities;
  std::vector<double> traces;
  std::vector<double> min_eigenvalues;
  double max_correction = 0.0;

  void write_csv(std::ostream& os) const;
};

Trajectory trajectory(const Propagator& p, const Matrix& rho0, const Vector& target, const std::vector<double>& times);
std::vector<double> log_times(double horizon, int samples);

struct ConvergenceSummary {
  std::vector<Trajectory> trajectories;
  std::vector<double> final_fidelities;
  double rate = 0.0;       // fitted decay rate of 1 - F
  double r_squared = 0.0;
  bool non_monotone = false;
  bool trace_drift = false;  // any |Tr - 1| > 1e-7 before renormalization
  bool fallback = false;
};

ConvergenceSummary convergence_report(const LindbladGenerator& gen, const Vector& target,
                                      const std::vector<Matrix>& rho0s, double horizon = 50.0, int samples = 40,
                                      int jobs = 1);

}  // namespace qlstab
