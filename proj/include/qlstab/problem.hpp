#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "qlstab/dynamics.hpp"
#include "qlstab/synthesis.hpp"

namespace qlstab {

using json = nlohmann::json;

struct SchemaError : std::runtime_error {
  explicit SchemaError(std::vector<std::string> d)
      : std::runtime_error(d.empty() ? "schema error" : d.front()), diagnostics(std::move(d)) {}
  std::vector<std::string> diagnostics;
};

struct HPrimeSpec {
  std::string observable;  // Pauli letters, empty when a basis is given
  int eigenvalue = 1;
  std::vector<Vector> basis;
};

struct ProblemOptions {
  double gamma = 1.0;
  int trials = 16;
  std::uint64_t seed = 42;
  double tol = kDefaultTol;
  double horizon = 50.0;
  std::optional<HPrimeSpec> h_prime;
};

struct ProblemSpec {
  MultipartiteSpace space;
  std::vector<Neighborhood> neighborhoods;  // zero-based
  Vector target;
  std::string target_label;
  std::optional<json> drift;
  std::string mode;
  ProblemOptions options;
  std::vector<std::string> warnings;

  NeighborhoodStructure structure() const {
    return NeighborhoodStructure(space, neighborhoods, FullNeighborhood::Allow);
  }
};

std::vector<std::string> validate(const json& j);
ProblemSpec parse_problem(const json& j);  // throws SchemaError

// generator description: {"fixture": name} or {"hamiltonian": [...], "lindblads": [...]}
LindbladGenerator parse_generator(const json& j, const ProblemSpec& spec);
json generator_json(const LindbladGenerator& gen);
json complex_json(cplx z);
json matrix_json(const Matrix& m);
Matrix matrix_from_json(const json& j);
Subspace h_prime_subspace(const HPrimeSpec& hp, const MultipartiteSpace& space);

struct RunOptions {
  int jobs = 1;
  bool force = false;
  bool want_csv = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

enum ExitCode { kOk = 0, kSchema = 1, kInfeasible = 2, kVerification = 3 };

struct RunOutput {
  json report;
  int exit_code = kOk;
  std::vector<std::pair<std::string, Trajectory>> trajectories;
};

RunOutput run(ProblemSpec spec, const RunOptions& ro = {});

}  // namespace qlstab
