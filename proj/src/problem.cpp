#include "qlstab/problem.hpp"

#include <chrono>
#include <random>
#include <set>

#include "qlstab/statelib.hpp"

namespace qlstab {

namespace {

const std::set<std::string> kModes = {"dqls-test", "synth-qls", "synth-conditional", "construct-wtype", "verify",
                                      "simulate"};

void unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where,
                  std::vector<std::string>& diag) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) diag.push_back("unknown key: " + where + it.key());
}

bool is_complex(const json& j) { return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(); }

bool is_matrix(const json& j) {
  if (!j.is_array() || j.empty()) return false;
  const std::size_t n = j.size();
  for (auto& row : j) {
    if (!row.is_array() || row.size() != n) return false;
    for (auto& z : row)
      if (!is_complex(z)) return false;
  }
  return true;
}

void check_generator(const json& g, int n, std::vector<std::string>& diag) {
  if (g.is_null()) return;
  if (!g.is_object()) {
    diag.push_back("drift must be an object or null");
    return;
  }
  if (g.contains("fixture")) {
    unknown_keys(g, {"fixture"}, "drift.", diag);
    if (!g["fixture"].is_string()) diag.push_back("drift.fixture must be a string");
    return;
  }
  unknown_keys(g, {"hamiltonian", "lindblads"}, "drift.", diag);
  for (const char* key : {"hamiltonian", "lindblads"}) {
    if (!g.contains(key)) continue;
    if (!g[key].is_array()) {
      diag.push_back(std::string("drift.") + key + " must be a list");
      continue;
    }
    for (auto& t : g[key]) {
      if (!t.is_object()) {
        diag.push_back(std::string("drift.") + key + " entries must be objects");
        continue;
      }
      unknown_keys(t, {"support", "matrix"}, std::string("drift.") + key + "[].", diag);
      if (!t.contains("matrix") || !is_matrix(t["matrix"]))
        diag.push_back(std::string("drift.") + key + " entry needs a square complex matrix");
      if (t.contains("support") && !t["support"].is_null()) {
        if (!t["support"].is_array()) {
          diag.push_back("support must be a list or null");
          continue;
        }
        for (auto& a : t["support"])
          if (!a.is_number_integer() || a.get<int>() < 1 || a.get<int>() > n)
            diag.push_back("index out of range in drift support");
      }
    }
  }
}

}  // namespace

std::vector<std::string> validate(const json& j) {
  std::vector<std::string> diag;
  if (!j.is_object()) return {"spec must be a JSON object"};
  unknown_keys(j, {"system", "neighborhoods", "target", "drift", "mode", "options"}, "", diag);
  for (const char* key : {"system", "neighborhoods", "target", "mode"})
    if (!j.contains(key)) diag.push_back(std::string("missing key: ") + key);

  int n = 0;
  std::vector<int> dims;
  if (j.contains("system")) {
    const auto& s = j["system"];
    if (!s.is_object() || !s.contains("dims") || !s["dims"].is_array() || s["dims"].empty()) {
      diag.push_back("system.dims must be a non-empty list");
    } else {
      unknown_keys(s, {"dims"}, "system.", diag);
      for (auto& d : s["dims"]) {
        if (!d.is_number_integer() || d.get<int>() < 2)
          diag.push_back("system.dims entries must be integers >= 2");
        else
          dims.push_back(d.get<int>());
      }
      n = static_cast<int>(s["dims"].size());
    }
  }

  if (j.contains("neighborhoods")) {
    const auto& nb = j["neighborhoods"];
    if (!nb.is_array() || nb.empty()) {
      diag.push_back("neighborhoods must be a non-empty list");
    } else {
      std::set<int> covered;
      for (std::size_t k = 0; k < nb.size(); ++k) {
        if (!nb[k].is_array() || nb[k].empty()) {
          diag.push_back("neighborhood " + std::to_string(k + 1) + " must be a non-empty list");
          continue;
        }
        for (auto& a : nb[k]) {
          if (!a.is_number_integer()) {
            diag.push_back("neighborhood " + std::to_string(k + 1) + " has a non-integer entry");
            continue;
          }
          const int v = a.get<int>();
          if (v < 1 || v > n)
            diag.push_back("index out of range: neighborhood " + std::to_string(k + 1) + " contains " +
                           std::to_string(v));
          else
            covered.insert(v);
        }
      }
      for (int a = 1; a <= n; ++a)
        if (!covered.count(a)) diag.push_back("uncovered subsystem " + std::to_string(a));
    }
  }

  if (j.contains("target")) {
    const auto& t = j["target"];
    if (!t.is_object() || (t.contains("name") == t.contains("amplitudes"))) {
      diag.push_back("target needs exactly one of name or amplitudes");
    } else if (t.contains("name")) {
      unknown_keys(t, {"name"}, "target.", diag);
      try {
        auto s = state_by_name(t["name"].get<std::string>());
        if (static_cast<int>(dims.size()) != s.n || std::any_of(dims.begin(), dims.end(), [](int d) { return d != 2; }))
          diag.push_back("target " + s.label + " does not match system.dims");
      } catch (const std::exception& e) {
        diag.push_back(e.what());
      }
    } else {
      unknown_keys(t, {"amplitudes"}, "target.", diag);
      const auto& a = t["amplitudes"];
      long long total = 1;
      for (int d : dims) total *= d;
      if (!a.is_array() || static_cast<long long>(a.size()) != total)
        diag.push_back("target.amplitudes length does not match the dimension");
      else
        for (auto& z : a)
          if (!is_complex(z)) {
            diag.push_back("amplitudes must be [re, im] pairs");
            break;
          }
    }
  }

  if (j.contains("drift")) check_generator(j["drift"], n, diag);

  if (j.contains("mode") && (!j["mode"].is_string() || !kModes.count(j["mode"].get<std::string>())))
    diag.push_back("unknown mode");

  if (j.contains("options")) {
    const auto& o = j["options"];
    if (!o.is_object()) {
      diag.push_back("options must be an object");
    } else {
      unknown_keys(o, {"gamma", "trials", "seed", "tol", "horizon", "h_prime"}, "options.", diag);
      for (const char* key : {"gamma", "tol", "horizon"})
        if (o.contains(key) && (!o[key].is_number() || o[key].get<double>() <= 0))
          diag.push_back(std::string("options.") + key + " must be a positive number");
      if (o.contains("trials") && (!o["trials"].is_number_integer() || o["trials"].get<int>() < 1))
        diag.push_back("options.trials must be a positive integer");
      if (o.contains("seed") && !o["seed"].is_number_unsigned()) diag.push_back("options.seed must be a non-negative integer");
      if (o.contains("h_prime") && !o["h_prime"].is_null()) {
        const auto& h = o["h_prime"];
        if (!h.is_object()) {
          diag.push_back("options.h_prime must be an object or null");
        } else if (h.contains("observable")) {
          unknown_keys(h, {"observable", "eigenvalue"}, "options.h_prime.", diag);
          if (!h["observable"].is_string() || static_cast<int>(h["observable"].get<std::string>().size()) != n)
            diag.push_back("options.h_prime.observable needs one Pauli letter per subsystem");
          if (h.contains("eigenvalue") && (!h["eigenvalue"].is_number_integer() ||
                                           std::abs(h["eigenvalue"].get<int>()) != 1))
            diag.push_back("options.h_prime.eigenvalue must be +1 or -1");
        } else if (h.contains("basis")) {
          unknown_keys(h, {"basis"}, "options.h_prime.", diag);
          if (!h["basis"].is_array() || h["basis"].empty()) diag.push_back("options.h_prime.basis must be a list of vectors");
        } else {
          diag.push_back("options.h_prime needs observable or basis");
        }
      }
    }
  }
  return diag;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!is_matrix(j)) throw SchemaError({"expected a square matrix of [re, im] pairs"});
  const Index n = static_cast<Index>(j.size());
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) m(i, k) = cplx(j[i][k][0].get<double>(), j[i][k][1].get<double>());
  return m;
}

namespace {

Vector vector_from_json(const json& a) {
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!is_complex(a[i])) throw SchemaError({"vectors must be lists of [re, im] pairs"});
    v(static_cast<Index>(i)) = cplx(a[i][0].get<double>(), a[i][1].get<double>());
  }
  return v;
}

json support_json(const std::optional<Neighborhood>& s) {
  if (!s) return nullptr;
  json a = json::array();
  for (int x : *s) a.push_back(x + 1);
  return a;
}

json operators_json(const std::vector<LocalOperator>& ops) {
  json a = json::array();
  for (auto& o : ops) a.push_back({{"support", support_json(o.support)}, {"matrix", matrix_json(o.local)}});
  return a;
}

json eigenvalues_json(const std::vector<cplx>& ev) {
  json a = json::array();
  for (auto& z : ev) a.push_back(complex_json(z));
  return a;
}

json dims_json(const std::vector<Index>& v) {
  json a = json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

}  // namespace

json generator_json(const LindbladGenerator& gen) {
  return {{"hamiltonian", operators_json(gen.hamiltonian_terms())}, {"lindblads", operators_json(gen.lindblad_terms())}};
}

LindbladGenerator parse_generator(const json& j, const ProblemSpec& spec) {
  if (j.contains("fixture")) {
    const std::string name = j["fixture"].get<std::string>();
    const int n = spec.space.size();
    auto num = [&](const std::string& prefix) {
      if (name.rfind(prefix, 0) != 0) return -1;
      return std::stoi(name.substr(prefix.size()));
    };
    if (name == "ghz3-qls") return ghz3_qls_controls().generator(false);
    if (name == "ghz3-qls-flawed") return ghz3_qls_controls().generator(true);
    if (int m = num("w-qls:"); m > 0) return w_qls_controls(m).generator(m);
    if (int m = num("ghz-cond:"); m > 0) return ghz_conditional_generator(m);
    if (int m = num("w-cond:"); m > 0) {
      if (m != n) throw SchemaError({"fixture " + name + " does not match system.dims"});
      auto r = w_conditional(m, spec.structure());
      if (!r.applicable) throw SchemaError({"fixture " + name + " is not applicable to these neighborhoods"});
      return r.generator(spec.space);
    }
    throw SchemaError({"unknown generator fixture: " + name});
  }
  auto terms = [&](const char* key) {
    std::vector<LocalOperator> out;
    if (!j.contains(key)) return out;
    for (auto& t : j[key]) {
      LocalOperator op;
      if (t.contains("support") && !t["support"].is_null()) {
        Neighborhood nb;
        for (auto& a : t["support"]) nb.push_back(a.get<int>() - 1);
        op.support = normalized(nb);
      }
      op.local = matrix_from_json(t["matrix"]);
      out.push_back(std::move(op));
    }
    return out;
  };
  auto hs = terms("hamiltonian");
  auto ls = terms("lindblads");
  try {
    return LindbladGenerator(spec.space, hs, ls);
  } catch (const std::exception& e) {
    throw SchemaError({std::string("bad generator: ") + e.what()});
  }
}

ProblemSpec parse_problem(const json& j) {
  auto diag = validate(j);
  if (!diag.empty()) throw SchemaError(diag);
  ProblemSpec p;
  p.space = MultipartiteSpace(j["system"]["dims"].get<std::vector<int>>());
  for (auto& nb : j["neighborhoods"]) {
    Neighborhood v;
    for (auto& a : nb) v.push_back(a.get<int>() - 1);
    p.neighborhoods.push_back(normalized(v));
  }
  const auto& t = j["target"];
  if (t.contains("name")) {
    auto s = state_by_name(t["name"].get<std::string>());
    p.target = s.vector;
    p.target_label = s.label;
  } else {
    p.target = vector_from_json(t["amplitudes"]);
    const double nrm = p.target.norm();
    if (nrm == 0) throw SchemaError({"target.amplitudes is the zero vector"});
    if (std::abs(nrm - 1.0) > 1e-6) p.warnings.push_back("target amplitudes renormalized (norm " + std::to_string(nrm) + ")");
    p.target /= nrm;
    p.target_label = "amplitudes";
  }
  if (j.contains("drift") && !j["drift"].is_null()) p.drift = j["drift"];
  p.mode = j["mode"].get<std::string>();
  if (j.contains("options")) {
    const auto& o = j["options"];
    p.options.gamma = o.value("gamma", p.options.gamma);
    p.options.trials = o.value("trials", p.options.trials);
    p.options.seed = o.value("seed", p.options.seed);
    p.options.tol = o.value("tol", p.options.tol);
    p.options.horizon = o.value("horizon", p.options.horizon);
    if (o.contains("h_prime") && !o["h_prime"].is_null()) {
      HPrimeSpec hp;
      const auto& h = o["h_prime"];
      if (h.contains("observable")) {
        hp.observable = h["observable"].get<std::string>();
        hp.eigenvalue = h.value("eigenvalue", 1);
      } else {
        for (auto& v : h["basis"]) hp.basis.push_back(vector_from_json(v));
      }
      p.options.h_prime = hp;
    }
  }
  if (p.space.all_qubits() && p.space.size() > 6)
    p.warnings.push_back("more than 6 qubits: dense superoperators will be slow");
  return p;
}

Subspace h_prime_subspace(const HPrimeSpec& hp, const MultipartiteSpace& space) {
  if (!hp.observable.empty()) {
    if (!space.all_qubits()) throw SchemaError({"Pauli observables need a qubit system"});
    return pauli_eigenspace(hp.observable, hp.eigenvalue);
  }
  Matrix cols(space.total_dim(), static_cast<Index>(hp.basis.size()));
  for (std::size_t i = 0; i < hp.basis.size(); ++i) {
    if (hp.basis[i].size() != space.total_dim()) throw SchemaError({"h_prime basis vector has the wrong length"});
    cols.col(static_cast<Index>(i)) = hp.basis[i];
  }
  return Subspace::span(cols);
}

namespace {

json record_json(const TrialRecord& r) {
  json j = {{"trial", r.trial},
            {"seed", r.seed},
            {"method", r.method},
            {"zero_multiplicity", r.multiplicity},
            {"multiplicity_is_lower_bound", r.multiplicity_is_bound},
            {"fidelity", r.fidelity},
            {"gap", r.gap},
            {"rightmost_eigenvalues", eigenvalues_json(r.rightmost)},
            {"success", r.success}};
  if (r.method == "did") j["did"] = {{"steps", r.did_steps}, {"basin_dims", dims_json(r.basin_dims)}};
  return j;
}

json dqls_json(const DqlsReport& r) {
  json sup = json::array();
  for (auto& s : r.local_supports) sup.push_back(s.dim());
  return {{"verdict", r.verdict == DqlsVerdict::Dqls ? "DQLS" : "NotDQLS"}, {"d0", r.d0}, {"local_support_dims", sup}};
}

json did_json(const DidDecomposition& d) {
  return {{"outcome", d.outcome == DidOutcome::Completed ? "Completed" : "NotGas"},
          {"steps", d.steps},
          {"basin_dims", dims_json(d.basin_dims())},
          {"remainder_dim", d.remainder.dim()}};
}

json gas_json(const GasReport& g) {
  return {{"gas", g.gas},
          {"zero_multiplicity", g.multiplicity},
          {"fidelity", g.fidelity},
          {"gap", g.gap},
          {"marginal", g.marginal},
          {"rightmost_eigenvalues", eigenvalues_json(g.rightmost)}};
}

json synthesis_json(const SynthesisResult& s) {
  json recs = json::array();
  for (auto& r : s.records) recs.push_back(record_json(r));
  json j = {{"verified", to_string(s.verified)},
            {"seed", s.seed},
            {"trials_run", s.trials},
            {"trials", recs},
            {"diagnostic", s.diagnostic},
            {"generator", generator_json(s.generator)}};
  if (s.h_prime) j["h_prime_dim"] = s.h_prime->dim();
  return j;
}

std::vector<Matrix> initial_states(Index d, std::uint64_t seed) {
  std::vector<Matrix> out;
  out.push_back(Matrix::Identity(d, d) / static_cast<double>(d));
  Matrix zero = Matrix::Zero(d, d);
  zero(0, 0) = 1.0;
  out.push_back(zero);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int k = 0; k < 2; ++k) {
    Matrix a(d, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i) a(i, j) = cplx(g(rng), g(rng));
    Matrix r = a * a.adjoint();
    out.push_back(r / r.trace().real());
  }
  return out;
}

}  // namespace

RunOutput run(ProblemSpec spec, const RunOptions& ro) {
  const auto start = std::chrono::steady_clock::now();
  if (ro.seed) spec.options.seed = *ro.seed;
  if (ro.tol) spec.options.tol = *ro.tol;
  RunOutput out;
  json& rep = out.report;
  rep["mode"] = spec.mode;
  rep["target"] = spec.target_label;
  rep["dims"] = spec.space.dims();
  json nbs = json::array();
  for (auto& nb : spec.neighborhoods) nbs.push_back(support_json(nb));
  rep["neighborhoods"] = nbs;
  rep["seed"] = spec.options.seed;
  rep["tol"] = spec.options.tol;
  rep["warnings"] = spec.warnings;

  const auto nbhds = spec.structure();
  const Vector& psi = spec.target;
  const double tol = spec.options.tol;
  SynthesisOptions so;
  so.gamma = spec.options.gamma;
  so.trials = spec.options.trials;
  so.seed = spec.options.seed;
  so.tol = tol;
  so.jobs = ro.jobs;
  so.force = ro.force;

  auto finish = [&]() {
    rep["exit_code"] = out.exit_code;
    rep["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  try {
    rep["dqls"] = dqls_json(dqls_test(psi, nbhds, tol));

    std::optional<LindbladGenerator> drift;
    if (spec.drift) drift = parse_generator(*spec.drift, spec);

    if (spec.mode == "dqls-test") return finish();

    if (spec.mode == "synth-qls" || spec.mode == "synth-conditional") {
      if (drift) {
        auto comp = drift_compensate(*drift, psi, tol);
        json cj = json::array();
        for (auto& c : comp)
          cj.push_back({{"source", support_json(c.source)}, {"quasi_local", c.quasi_local},
                        {"support", support_json(c.op.support)}, {"matrix", matrix_json(c.op.local)}});
        rep["compensation"] = cj;
        so.background = with_compensation(*drift, comp);
      }
      SynthesisResult s;
      if (spec.mode == "synth-qls") {
        s = synthesize_qls(psi, nbhds, so);
      } else {
        std::optional<Subspace> hp;
        if (spec.options.h_prime) hp = h_prime_subspace(*spec.options.h_prime, spec.space);
        s = synthesize_conditional(psi, nbhds, hp, so);
      }
      rep["synthesis"] = synthesis_json(s);
      if (s.verified == Verified::Infeasible) out.exit_code = kInfeasible;
      if (s.verified == Verified::Failed) out.exit_code = kVerification;
      return finish();
    }

    if (spec.mode == "construct-wtype") {
      auto w = construct_wtype(psi, nbhds, tol);
      json nj = json::array();
      for (auto& n : w.neighborhoods)
        nj.push_back({{"wanted_dim", n.wanted.dim()}, {"unwanted_dim", n.unwanted.dim()}, {"strict", n.strict}});
      rep["wtype"] = {{"applicable", w.applicable}, {"neighborhoods", nj}};
      if (!w.applicable) {
        rep["wtype"]["failing_neighborhood"] = w.failing_neighborhood + 1;
        out.exit_code = kInfeasible;
        return finish();
      }
      auto gen = w.generator(spec.space);
      rep["wtype"]["h_prime_dim"] = w.h_prime.dim();
      rep["wtype"]["generator"] = generator_json(gen);
      auto chk = verify_conditional(gen, psi, w.h_prime);
      rep["wtype"]["h_prime_invariant"] = chk.invariant_hp;
      rep["wtype"]["restricted"] = gas_json(chk.restricted);
      rep["wtype"]["conditionally_as"] = chk.conditionally_as;
      if (!chk.conditionally_as) out.exit_code = kVerification;
      return finish();
    }

    if (!drift) throw SchemaError({"mode " + spec.mode + " needs a generator in drift"});

    if (spec.mode == "verify") {
      auto inv = is_invariant(*drift, psi, tol);
      json ell = json::array();
      for (auto& z : inv.ell) ell.push_back(complex_json(z));
      rep["invariance"] = {{"invariant", inv.invariant},
                           {"ell", ell},
                           {"h", inv.h},
                           {"hamiltonian_residual", inv.hamiltonian_residual},
                           {"violation", inv.first_violation}};
      rep["quasi_local"] = drift->quasi_local(nbhds);
      if (!inv.invariant) {
        out.exit_code = kVerification;
        return finish();
      }
      auto rec = verify_gas(*drift, psi, 1024, tol);
      rep["verification"] = record_json(rec);
      rep["gas"] = rec.success;
      rep["zero_multiplicity"] = rec.multiplicity;
      rep["did"] = did_json(did(*drift, Subspace::span(psi), tol));
      bool ok = rec.success;
      if (spec.options.h_prime) {
        auto hp = h_prime_subspace(*spec.options.h_prime, spec.space);
        auto chk = verify_conditional(*drift, psi, hp);
        rep["conditional"] = {{"h_prime_dim", hp.dim()},
                              {"h_prime_invariant", chk.invariant_hp},
                              {"complement_invariant", chk.invariant_complement},
                              {"commutator", chk.commutator},
                              {"restricted", gas_json(chk.restricted)},
                              {"conditionally_as", chk.conditionally_as}};
        ok = chk.conditionally_as;
      }
      if (!ok) out.exit_code = kVerification;
      return finish();
    }

    if (spec.mode == "simulate") {
      auto rho0s = initial_states(spec.space.total_dim(), spec.options.seed);
      auto s = convergence_report(*drift, psi, rho0s, spec.options.horizon, 40, ro.jobs);
      const char* names[] = {"mixed", "zero", "random1", "random2"};
      json fin = json::array();
      for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
        fin.push_back({{"initial", names[i]}, {"final_fidelity", s.final_fidelities[i]}});
        if (ro.want_csv) out.trajectories.emplace_back(names[i], s.trajectories[i]);
      }
      rep["simulation"] = {{"horizon", spec.options.horizon},
                           {"samples", 40},
                           {"final", fin},
                           {"rate", std::isfinite(s.rate) ? json(s.rate) : json(nullptr)},
                           {"r_squared", s.r_squared},
                           {"non_monotone", s.non_monotone},
                           {"trace_drift", s.trace_drift},
                           {"fallback", s.fallback}};
      if (s.trace_drift) out.exit_code = kVerification;
      return finish();
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const NotCompensable& e) {
    rep["error"] = {{"kind", "NotCompensable"}, {"index", e.index + 1}, {"message", e.what()}};
    out.exit_code = kInfeasible;
    return finish();
  } catch (const QlViolation& e) {
    rep["error"] = {{"kind", "QlViolation"}, {"message", e.what()}};
    out.exit_code = kInfeasible;
    return finish();
  } catch (const NotInvariant& e) {
    rep["error"] = {{"kind", "NotInvariant"}, {"message", e.what()}};
    out.exit_code = kVerification;
    return finish();
  } catch (const InvariancePrecondition& e) {
    rep["error"] = {{"kind", "InvariancePrecondition"}, {"message", e.what()}};
    out.exit_code = kVerification;
    return finish();
  }
  throw SchemaError({"unknown mode"});
}

}  // namespace qlstab
