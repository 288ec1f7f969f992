#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qlstab/problem.hpp"

namespace fs = std::filesystem;
using qlstab::json;

namespace {

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qlstab::SchemaError({"cannot open " + path});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw qlstab::SchemaError({std::string("invalid JSON: ") + e.what()});
  }
}

void print_diagnostics(const std::vector<std::string>& diag) {
  json j = {{"diagnostics", diag}};
  std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-local stabilization toolkit"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  bool csv = false, quiet = false, force = false;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "run a problem spec and print the report");
  run->add_option("--spec", spec_path, "problem spec (JSON)")->required();
  run->add_option("--out", out_dir, "write report.json and CSV trajectories here");
  run->add_flag("--csv", csv, "export trajectories as CSV (simulate mode)");
  run->add_option("--seed", seed, "override options.seed");
  run->add_flag("--quiet", quiet, "do not print the report");
  run->add_option("--jobs", jobs, "concurrent synthesis trials")->check(CLI::PositiveNumber);
  run->add_flag("--force", force, "run randomized trials even when a no-go result applies");

  auto* val = app.add_subcommand("validate", "lint a problem spec without running it");
  val->add_option("--spec", spec_path, "problem spec (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const json j = load(spec_path);
    if (*val) {
      auto diag = qlstab::validate(j);
      print_diagnostics(diag);
      return diag.empty() ? qlstab::kOk : qlstab::kSchema;
    }

    auto spec = qlstab::parse_problem(j);
    for (auto& w : spec.warnings) std::cerr << "warning: " << w << '\n';
    qlstab::RunOptions ro;
    ro.jobs = jobs;
    ro.force = force;
    ro.want_csv = csv;
    ro.seed = seed;
    if (const char* t = std::getenv("QLSTAB_TOL")) {
      try {
        ro.tol = std::stod(t);
      } catch (const std::exception&) {
        throw qlstab::SchemaError({"QLSTAB_TOL is not a number"});
      }
    }
    auto out = qlstab::run(std::move(spec), ro);

    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream(fs::path(out_dir) / "report.json") << out.report.dump(2) << '\n';
      for (auto& [name, tr] : out.trajectories) {
        std::ofstream f(fs::path(out_dir) / ("trajectory_" + name + ".csv"));
        tr.write_csv(f);
      }
    } else if (csv) {
      for (auto& [name, tr] : out.trajectories) {
        std::cerr << "# " << name << '\n';
        tr.write_csv(std::cerr);
      }
    }
    if (!quiet) std::cout << out.report.dump(2) << '\n';
    return out.exit_code;
  } catch (const qlstab::SchemaError& e) {
    print_diagnostics(e.diagnostics);
    return qlstab::kSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qlstab::kSchema;
  }
}
