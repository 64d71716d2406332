// Command-line front end: solve | gen | bench | verify.
//
// Every option can also be set through an environment variable with the
// ETRS_ prefix, e.g. ETRS_TAU=1e-5 or ETRS_DENSE_CROSSOVER=200.

#include "etrs/etrs.hpp"

#include <CLI11.hpp>

#include <fmt/core.h>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

struct GlobalFlags {
  etrs::SolverConfig cfg;
};

void add_solver_flags(CLI::App& app, etrs::SolverConfig& cfg) {
  app.add_option("--tau", cfg.tau, "hard-case threshold on ‖y1‖/‖y‖")->envname("ETRS_TAU")->capture_default_str();
  app.add_option("--eig-tol", cfg.eig_tol, "symmetric eigensolver tolerance")
      ->envname("ETRS_EIG_TOL")
      ->capture_default_str();
  app.add_option("--cg-tol", cfg.cg_tol, "relative CG tolerance")->envname("ETRS_CG_TOL")->capture_default_str();
  app.add_option("--dense-crossover", cfg.dense_crossover, "largest n handled with dense factorizations")
      ->envname("ETRS_DENSE_CROSSOVER")
      ->capture_default_str();
}

std::vector<etrs::Index> parse_sizes(const std::string& s) {
  std::vector<etrs::Index> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t end = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, end - pos);
    if (!tok.empty()) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size() || v < 1 || v != std::floor(v)) throw std::invalid_argument(tok);
        out.push_back(static_cast<etrs::Index>(v));
      } catch (const std::exception&) {
        throw CLI::ValidationError("--sizes", fmt::format("'{}' is not a positive integer", tok));
      }
    }
    pos = end + 1;
  }
  if (out.empty()) throw CLI::ValidationError("--sizes", "empty size list");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw etrs::Error(fmt::format("cannot write {}", path));
  out << text;
}

int cmd_solve(const std::string& path, const std::string& output, bool dense, const etrs::SolverConfig& cfg) {
  etrs::InstanceFile f;
  try {
    f = etrs::read_instance(path);
  } catch (const etrs::ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  try {
    const etrs::ETRSSolution s = dense ? etrs::oracle_etrs(f.inst) : etrs::solve_etrs(f.inst, cfg);
    nlohmann::json j = etrs::solution_to_json(s);
    j["solver"] = dense ? "dense" : "default";
    const std::string out = output.empty() ? (std::filesystem::path(path) / "solution.json").string() : output;
    write_text(out, j.dump(1) + "\n");
    etrs::RunRow row;
    row.n = f.inst.n();
    row.cls = f.cls;
    row.seed = f.seed;
    row.provenance = std::string(etrs::to_string(s.provenance));
    row.obj = s.obj;
    row.kkt1 = s.kkt1;
    row.kkt2 = s.kkt2;
    row.time_total = s.time_total;
    row.time_duality = s.time_duality;
    row.lngm_detected = s.lngm_searched && s.lngm.found();
    fmt::print("{}", etrs::format_csv({row}));
    return 0;
  } catch (const etrs::InfeasibleError& e) {
    fmt::print(stderr, "infeasible: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended trust-region subproblem solver"};
  app.require_subcommand(1);
  etrs::SolverConfig cfg;

  // solve
  auto* solve = app.add_subcommand("solve", "solve an instance directory (A.mtx + meta.json)");
  std::string solve_path, solve_out;
  bool solve_dense = false;
  solve->add_option("path", solve_path, "instance directory")->required();
  solve->add_option("-o,--output", solve_out, "solution file (default <path>/solution.json, '-' for stdout)");
  solve->add_flag("--dense", solve_dense, "use the dense reference solver");
  add_solver_flags(*solve, cfg);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a benchmark instance");
  etrs::GenSpec spec;
  std::string gen_class = "IV", gen_dir;
  double gen_delta = 0.0;
  gen->add_option("--class", gen_class, "instance class: I, II, III or IV")->envname("ETRS_CLASS")->capture_default_str();
  gen->add_option("-n,--n", spec.n, "dimension")->envname("ETRS_N")->capture_default_str();
  gen->add_option("--density", spec.density, "off-diagonal density")->envname("ETRS_DENSITY")->capture_default_str();
  gen->add_option("--seed", spec.seed, "random seed")->envname("ETRS_SEED")->capture_default_str();
  gen->add_option("--delta", gen_delta, "ball radius squared (class default when omitted)");
  gen->add_option("-o,--out-dir", gen_dir, "output directory")->required();
  add_solver_flags(*gen, cfg);

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark class over several sizes");
  etrs::BenchOptions bo;
  std::string bench_class = "IV", bench_sizes, bench_out = "text", bench_csv;
  bool no_timing = false;
  bench->add_option("--class", bench_class, "instance class: I, II, III or IV")
      ->envname("ETRS_CLASS")
      ->capture_default_str();
  bench->add_option("--sizes", bench_sizes, "comma-separated dimensions")->required();
  bench->add_option("--reps", bo.reps, "instances per size")->envname("ETRS_REPS")->capture_default_str();
  bench->add_option("--density", bo.density, "off-diagonal density")->envname("ETRS_DENSITY")->capture_default_str();
  bench->add_option("--seed", bo.seed, "base seed")->envname("ETRS_SEED")->capture_default_str();
  bench->add_option("--workers", bo.workers, "worker threads")->envname("ETRS_WORKERS")->capture_default_str();
  bench->add_option("--out", bench_out, "stdout format")->check(CLI::IsMember({"csv", "text"}))->capture_default_str();
  bench->add_option("--csv", bench_csv, "also write the CSV to this file");
  bench->add_flag("--no-timing", no_timing, "report zero times (reproducible CSV)");
  add_solver_flags(*bench, cfg);

  // verify
  auto* verify = app.add_subcommand("verify", "cross-check the solver against the dense reference");
  etrs::VerifyOptions vo;
  std::string verify_sizes;
  verify->add_option("--sizes", verify_sizes, "comma-separated dimensions (each at most the dense crossover)")
      ->required();
  verify->add_option("--reps", vo.reps, "repetitions per size (each covers all categories)")->capture_default_str();
  verify->add_option("--seed", vo.seed, "base seed")->envname("ETRS_SEED")->capture_default_str();
  verify->add_option("--tol", vo.tol, "relative objective tolerance")->capture_default_str();
  verify->add_option("--workers", vo.workers, "worker threads")->envname("ETRS_WORKERS")->capture_default_str();
  verify->add_flag("--inject-failure", vo.inject_failure, "perturb one result to test the harness");
  add_solver_flags(*verify, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_path, solve_out, solve_dense, cfg);

    if (gen->parsed()) {
      spec.cls = etrs::parse_class(gen_class);
      if (gen->count("--delta") > 0) spec.delta_override = gen_delta;
      const etrs::GeneratedInstance g = etrs::generate(spec, cfg);
      etrs::write_instance(gen_dir, g);
      fmt::print("wrote class {} instance n={} seed={} to {}\n", g.cls, spec.n, spec.seed, gen_dir);
      return 0;
    }

    if (bench->parsed()) {
      bo.cls = etrs::parse_class(bench_class);
      bo.sizes = parse_sizes(bench_sizes);
      bo.timing = !no_timing;
      const auto rows = etrs::run_bench(bo, cfg);
      const std::string csv = etrs::format_csv(rows);
      if (!bench_csv.empty()) write_text(bench_csv, csv);
      write_text("-", bench_out == "csv" ? csv : etrs::format_text(rows));
      return 0;
    }

    if (verify->parsed()) {
      vo.sizes = parse_sizes(verify_sizes);
      const auto cases = etrs::run_verify(vo, cfg);
      fmt::print("{}", etrs::format_verify(cases, vo.tol));
      const bool ok = std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.pass; });
      return ok ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
