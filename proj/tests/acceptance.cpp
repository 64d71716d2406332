// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [criterion ...]   run only the listed criteria (1-7)

#include "etrs/etrs.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace etrs;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  VerifyOptions opt;
  opt.sizes = {3, 8, 15, 25, 35, 50};
  opt.reps = 6;
  opt.seed = 2024;
  const auto cases = run_verify(opt);
  const double secs = seconds_since(t0);
  std::size_t pass = 0;
  double worst = 0.0;
  for (const auto& c : cases) {
    pass += c.pass ? 1 : 0;
    if (c.error.empty()) worst = std::max(worst, c.rel_err);
  }
  return {pass == cases.size() && cases.size() >= 300 && secs < 60.0,
          fmt::format("{}/{} within 1e-8, worst {:.2e}, {:.1f} s", pass, cases.size(), worst, secs)};
}

Outcome pencil_characterization() {
  int ok = 0;
  double worst_lambda = 0.0, worst_norm = 0.0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 49);
    const double delta = std::pow(10.0, static_cast<double>(seed % 5) - 2.0);
    const PlantedTRS L = gen_lngm_trs(n, 1.0, seed, delta, MuRule::uniform);
    const SymOp A = SymOp::sparse(L.A);
    const OracleLNGM o = oracle_lngm(dense_eig(Matrix(L.A), L.a), L.a, L.delta);
    const PencilEigs pe = top_real_eigs(build_pencil(A, L.a, L.delta), 2);
    const LNGMResult r = find_lngm(A, L.a, L.delta, extreme_eigs(A));
    if (o.roots.empty() || pe.pairs.size() < 2 || !r.found()) {
      if (first.empty()) first = fmt::format("seed {}: missing eigenvalue or root", seed);
      continue;
    }
    const double root = *std::max_element(o.roots.begin(), o.roots.end());
    const double dl = std::abs(pe.pairs[1].lambda - root) / std::max(1.0, std::abs(root));
    const double dn = std::abs(r.x.squaredNorm() - L.delta) / std::max(1.0, L.delta);
    worst_lambda = std::max(worst_lambda, dl);
    worst_norm = std::max(worst_norm, dn);
    if (dl <= 1e-9 && dn <= 1e-8)
      ++ok;
    else if (first.empty())
      first = fmt::format("seed {}: |Δλ| {:.2e}, |‖x‖²−δ| {:.2e}", seed, dl, dn);
  }
  return {ok == 100, fmt::format("{}/100, worst |Δλ| {:.2e}, worst |‖x‖²−δ| {:.2e}{}", ok, worst_lambda, worst_norm,
                                 first.empty() ? "" : "; " + first)};
}

Outcome class_four_detection() {
  BenchOptions opt;
  opt.cls = InstanceClass::IV;
  opt.sizes = {100, 200, 300, 400};
  opt.reps = 10;
  opt.density = 0.1;
  const auto rows = run_bench(opt);
  bool pass = true;
  std::string per_size;
  for (const Aggregate& g : aggregate(rows)) {
    per_size += fmt::format(" n={}:{}", g.n, g.lngm);
    pass = pass && g.lngm == 10 && g.failures == 0;
  }
  double worst = 0.0;
  for (const RunRow& row : rows) {
    if (!row.error.empty()) continue;
    const ETRSSolution o = oracle_etrs(generate({opt.cls, row.n, opt.density, row.seed, std::nullopt}).inst);
    worst = std::max(worst, relative_gap(row.obj, o.obj));
  }
  pass = pass && worst <= 1e-6;
  return {pass, fmt::format("# LNGM per size{}; worst rel obj vs oracle {:.2e}", per_size, worst)};
}

Outcome large_kkt() {
  bool pass = true;
  std::string detail;
  for (InstanceClass cls : {InstanceClass::II, InstanceClass::IV}) {
    for (int rep = 0; rep < 2; ++rep) {
      const GenSpec spec{cls, 10000, 1e-4, bench_seed(1, 10000, rep), std::nullopt};
      const RunRow row = run_one(spec, {}, true);
      const bool ok =
          row.error.empty() && row.kkt1 <= 1e-6 && std::abs(row.kkt2) <= 1e-9 && row.time_total < 60.0;
      pass = pass && ok;
      detail += row.error.empty() ? fmt::format(" {}#{}: kkt1 {:.1e} kkt2 {:.1e} {:.1f}s;", to_string(cls), rep,
                                                row.kkt1, row.kkt2, row.time_total)
                                  : fmt::format(" {}#{}: {};", to_string(cls), rep, row.error);
    }
  }
  return {pass, detail};
}

Outcome class_three_duality() {
  int ok = 0, total = 0;
  double worst_kkt = 0.0;
  std::string first;
  for (Index n : {Index{10000}, Index{20000}}) {
    for (int rep = 0; rep < 10; ++rep) {
      ++total;
      const std::uint64_t seed = bench_seed(1, n, rep);
      try {
        const GeneratedInstance g = generate({InstanceClass::III, n, 1e-4, seed, std::nullopt});
        const ETRSSolution s = solve_etrs(g.inst);
        const bool holds = s.duality && s.duality->verdict == DualityVerdict::holds;
        worst_kkt = std::max(worst_kkt, s.kkt1);
        if (holds && s.kkt1 <= 1e-8)
          ++ok;
        else if (first.empty())
          first = fmt::format("n={} seed={}: verdict {}, kkt1 {:.2e}", n, seed,
                              s.duality ? std::string(to_string(s.duality->verdict)) : std::string("none"), s.kkt1);
      } catch (const std::exception& e) {
        if (first.empty()) first = fmt::format("n={} seed={}: {}", n, seed, e.what());
      }
    }
  }
  return {ok == total,
          fmt::format("{}/{} hold with kkt1 ≤ 1e-8, worst kkt1 {:.2e}{}", ok, total, worst_kkt,
                      first.empty() ? "" : "; " + first)};
}

Outcome property_suites() {
  const int rc = run_command(fmt::format("{} > /dev/null", ETRS_PROPERTIES_PATH));
  return {rc == 0, rc == 0 ? "all six suites pass on 50 seeds" : fmt::format("properties exited with {}", rc)};
}

Outcome bench_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("etrs_accept_{}", ::getpid());
  std::filesystem::create_directories(dir);
  const std::string base =
      fmt::format("{} bench --class IV --sizes 50,120 --reps 3 --density 0.1 --seed 17 --no-timing --out csv",
                  ETRS_CLI_PATH);
  const int r1 = run_command(fmt::format("{} > {}", base, (dir / "a.csv").string()));
  const int r2 = run_command(fmt::format("{} > {}", base, (dir / "b.csv").string()));
  const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
  std::filesystem::remove_all(dir);
  const bool pass = r1 == 0 && r2 == 0 && !a.empty() && a == b;
  return {pass, fmt::format("{} bytes, {}", a.size(), a == b ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"oracle equivalence on mixed instances", oracle_equivalence},
      {"second real pencil eigenvalue is the LNGM multiplier", pencil_characterization},
      {"class IV LNGM detection", class_four_detection},
      {"KKT residuals at n = 1e4 (classes II, IV)", large_kkt},
      {"class III duality verdict at n = 1e4, 2e4", class_three_duality},
      {"property suites", property_suites},
      {"bench CSV determinism", bench_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    all = all && o.pass;
    fmt::print("{} [{}] {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail,
               seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
