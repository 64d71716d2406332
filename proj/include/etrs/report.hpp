// Benchmark runs, result tables and the oracle cross-check harness.
#pragma once

#include "etrs/instances.hpp"
#include "etrs/oracle.hpp"

#include <atomic>
#include <map>
#include <thread>

namespace etrs {

struct RunRow {
  Index n = 0;
  std::string cls;
  std::uint64_t seed = 0;
  double density = 0.0;
  std::string provenance;
  double obj = 0.0;
  double kkt1 = 0.0;
  double kkt2 = 0.0;
  double time_total = 0.0;
  double time_duality = 0.0;
  bool lngm_detected = false;
  std::string error;  ///< empty on success
};

inline constexpr std::string_view kCsvHeader =
    "n,class,seed,density,provenance,obj,kkt1,kkt2,time_total,time_duality,lngm_detected,error";

struct BenchOptions {
  InstanceClass cls = InstanceClass::IV;
  std::vector<Index> sizes;
  int reps = 10;
  double density = 0.1;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  bool timing = true;  ///< false reports zero times, making the CSV reproducible byte for byte
  std::optional<double> delta;
};

/// Seed of repetition `rep` at dimension `n`; any row can be regenerated from it.
inline std::uint64_t bench_seed(std::uint64_t base, Index n, int rep) {
  return SplitMix64::derive(base, static_cast<std::uint64_t>(n) * 1000003ULL + static_cast<std::uint64_t>(rep));
}

inline RunRow run_one(const GenSpec& spec, const SolverConfig& cfg, bool timing) {
  RunRow row;
  row.n = spec.n;
  row.cls = std::string(to_string(spec.cls));
  row.seed = spec.seed;
  row.density = spec.density;
  try {
    const GeneratedInstance g = generate(spec, cfg);
    const ETRSSolution s = solve_etrs(g.inst, cfg);
    row.provenance = std::string(to_string(s.provenance));
    row.obj = s.obj;
    row.kkt1 = s.kkt1;
    row.kkt2 = s.kkt2;
    row.lngm_detected = s.lngm_searched && s.lngm.found();
    if (timing) {
      row.time_total = s.time_total;
      row.time_duality = s.time_duality;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// Runs `jobs[i]()` for every i on a pool of `workers` threads; results keep the job order.
template <class R>
std::vector<R> parallel_map(const std::vector<std::function<R()>>& jobs, unsigned workers) {
  std::vector<R> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = jobs[i]();
  };
  const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < w; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

inline std::vector<RunRow> run_bench(const BenchOptions& opt, const SolverConfig& cfg = {}) {
  if (opt.sizes.empty()) throw std::invalid_argument("bench: empty size list");
  if (opt.reps < 1) throw std::invalid_argument(fmt::format("bench: reps must be positive, got {}", opt.reps));
  std::vector<std::function<RunRow()>> jobs;
  for (Index n : opt.sizes) {
    for (int rep = 0; rep < opt.reps; ++rep) {
      GenSpec spec{opt.cls, n, opt.density, bench_seed(opt.seed, n, rep), opt.delta};
      jobs.emplace_back([spec, cfg, timing = opt.timing] { return run_one(spec, cfg, timing); });
    }
  }
  return parallel_map(jobs, opt.workers);
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string format_csv(const std::vector<RunRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{:.17g},{},{:.17g},{:.6e},{:.6e},{:.6f},{:.6f},{},{}\n", r.n, r.cls, r.seed, r.density,
                       r.provenance, r.obj, r.kkt1, r.kkt2, r.time_total, r.time_duality, r.lngm_detected ? 1 : 0,
                       detail::csv_escape(r.error));
  }
  return out;
}

struct Aggregate {
  std::string cls;
  Index n = 0;
  int count = 0;
  int failures = 0;
  double kkt1 = 0.0, kkt2 = 0.0, time_total = 0.0, time_duality = 0.0;
  int lngm = 0;
};

/// Means over successful rows per (class, n), in first-appearance order.
inline std::vector<Aggregate> aggregate(const std::vector<RunRow>& rows) {
  std::vector<Aggregate> out;
  std::map<std::pair<std::string, Index>, std::size_t> idx;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.cls, r.n);
    auto it = idx.find(key);
    if (it == idx.end()) {
      it = idx.emplace(key, out.size()).first;
      out.push_back({r.cls, r.n});
    }
    Aggregate& a = out[it->second];
    if (!r.error.empty()) {
      ++a.failures;
      continue;
    }
    ++a.count;
    a.kkt1 += r.kkt1;
    a.kkt2 += std::abs(r.kkt2);
    a.time_total += r.time_total;
    a.time_duality += r.time_duality;
    a.lngm += r.lngm_detected ? 1 : 0;
  }
  for (auto& a : out) {
    if (a.count == 0) continue;
    a.kkt1 /= a.count;
    a.kkt2 /= a.count;
    a.time_total /= a.count;
    a.time_duality /= a.count;
  }
  return out;
}

inline std::string format_text(const std::vector<RunRow>& rows) {
  std::string out = fmt::format("{:<6} {:>8} {:>5} {:>12} {:>12} {:>10} {:>10} {:>7} {:>6}\n", "class", "n", "runs",
                                "kkt1", "|kkt2|", "time[s]", "dual[s]", "# LNGM", "fail");
  for (const auto& a : aggregate(rows)) {
    out += fmt::format("{:<6} {:>8} {:>5} {:>12.4e} {:>12.4e} {:>10.4f} {:>10.4f} {:>7} {:>6}\n", a.cls, a.n, a.count,
                       a.kkt1, a.kkt2, a.time_total, a.time_duality, a.lngm, a.failures);
  }
  for (const auto& r : rows)
    if (!r.error.empty()) out += fmt::format("error: class {} n={} seed={}: {}\n", r.cls, r.n, r.seed, r.error);
  return out;
}

// ---------------------------------------------------------------------------
// Oracle cross-check

struct VerifyCase {
  std::string label;
  Index n = 0;
  std::uint64_t seed = 0;
  double obj = 0.0;
  double oracle_obj = 0.0;
  double rel_err = 0.0;
  std::string provenance, oracle_provenance;
  bool pass = false;
  std::string error;
};

struct VerifyOptions {
  std::vector<Index> sizes;
  int reps = 1;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  bool inject_failure = false;  ///< perturb the first solution to exercise the failure path
  unsigned workers = 1;
};

inline double relative_gap(double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); }

/// Each (size, rep) pair runs all mixed categories once.
inline std::vector<VerifyCase> run_verify(const VerifyOptions& opt, const SolverConfig& cfg = {}) {
  if (opt.sizes.empty()) throw std::invalid_argument("verify: empty size list");
  for (Index n : opt.sizes) {
    if (n < 2) throw std::invalid_argument(fmt::format("verify: size {} is below 2", n));
    if (n > cfg.dense_crossover)
      throw std::invalid_argument(
          fmt::format("verify: size {} exceeds the dense crossover {}", n, cfg.dense_crossover));
  }
  std::vector<std::function<VerifyCase()>> jobs;
  for (Index n : opt.sizes) {
    for (int rep = 0; rep < opt.reps; ++rep) {
      for (MixedCategory cat : kMixedCategories) {
        const std::uint64_t seed = bench_seed(opt.seed, n, rep);
        const bool inject = opt.inject_failure && jobs.empty();
        jobs.emplace_back([=] {
          VerifyCase vc;
          vc.label = std::string(to_string(cat));
          vc.n = n;
          vc.seed = seed;
          try {
            const ETRSInstance inst = generate_mixed(cat, n, seed);
            const ETRSSolution ref = oracle_etrs(inst);
            const ETRSSolution s = solve_etrs(inst, cfg);
            vc.oracle_obj = ref.obj;
            vc.obj = s.obj;
            if (inject) vc.obj += 1e-3 * std::max(1.0, std::abs(vc.obj));
            vc.provenance = std::string(to_string(s.provenance));
            vc.oracle_provenance = std::string(to_string(ref.provenance));
            vc.rel_err = relative_gap(vc.obj, vc.oracle_obj);
            vc.pass = vc.rel_err <= opt.tol;
          } catch (const std::exception& e) {
            vc.error = e.what();
          }
          return vc;
        });
      }
    }
  }
  return parallel_map(jobs, opt.workers);
}

inline std::string format_verify(const std::vector<VerifyCase>& cases, double tol) {
  std::size_t pass = 0;
  double worst = 0.0;
  std::string fails;
  for (const auto& c : cases) {
    if (c.pass) {
      ++pass;
    } else {
      fails += c.error.empty()
                   ? fmt::format("MISMATCH {} n={} seed={}: obj {:.17g} vs oracle {:.17g} (rel {:.3e}; {} vs {})\n",
                                 c.label, c.n, c.seed, c.obj, c.oracle_obj, c.rel_err, c.provenance,
                                 c.oracle_provenance)
                   : fmt::format("ERROR {} n={} seed={}: {}\n", c.label, c.n, c.seed, c.error);
    }
    if (c.error.empty()) worst = std::max(worst, c.rel_err);
  }
  return fails + fmt::format("{}/{} instances within {:.1e} (worst relative error {:.3e})\n", pass, cases.size(), tol,
                             worst);
}

}  // namespace etrs
