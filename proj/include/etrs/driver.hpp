// Global solver for the extended trust-region subproblem.
#pragma once

#include "etrs/duality.hpp"
#include "etrs/lngm.hpp"
#include "etrs/reduction.hpp"
#include "etrs/trs.hpp"

#include <chrono>

namespace etrs {

struct FeasibilityResult {
  Feasibility status = Feasibility::strictly_feasible;
  Vector x;  ///< the single feasible point when status == unique_point
};

/// Classifies {‖x‖² ≤ δ, bᵀx ≤ β} by comparing β with ±√δ‖b‖.
inline FeasibilityResult check_feasibility(const Vector& b, double beta, double delta) {
  detail::require(b.squaredNorm() > 0.0, "check_feasibility: b must be nonzero");
  detail::require(delta > 0.0, "check_feasibility: delta must be positive");
  const double edge = std::sqrt(delta) * b.norm();
  const double tol = 1e-12 * std::max(1.0, edge);
  FeasibilityResult r;
  if (std::abs(beta + edge) <= tol) {
    r.status = Feasibility::unique_point;
    r.x = -(std::sqrt(delta) / b.norm()) * b;
  } else if (beta < -edge) {
    r.status = Feasibility::infeasible;
  } else if (beta >= edge) {
    r.status = Feasibility::redundant_linear;
  }
  return r;
}

struct CandidateRecord {
  Provenance provenance;
  double obj;
  bool feasible;
};

struct ETRSSolution {
  Vector x;
  double obj = 0.0;
  Provenance provenance = Provenance::trs_global;
  double lambda_ball = 0.0;
  bool linear_active = false;
  double kkt1 = 0.0;
  double kkt2 = 0.0;
  Feasibility feasibility = Feasibility::strictly_feasible;
  std::optional<DualityCertificate> duality;  ///< empty when skipped or inconclusive
  bool duality_inconclusive = false;
  LNGMResult lngm;            ///< status of the LNGM search when it ran
  bool lngm_searched = false;
  std::vector<CandidateRecord> candidates;
  double time_total = 0.0;    ///< seconds
  double time_duality = 0.0;  ///< seconds
};

/// Stationarity and complementarity residuals. On the hyperplane the linear
/// multiplier absorbs the b-component, so the stationarity residual is projected onto b⊥.
inline std::pair<double, double> kkt_residuals(const ETRSInstance& inst, const ETRSSolution& sol) {
  if (sol.provenance == Provenance::unique_feasible_point) return {0.0, 0.0};
  Vector g = inst.A.apply(sol.x) + sol.lambda_ball * sol.x + inst.a;
  if (sol.linear_active) g -= (inst.b.dot(g) / inst.b.squaredNorm()) * inst.b;
  return {g.lpNorm<Eigen::Infinity>(), sol.lambda_ball * (sol.x.squaredNorm() - inst.delta)};
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct EtrsCandidate {
  Provenance provenance;
  Vector x;
  double lambda;
};

inline EtrsCandidate projected_candidate(const ETRSInstance& inst, const SolverConfig& cfg) {
  const Vector xhat = particular_solution(inst.b, inst.beta, inst.delta);
  if (inst.n() == 1) return {Provenance::projected_trs, xhat, 0.0};
  auto nb = build_nullspace(inst.b);
  const ReducedProblem rp = reduce(inst, nb, xhat);
  TRSOptions opt;
  if (rp.Ahat.n() > cfg.dense_crossover) {
    opt.shift_solver = make_reduced_shift_solver(inst.A, inst.b, nb, rp.B, cfg);
    opt.eig_solver = make_reduced_eig_solver(inst.A, inst.b, nb, rp.B, cfg);
  }
  const TRSSolution ts = solve_trs(rp.Ahat, rp.linear(), rp.radius(), rp.B, cfg, opt);
  return {Provenance::projected_trs, lift(ts.x, *nb, rp.g, rp.xhat), ts.lambda};
}

}  // namespace detail

inline ETRSSolution solve_etrs(const ETRSInstance& inst, const SolverConfig& cfg = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  inst.validate();
  ETRSSolution sol;
  const FeasibilityResult fr = check_feasibility(inst.b, inst.beta, inst.delta);
  sol.feasibility = fr.status;

  auto finish = [&](ETRSSolution& s) {
    s.obj = inst.objective(s.x);
    s.linear_active = s.provenance == Provenance::projected_trs || s.provenance == Provenance::unique_feasible_point;
    std::tie(s.kkt1, s.kkt2) = kkt_residuals(inst, s);
    s.time_total = detail::seconds_since(t0);
  };

  switch (fr.status) {
    case Feasibility::infeasible:
      throw InfeasibleError(fmt::format("eTRS infeasible: beta = {:.12g} < -sqrt(delta)·‖b‖ = {:.12g}", inst.beta,
                                        -std::sqrt(inst.delta) * inst.b.norm()));
    case Feasibility::unique_point:
      sol.x = fr.x;
      sol.provenance = Provenance::unique_feasible_point;
      finish(sol);
      return sol;
    case Feasibility::redundant_linear: {
      TRSOptions opt;
      opt.tie_break = &inst.b;
      const TRSSolution ts = solve_trs(inst.A, inst.a, inst.delta, cfg, opt);
      sol.x = ts.x;
      sol.lambda_ball = ts.lambda;
      sol.provenance = Provenance::trs_global;
      sol.candidates.push_back({Provenance::trs_global, ts.obj, true});
      finish(sol);
      return sol;
    }
    case Feasibility::strictly_feasible:
      break;
  }

  const ExtremeEigs eigs = extreme_eigs(inst.A, cfg);
  std::vector<detail::EtrsCandidate> cands;
  std::optional<TRSSolution> trs;
  auto add_trs = [&](int k) {
    TRSOptions opt;
    opt.tie_break = &inst.b;
    opt.pencil_k = k;
    trs = solve_trs(inst.A, inst.a, inst.delta, cfg, opt);
    cands.push_back({Provenance::trs_global, trs->x, trs->lambda});
  };
  auto add_lngm = [&] {
    const PencilEigs* pre = trs && trs->pencil && trs->pencil->pairs.size() >= 2 ? &*trs->pencil : nullptr;
    sol.lngm = find_lngm(inst.A, inst.a, inst.delta, eigs, cfg, pre);
    sol.lngm_searched = true;
    if (sol.lngm.found()) cands.push_back({Provenance::lngm, sol.lngm.x, sol.lngm.lambda});
  };
  auto add_projected = [&] { cands.push_back(detail::projected_candidate(inst, cfg)); };

  bool holds = eigs.lambda1 >= 0.0 || eigs.multiplicity_flag;
  if (holds) {
    sol.duality = DualityCertificate{};
    sol.duality->lambda = -eigs.lambda1;
    sol.duality->reason = eigs.lambda1 >= 0.0 ? DualityReason::convex : DualityReason::multiplicity;
  } else {
    const auto td = clock::now();
    try {
      sol.duality = check_strong_duality(inst, eigs, cfg);
      holds = sol.duality->verdict == DualityVerdict::holds;
    } catch (const DualityInconclusive&) {
      sol.duality_inconclusive = true;
    }
    sol.time_duality = detail::seconds_since(td);
  }

  if (sol.duality_inconclusive) {
    add_trs(2);
    add_lngm();
    add_projected();
  } else if (holds) {
    add_trs(1);
    if (!inst.linear_feasible(trs->x)) add_projected();
  } else {
    add_lngm();
    add_projected();
  }

  const detail::EtrsCandidate* best = nullptr;
  double best_obj = kInf;
  for (const auto& c : cands) {
    const bool feas = inst.linear_feasible(c.x) && inst.ball_feasible(c.x);
    const double obj = inst.objective(c.x);
    sol.candidates.push_back({c.provenance, obj, feas});
    if (feas && obj < best_obj) {
      best_obj = obj;
      best = &c;
    }
  }
  if (!best) throw Error("solve_etrs: no feasible candidate was produced");
  sol.x = best->x;
  sol.lambda_ball = best->lambda;
  sol.provenance = best->provenance;
  finish(sol);
  return sol;
}

}  // namespace etrs
