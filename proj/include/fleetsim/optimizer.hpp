#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fleetsim/des.hpp"
#include "fleetsim/gpu.hpp"
#include "fleetsim/queueing.hpp"
#include "fleetsim/routing.hpp"
#include "fleetsim/workload.hpp"

namespace fleetsim {

// Search space for the two-phase fleet optimizer.
struct SweepSpace {
  std::vector<long> b_short_grid;       // candidate short/long split thresholds, tokens
  std::vector<GpuProfile> gpu_catalog;  // GPU types considered for each pool
  int c_max = 64;                       // per-pool GPU count bound
  double rho_cap = 0.85;                // per-pool utilization ceiling
  double slo_p99_ttft_s = 0.5;
  bool allow_mixed_types = true;        // permit different GPU types per pool
  long long_context_bound = 0;          // long pool context bound; 0 = workload max
  std::optional<double> node_avail;     // when set, report availability-rounded counts
};

// One candidate plan: a split threshold plus a sized (short, long) pool pair.
// n_l = 0 marks a degenerate single-pool plan (all traffic below b_short).
struct ParetoPoint {
  long b_short = 0;
  long b_long = 0;       // long pool context bound (0 for single-pool plans)
  double alpha_s = 1;    // fraction of traffic routed short: F(b_short)
  int n_s = 0, n_l = 0;  // GPU counts per pool
  std::string gpu_s, gpu_l;
  long slots_s = 0, slots_l = 0;  // count * n_max, the pool's concurrent capacity
  int total_gpus = 0;
  double annual_cost_usd = 0;
  double rho_s = 0, rho_l = 0;
  double pool_ttft_s = 0, pool_ttft_l = 0;  // analytical P99 TTFT per pool, seconds
  bool analytical_slo_pass = false;
  std::string cause;  // infeasibility cause: prefill-bound, count-bound, context-bound
  std::optional<FleetSimResult> des;  // filled for verified candidates
  bool des_slo_pass = false;
  double saving_vs_baseline = 0;  // 1 - cost/baseline cost, when a baseline exists
  int prod_n_s = 0, prod_n_l = 0;  // counts after availability roundup (= n when none)
  double production_cost_usd = 0;
};

struct SweepResult {
  std::vector<ParetoPoint> feasible;    // ascending cost, deterministic tie-break
  std::vector<ParetoPoint> infeasible;  // cause recorded per point
  std::optional<ParetoPoint> baseline;  // cheapest feasible single-pool homogeneous plan
};

struct DesParams {
  long n_requests = 20000;
  std::uint64_t seed = 1;  // candidate i simulates with seed + i
  int top_k = 5;           // candidates verified in sweeps that pick k themselves
};

struct OptimizerResult {
  std::vector<ParetoPoint> frontier;  // feasible candidates; the first k carry DES verdicts
  int best_index = -1;                // cheapest DES-verified pass; -1 when none passed
  std::optional<ParetoPoint> baseline;
};

// Phase 1: enumerate (b_short, gpu_s, gpu_l), split traffic at b_short, and
// size each pool to the minimal GPU count meeting both the utilization cap and
// the analytical P99 TTFT SLO. Also sizes the homogeneous single-pool baseline
// at the smallest 1024*2^k context bound covering the workload. Equal-cost
// candidates rank by fewer GPUs, then larger short-pool slot capacity, then
// name/threshold order.
SweepResult analytical_sweep(const WorkloadSpec& w, const SweepSpace& space);

// Phase 2: simulate the k cheapest feasible candidates (seed + index each) and
// pick the cheapest whose simulated P99 TTFT meets the SLO. Candidates that
// pass analytically but fail simulation are kept with both verdicts.
OptimizerResult verify_top_k(const SweepResult& sweep, int k, const WorkloadSpec& w,
                             const SweepSpace& space, const RouterConfig& router,
                             const DesParams& des);

// Non-dominated subset under (SLO pass beats fail, lower cost, fewer GPUs),
// stably ordered by b_short. Throws on empty input.
std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points);

// Fleet and router a candidate plan implies (short pool first).
FleetConfig fleet_for(const ParetoPoint& pt, const RouterConfig& router);

struct WhatifRow {
  double lambda = 0;
  bool feasible = false;
  ParetoPoint best;
  double lambda_star = 0;  // arrival rate where this fleet first fails analytically
};

// Minimal verified fleet per arrival rate, plus each fleet's headroom found by
// bisection at fixed counts. Grid must be ascending.
std::vector<WhatifRow> whatif_lambda_sweep(WorkloadSpec w, const SweepSpace& space,
                                           const std::vector<double>& lambda_grid,
                                           const RouterConfig& router, const DesParams& des);

}  // namespace fleetsim
