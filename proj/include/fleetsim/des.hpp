#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fleetsim/gpu.hpp"
#include "fleetsim/routing.hpp"
#include "fleetsim/workload.hpp"

namespace fleetsim {

struct PoolConfig {
  GpuProfile gpu;
  int gpu_count = 1;
  long context_bound = 8192;  // B; requests with larger effective totals are rejected
};

struct FleetConfig {
  std::vector<PoolConfig> pools;
  RouterConfig router;
};

// Engine event record. Ordering key is (time, kind, request id): completions
// sort before arrivals at equal timestamps so freed slots are claimable by the
// new arrival.
struct SimEvent {
  double time = 0;
  enum class Kind { Completion = 0, Arrival = 1 } kind = Kind::Arrival;
  std::int64_t request_id = 0;
};

struct SimOptions {
  std::uint64_t seed = 1;
  long n_requests = 20000;
  // Completions excluded from statistics to remove empty-system bias.
  // -1 = automatic: max(100, N/100) when N >= 1000, none for smaller runs
  // (fixed-duration windows always measure everything).
  long warmup = -1;
  bool drain = true;              // process every started request to completion
  bool reject_hard_error = false; // throw instead of counting rejected requests
  std::optional<int> batch_cap;   // cap concurrent sequences per GPU below n_max
  std::optional<double> window_s; // generate arrivals for a fixed window instead of n_requests
  double slo_p99_ttft_s = 0;      // when > 0, report per-request SLO attainment
  std::string trace_path;         // per-request CSV when non-empty
};

struct PctSet {
  double p50 = 0, p90 = 0, p99 = 0;
};

struct PoolStats {
  long arrivals = 0;     // requests routed here
  long completions = 0;
  long measured = 0;     // completions counted after warm-up
  long rejected = 0;     // effective total exceeded the context bound
  PctSet wait, ttft, e2e;
  double mean_wait_s = 0; // mean queue wait over measured completions
  double mean_util = 0;   // time-averaged busy fraction of the pool's slots
  double slo_attain = -1; // fraction of measured requests with TTFT <= SLO; -1 if no SLO
};

struct FleetSimResult {
  std::vector<PoolStats> pools;
  PoolStats fleet;
  std::uint64_t seed = 0;
  long arrivals = 0;
  long completions = 0;
  long in_flight_end = 0;  // arrivals - completions - rejected
  double sim_end_s = 0;    // simulated time of the last processed event
  double wall_s = 0;       // host wall-clock spent simulating
};

// Nearest-rank percentile (rank = ceil(p/100 * N) on the sorted sample).
// p in (0, 100]; throws on an empty sample.
double percentile(std::vector<double> samples, double p);

// Simulate a Poisson arrival stream against the fleet: inter-arrival gaps are
// exponential(lambda), totals drawn by inverse-CDF sampling and split by the
// prompt fraction, each request routed on arrival. A pool is gpu_count * n_max
// interchangeable KV slots behind one FIFO queue; a request holds one slot for
// its wall-clock duration (prefill chunks + completion tokens, all at the
// full-batch iteration latency). Identical inputs give bit-identical results.
FleetSimResult run_sim(const FleetConfig& fleet, const WorkloadSpec& workload,
                       const SimOptions& opts);

// Same engine on a caller-built arrival stream (arrival times nondecreasing).
FleetSimResult run_sim_requests(const FleetConfig& fleet, const std::vector<Request>& requests,
                                const SimOptions& opts);

}  // namespace fleetsim
