#pragma once
#include <string>
#include <vector>

#include "fleetsim/gpu.hpp"
#include "fleetsim/workload.hpp"

namespace fleetsim {

// One prefill/decode pool pairing with its sized GPU counts.
struct DisaggConfig {
  std::string prefill_gpu, decode_gpu;
  int n_prefill = 0, n_decode = 0;
  int decode_batch = 128;
  double beta_ttft = 1.80;  // KV-transfer multiplier on raw prefill time, >= 1
};

struct DisaggResult {
  DisaggConfig config;
  double ttft_p99_s = 0;  // prefill queue W99 + beta * prefill(P99 input) + one decode step
  double tpot_s = 0;      // decode seconds per output token
  double annual_cost_usd = 0;
  double rho_prefill = 0, rho_decode = 0;
  bool feasible = false;
  std::string cause;  // ttft-bound | tpot-bound | throughput-bound | context-bound
};

struct DisaggSpace {
  std::vector<GpuProfile> catalog;  // types tried for both roles
  double rho_cap = 0.85;
  int decode_batch = 128;
  double beta_ttft = 1.80;
  int c_max = 64;            // per-pool count bound
  long context_bound = 0;    // prefill iteration context; 0 = workload max
};

// One decode iteration = one token for every sequence in the batch, so the
// time per output token is the iteration latency at the decode batch.
double tpot_s(const GpuProfile& decode_gpu, int decode_batch);

// Size every (prefill type, decode type) pair: prefill workers are an M/G/c
// queue over whole-prompt prefill times sized to the utilization cap; decode
// slots hold one sequence for l_out * tpot seconds and are sized so slot
// throughput covers the arrival rate at the cap. Feasible pairs rank first,
// by ascending cost.
std::vector<DisaggResult> size_disagg(const WorkloadSpec& w, const DisaggSpace& space,
                                      double ttft_slo_s, double tpot_slo_s);

}  // namespace fleetsim
