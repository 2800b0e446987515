#pragma once
#include "fleetsim/gpu.hpp"

namespace fleetsim {

// Offered load on one pool of c parallel servers.
struct PoolLoad {
  double lambda = 0;        // arrivals per second
  double mean_service = 0;  // E[S], seconds
  double scv = 0;           // Var[S]/E[S]^2
  long servers = 1;         // c
};

struct QueueStats {
  double rho = 0;        // per-server utilization lambda*E[S]/c
  double wait_prob = 0;  // probability an arrival has to queue
  double w99 = 0;        // 99th-percentile queue wait, seconds (inf when unstable)
  bool stable = false;   // rho < 1
};

// Probability an arrival must wait in an M/M/c queue at per-server
// utilization rho. Computed by recurrence (no factorials); exact well past
// c = 10,000 servers. Throws when rho >= 1 or c < 1.
double erlang_c(long c, double rho);

// Two-moment 99th-percentile wait: wait_prob/(c*mu*(1-rho)) * (1+scv)/2 * ln(100).
// Instability is reported (stable=false, w99=inf), not thrown.
QueueStats w99(const PoolLoad& load);

// Mean queue wait under the same two-moment approximation, seconds.
double mean_wait_s(const PoolLoad& load);

// Analytical 99th-percentile TTFT for a pool: P99 queue wait composed with
// the prefill of the pool's P99 input length plus one iteration. Conservative:
// both tails are taken at the 99th percentile. Infinite when unstable.
double pool_p99_ttft_s(const PoolLoad& load, const GpuProfile& g, long B, long p99_l_in);

// Same, with iteration latency taken at an explicit batch cap.
double pool_p99_ttft_capped_s(const PoolLoad& load, const GpuProfile& g, int batch_cap,
                              long p99_l_in);

}  // namespace fleetsim
