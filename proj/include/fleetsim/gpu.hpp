#pragma once
#include <optional>
#include <string>
#include <vector>

namespace fleetsim {

// Logistic power draw vs. batch size: p(b) = range/(1+e^{-k(log2 b - x0)}) + idle.
struct PowerCurve {
  double p_idle_w = 0;   // draw with an empty batch
  double p_range_w = 0;  // nominal minus idle
  double k = 1.0;        // slope in log2-batch units
  double x0 = 0;         // midpoint in log2-batch units
  double nominal_w() const { return p_idle_w + p_range_w; }
};

struct GpuProfile {
  std::string name;
  double w_ms = 0;           // per-iteration baseline compute, ms
  double h_ms_per_slot = 0;  // per-iteration cost of each concurrent sequence, ms
  long kv_block_budget = 0;  // number of 16-token KV blocks on the card
  int block_tokens = 16;     // tokens per KV block
  int chunk_tokens = 0;      // prefill chunk size, tokens
  double vram_gb = 0;
  double annual_cost_usd = 0;
  double hourly_cost_usd = 0;
  std::optional<PowerCurve> power_curve;  // only profiles with measured curves
};

// Max concurrent sequences at context bound B; throws if the bound leaves
// room for none (infeasible pool).
int n_max(const GpuProfile& g, long context_tokens);

// One batched iteration with n concurrent sequences, milliseconds.
double t_iter_ms(const GpuProfile& g, double n);

// Number of prefill chunks an l_in-token prompt needs.
long prefill_chunks(const GpuProfile& g, long l_in);

// Per-request service time amortized over the n_max sequences sharing each
// iteration, seconds: (chunks + l_out) / n_max * t_iter(n_max).
double service_time_s(const GpuProfile& g, long l_in, long l_out, long B);

// Wall-clock time the request occupies one KV slot, seconds:
// (chunks + l_out) * t_iter(n_max). This is what a simulated slot holds for;
// service_time_s is the same quantity divided by the slots sharing the GPU.
double slot_hold_s(const GpuProfile& g, long l_in, long l_out, long B);

// Same pair evaluated at an explicit batch cap (demand-response mode caps the
// batch below n_max; iteration latency shrinks, per-slot capacity shrinks more).
double slot_hold_capped_s(const GpuProfile& g, long l_in, long l_out, int batch_cap);

// Prefill latency for l_in tokens at the B-implied batch, seconds.
double prefill_s(const GpuProfile& g, long l_in, long B);

// Queue wait + prefill + one iteration, seconds.
double ttft_s(const GpuProfile& g, double queue_wait_s, long l_in, long B);

// Logistic power draw at batch size b >= 1, watts; throws without a curve.
double power_w(const GpuProfile& g, double b);

const std::vector<GpuProfile>& builtin_profiles();
const GpuProfile& profile_by_name(const std::string& name);  // throws if unknown

}  // namespace fleetsim
