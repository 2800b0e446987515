#include "fleetsim/gpu.hpp"

#include <cmath>
#include <stdexcept>

namespace fleetsim {

int n_max(const GpuProfile& g, long context_tokens) {
  if (context_tokens < 1) throw std::invalid_argument("context bound must be >= 1");
  long blocks_per_seq = (context_tokens + g.block_tokens - 1) / g.block_tokens;
  long n = g.kv_block_budget / blocks_per_seq;
  if (n < 1)
    throw std::runtime_error(g.name + ": context " + std::to_string(context_tokens) +
                             " exceeds KV capacity (no concurrent sequence fits)");
  return static_cast<int>(n);
}

double t_iter_ms(const GpuProfile& g, double n) {
  if (n < 0) throw std::invalid_argument("batch size must be >= 0");
  return g.w_ms + g.h_ms_per_slot * n;
}

long prefill_chunks(const GpuProfile& g, long l_in) {
  if (l_in < 1) throw std::invalid_argument("l_in must be >= 1");
  return (l_in + g.chunk_tokens - 1) / g.chunk_tokens;
}

double service_time_s(const GpuProfile& g, long l_in, long l_out, long B) {
  int n = n_max(g, B);
  return slot_hold_s(g, l_in, l_out, B) / n;
}

double slot_hold_s(const GpuProfile& g, long l_in, long l_out, long B) {
  if (l_out < 1) throw std::invalid_argument("l_out must be >= 1");
  int n = n_max(g, B);
  return (prefill_chunks(g, l_in) + l_out) * t_iter_ms(g, n) / 1000.0;
}

double slot_hold_capped_s(const GpuProfile& g, long l_in, long l_out, int batch_cap) {
  if (l_out < 1) throw std::invalid_argument("l_out must be >= 1");
  if (batch_cap < 1) throw std::invalid_argument("batch cap must be >= 1");
  return (prefill_chunks(g, l_in) + l_out) * t_iter_ms(g, batch_cap) / 1000.0;
}

double prefill_s(const GpuProfile& g, long l_in, long B) {
  return prefill_chunks(g, l_in) * t_iter_ms(g, n_max(g, B)) / 1000.0;
}

double ttft_s(const GpuProfile& g, double queue_wait_s, long l_in, long B) {
  double iter_s = t_iter_ms(g, n_max(g, B)) / 1000.0;
  return queue_wait_s + prefill_s(g, l_in, B) + iter_s;
}

double power_w(const GpuProfile& g, double b) {
  if (!g.power_curve) throw std::runtime_error(g.name + ": no power curve calibrated");
  if (b < 1) throw std::invalid_argument("batch size must be >= 1");
  const PowerCurve& p = *g.power_curve;
  return p.p_range_w / (1.0 + std::exp(-p.k * (std::log2(b) - p.x0))) + p.p_idle_w;
}

const std::vector<GpuProfile>& builtin_profiles() {
  // W/H calibrated per card; block budgets chosen so one formula reproduces
  // the documented concurrency at 8K context (A10G 64, A100 128, H100 256).
  static const std::vector<GpuProfile> profiles = {
      {"A10G-24GB", 12.0, 0.90, 32768, 16, 512, 24.0, 8850.0, 1.01, std::nullopt},
      {"A100-80GB", 8.0, 0.65, 65536, 16, 512, 80.0, 19400.0, 2.21, std::nullopt},
      {"H100-80GB", 4.0, 0.32, 131072, 16, 1024, 80.0, 35200.0, 4.02,
       PowerCurve{300.0, 300.0, 1.0, 4.2}},
  };
  return profiles;
}

const GpuProfile& profile_by_name(const std::string& name) {
  for (const auto& g : builtin_profiles())
    if (g.name == name) return g;
  throw std::runtime_error("unknown GPU profile: " + name);
}

}  // namespace fleetsim
