#pragma once
#include <cstdint>
#include <vector>

#include "fleetsim/des.hpp"
#include "fleetsim/gpu.hpp"
#include "fleetsim/workload.hpp"

namespace fleetsim {

struct BatchCap {
  int cap = 1;
  bool over_target = false;  // even a batch of 1 draws more than the target
};

// Largest batch in [1, baseline_batch] whose power draw stays at or below
// (1 - flex) * nominal watts. Requires a profile with a power curve.
BatchCap invert_power(const GpuProfile& g, double flex, int baseline_batch);

struct FlexPoint {
  double flex = 0;  // target power reduction, fraction of nominal
  int batch_cap = 1;
  bool over_target = false;
  double watts_per_gpu = 0;
  double fleet_kw = 0;
  double e_service_s = 0;       // per-request service at the cap (slot hold / cap)
  double rho = 0;
  double p99_analytical_s = 0;  // infinite when the capped pool is unstable
  double p99_des_s = 0;         // from the windowed simulation
  bool slo_pass = false;         // steady-state analytics meet the SLO
  bool short_event_pass = false; // windowed simulation meets the SLO
};

// Sweep power-reduction targets on one homogeneous pool: per target, invert
// the power curve to a batch cap, re-derive the service distribution at that
// cap for the steady-state P99, and replay the same arrival stream through a
// capped-slot simulation over a fixed event window.
std::vector<FlexPoint> flex_curve(const PoolConfig& pool, const WorkloadSpec& w, double slo_s,
                                  const std::vector<double>& flex_grid, int baseline_batch,
                                  double event_window_s, std::uint64_t seed);

}  // namespace fleetsim
