#include "fleetsim/gridflex.hpp"

#include <cmath>
#include <stdexcept>

#include "fleetsim/queueing.hpp"

namespace fleetsim {

BatchCap invert_power(const GpuProfile& g, double flex, int baseline_batch) {
  if (!g.power_curve) throw std::invalid_argument(g.name + " has no power curve");
  if (flex < 0 || flex >= 1) throw std::invalid_argument("flex must be in [0,1)");
  if (baseline_batch < 1) throw std::invalid_argument("baseline batch must be >= 1");
  double target = (1 - flex) * g.power_curve->nominal_w();
  for (int b = baseline_batch; b >= 1; --b)  // power is monotone in batch
    if (power_w(g, b) <= target) return {b, false};
  return {1, true};
}

std::vector<FlexPoint> flex_curve(const PoolConfig& pool, const WorkloadSpec& w, double slo_s,
                                  const std::vector<double>& flex_grid, int baseline_batch,
                                  double event_window_s, std::uint64_t seed) {
  if (flex_grid.empty()) throw std::invalid_argument("empty flex grid");
  if (slo_s <= 0) throw std::invalid_argument("SLO must be > 0");
  if (event_window_s <= 0) throw std::invalid_argument("event window must be > 0");

  double max_tok = w.cdf.max_tokens();
  long q99_total = std::max(1L, std::lround(w.cdf.quantile(0.99)));
  long p99_l_in = split_total(q99_total, w.prompt_fraction).l_in;

  std::vector<FlexPoint> out;
  for (double flex : flex_grid) {
    FlexPoint fp;
    fp.flex = flex;
    BatchCap bc = invert_power(pool.gpu, flex, baseline_batch);
    fp.batch_cap = bc.cap;
    fp.over_target = bc.over_target;
    fp.watts_per_gpu = power_w(pool.gpu, bc.cap);
    fp.fleet_kw = pool.gpu_count * fp.watts_per_gpu / 1000.0;

    // Steady state at the cap: fewer slots per GPU, each iteration faster.
    Moments mo = conditional_moments(w.cdf, 0, max_tok, [&](double total) {
      LengthSample ls = split_total(std::max(1L, std::lround(total)), w.prompt_fraction);
      return slot_hold_capped_s(pool.gpu, ls.l_in, ls.l_out, bc.cap);
    });
    fp.e_service_s = mo.mean / bc.cap;
    PoolLoad load{w.arrival_rate, mo.mean, mo.scv,
                  static_cast<long>(pool.gpu_count) * bc.cap};
    QueueStats st = w99(load);
    fp.rho = st.rho;
    fp.p99_analytical_s = pool_p99_ttft_capped_s(load, pool.gpu, bc.cap, p99_l_in);
    fp.slo_pass = st.stable && fp.p99_analytical_s <= slo_s;

    // Same seed for every flex level: identical arrivals, different caps.
    SimOptions so;
    so.seed = seed;
    so.window_s = event_window_s;
    so.batch_cap = bc.cap;
    so.slo_p99_ttft_s = slo_s;
    FleetConfig fc;
    fc.pools.push_back(pool);
    FleetSimResult r = run_sim(fc, w, so);
    fp.p99_des_s = r.fleet.ttft.p99;
    fp.short_event_pass = r.fleet.measured > 0 && fp.p99_des_s <= slo_s;
    out.push_back(fp);
  }
  return out;
}

}  // namespace fleetsim
