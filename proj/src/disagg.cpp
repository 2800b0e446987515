#include "fleetsim/disagg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fleetsim/queueing.hpp"

namespace fleetsim {

double tpot_s(const GpuProfile& decode_gpu, int decode_batch) {
  if (decode_batch < 1) throw std::invalid_argument("decode batch must be >= 1");
  return t_iter_ms(decode_gpu, decode_batch) / 1000.0;
}

std::vector<DisaggResult> size_disagg(const WorkloadSpec& w, const DisaggSpace& space,
                                      double ttft_slo_s, double tpot_slo_s) {
  if (ttft_slo_s <= 0 || tpot_slo_s <= 0) throw std::invalid_argument("SLOs must be > 0");
  if (space.catalog.empty()) throw std::invalid_argument("empty GPU catalog");
  if (space.beta_ttft < 1) throw std::invalid_argument("beta_ttft must be >= 1");
  if (space.decode_batch < 1) throw std::invalid_argument("decode batch must be >= 1");
  if (w.arrival_rate <= 0) throw std::invalid_argument("arrival rate must be > 0");

  double max_tok = w.cdf.max_tokens();
  long ctx = space.context_bound > 0 ? space.context_bound
                                     : static_cast<long>(std::ceil(max_tok));
  long q99_total = std::max(1L, std::lround(w.cdf.quantile(0.99)));
  long p99_l_in = split_total(q99_total, w.prompt_fraction).l_in;

  // Mean output length, for decode slot occupancy.
  Moments mo_out = conditional_moments(w.cdf, 0, max_tok, [&](double total) {
    return static_cast<double>(split_total(std::max(1L, std::lround(total)), w.prompt_fraction).l_out);
  });

  std::vector<DisaggResult> out;
  for (const GpuProfile& gp : space.catalog) {
    // Prefill service: the whole prompt chunked through at the context-bound
    // batch latency; one worker handles one prefill at a time.
    int nm = 0;
    double iter_s = 0;
    Moments mo_pre;
    bool ctx_ok = true;
    try {
      nm = n_max(gp, ctx);
      iter_s = t_iter_ms(gp, nm) / 1000.0;
      mo_pre = conditional_moments(w.cdf, 0, max_tok, [&](double total) {
        long l_in = split_total(std::max(1L, std::lround(total)), w.prompt_fraction).l_in;
        return prefill_chunks(gp, l_in) * iter_s;
      });
    } catch (const std::runtime_error&) {
      ctx_ok = false;
    }

    for (const GpuProfile& gd : space.catalog) {
      DisaggResult r;
      r.config.prefill_gpu = gp.name;
      r.config.decode_gpu = gd.name;
      r.config.decode_batch = space.decode_batch;
      r.config.beta_ttft = space.beta_ttft;
      r.tpot_s = tpot_s(gd, space.decode_batch);

      if (!ctx_ok) {
        r.cause = "context-bound";
        out.push_back(std::move(r));
        continue;
      }

      // Decode pool: a request holds one of n_decode*batch slots for
      // l_out * tpot seconds.
      double hold_d = mo_out.mean * r.tpot_s;
      int n_d = static_cast<int>(
          std::ceil(w.arrival_rate * hold_d / (space.rho_cap * space.decode_batch) - 1e-12));
      n_d = std::max(1, n_d);

      // Prefill pool: minimal worker count under the utilization cap.
      int n_p = std::max(
          1, static_cast<int>(std::ceil(w.arrival_rate * mo_pre.mean / space.rho_cap - 1e-12)));

      if (n_p > space.c_max || n_d > space.c_max) {
        r.cause = "throughput-bound";
        r.config.n_prefill = std::min(n_p, space.c_max);
        r.config.n_decode = std::min(n_d, space.c_max);
        r.annual_cost_usd =
            r.config.n_prefill * gp.annual_cost_usd + r.config.n_decode * gd.annual_cost_usd;
        out.push_back(std::move(r));
        continue;
      }
      r.config.n_prefill = n_p;
      r.config.n_decode = n_d;
      r.annual_cost_usd = n_p * gp.annual_cost_usd + n_d * gd.annual_cost_usd;
      r.rho_decode = w.arrival_rate * hold_d / (static_cast<double>(n_d) * space.decode_batch);

      PoolLoad load{w.arrival_rate, mo_pre.mean, mo_pre.scv, n_p};
      QueueStats st = w99(load);
      r.rho_prefill = st.rho;
      double prefill_p99 = prefill_chunks(gp, p99_l_in) * iter_s;
      r.ttft_p99_s = st.w99 + space.beta_ttft * prefill_p99 + r.tpot_s;

      if (r.tpot_s > tpot_slo_s)
        r.cause = "tpot-bound";
      else if (!st.stable || r.ttft_p99_s > ttft_slo_s)
        r.cause = "ttft-bound";
      else
        r.feasible = true;
      out.push_back(std::move(r));
    }
  }

  std::sort(out.begin(), out.end(), [](const DisaggResult& a, const DisaggResult& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (a.annual_cost_usd != b.annual_cost_usd) return a.annual_cost_usd < b.annual_cost_usd;
    int ga = a.config.n_prefill + a.config.n_decode, gb = b.config.n_prefill + b.config.n_decode;
    if (ga != gb) return ga < gb;
    if (a.config.prefill_gpu != b.config.prefill_gpu)
      return a.config.prefill_gpu < b.config.prefill_gpu;
    return a.config.decode_gpu < b.config.decode_gpu;
  });
  return out;
}

}  // namespace fleetsim
