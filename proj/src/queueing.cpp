#include "fleetsim/queueing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fleetsim {

double erlang_c(long c, double rho) {
  if (c < 1) throw std::invalid_argument("server count must be >= 1");
  if (rho < 0 || rho >= 1.0) throw std::runtime_error("unstable: utilization must be in [0,1)");
  if (rho == 0) return 0.0;
  // Blocking-probability recurrence b(k) = a*b(k-1)/(k + a*b(k-1)) keeps every
  // intermediate in (0,1], so it cannot overflow at any server count.
  double a = rho * c;  // offered load in Erlangs
  double b = 1.0;
  for (long k = 1; k <= c; ++k) b = a * b / (k + a * b);
  return b / (1.0 - rho * (1.0 - b));
}

QueueStats w99(const PoolLoad& load) {
  if (load.servers < 1) throw std::invalid_argument("server count must be >= 1");
  if (load.mean_service <= 0) throw std::invalid_argument("mean service must be > 0");
  if (load.scv < 0) throw std::invalid_argument("scv must be >= 0");
  QueueStats s;
  s.rho = load.lambda * load.mean_service / load.servers;
  s.stable = s.rho < 1.0;
  if (!s.stable) {
    s.wait_prob = 1.0;
    s.w99 = std::numeric_limits<double>::infinity();
    return s;
  }
  s.wait_prob = erlang_c(load.servers, s.rho);
  double c_mu = load.servers / load.mean_service;
  s.w99 = s.wait_prob / (c_mu * (1.0 - s.rho)) * (1.0 + load.scv) / 2.0 * std::log(100.0);
  return s;
}

double mean_wait_s(const PoolLoad& load) {
  QueueStats s = w99(load);
  if (!s.stable) return std::numeric_limits<double>::infinity();
  double c_mu = load.servers / load.mean_service;
  return s.wait_prob / (c_mu * (1.0 - s.rho)) * (1.0 + load.scv) / 2.0;
}

double pool_p99_ttft_s(const PoolLoad& load, const GpuProfile& g, long B, long p99_l_in) {
  return pool_p99_ttft_capped_s(load, g, n_max(g, B), p99_l_in);
}

double pool_p99_ttft_capped_s(const PoolLoad& load, const GpuProfile& g, int batch_cap,
                              long p99_l_in) {
  QueueStats s = w99(load);
  if (!s.stable) return std::numeric_limits<double>::infinity();
  double iter_s = t_iter_ms(g, batch_cap) / 1000.0;
  return s.w99 + prefill_chunks(g, p99_l_in) * iter_s + iter_s;
}

}  // namespace fleetsim
