#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fleetsim/gpu.hpp"

using namespace fleetsim;

TEST_CASE("iteration latency is affine in the batch size") {
  const GpuProfile& a10g = profile_by_name("A10G-24GB");
  const GpuProfile& a100 = profile_by_name("A100-80GB");
  const GpuProfile& h100 = profile_by_name("H100-80GB");
  CHECK(t_iter_ms(a10g, 1) == doctest::Approx(12.90).epsilon(1e-12));
  CHECK(t_iter_ms(a100, 128) == doctest::Approx(91.2).epsilon(1e-12));
  CHECK(t_iter_ms(h100, 128) == doctest::Approx(44.96).epsilon(1e-12));
  CHECK(t_iter_ms(h100, 256) == doctest::Approx(4 + 0.32 * 256).epsilon(1e-12));
  // strictly increasing in n
  CHECK(t_iter_ms(a100, 17) > t_iter_ms(a100, 16));
}

TEST_CASE("concurrency limit divides the block budget by the context bound") {
  const GpuProfile& a10g = profile_by_name("A10G-24GB");
  const GpuProfile& a100 = profile_by_name("A100-80GB");
  const GpuProfile& h100 = profile_by_name("H100-80GB");
  CHECK(n_max(a10g, 8192) == 64);
  CHECK(n_max(a100, 8192) == 128);
  CHECK(n_max(h100, 8192) == 256);
  CHECK(n_max(a10g, 65536) == 8);
  CHECK(n_max(a100, 65536) == 16);
  CHECK(n_max(h100, 65536) == 32);
  // partial blocks round up: 100 tokens -> 7 blocks of 16
  CHECK(n_max(a10g, 100) == 32768 / 7);
  CHECK_THROWS_AS(n_max(a10g, 16 * 32769L), std::runtime_error);
  CHECK_THROWS_AS(n_max(a10g, 0), std::invalid_argument);
}

TEST_CASE("prefill chunk count rounds up per profile chunk size") {
  const GpuProfile& a100 = profile_by_name("A100-80GB");
  const GpuProfile& h100 = profile_by_name("H100-80GB");
  CHECK(prefill_chunks(a100, 1) == 1);
  CHECK(prefill_chunks(a100, 512) == 1);
  CHECK(prefill_chunks(a100, 513) == 2);
  CHECK(prefill_chunks(a100, 1700) == 4);
  CHECK(prefill_chunks(h100, 1024) == 1);
  CHECK(prefill_chunks(h100, 1025) == 2);
  CHECK_THROWS_AS(prefill_chunks(a100, 0), std::invalid_argument);
}

TEST_CASE("slot hold is the amortized service times the batch") {
  const GpuProfile& a100 = profile_by_name("A100-80GB");
  long B = 8192;
  int nm = n_max(a100, B);
  long l_in = 700, l_out = 300;
  double iter_s = t_iter_ms(a100, nm) / 1000.0;
  double want_hold = (prefill_chunks(a100, l_in) + l_out) * iter_s;
  CHECK(slot_hold_s(a100, l_in, l_out, B) == doctest::Approx(want_hold));
  CHECK(service_time_s(a100, l_in, l_out, B) == doctest::Approx(want_hold / nm));
  // capping the batch below n_max shrinks the iteration and thus the hold
  CHECK(slot_hold_capped_s(a100, l_in, l_out, 16) <
        slot_hold_s(a100, l_in, l_out, B));
  CHECK(slot_hold_capped_s(a100, l_in, l_out, nm) ==
        doctest::Approx(want_hold));
}

TEST_CASE("ttft composes queue wait, chunked prefill and one iteration") {
  const GpuProfile& h100 = profile_by_name("H100-80GB");
  long B = 8192;
  double iter_s = t_iter_ms(h100, n_max(h100, B)) / 1000.0;
  CHECK(prefill_s(h100, 3000, B) == doctest::Approx(3 * iter_s));
  CHECK(ttft_s(h100, 0.25, 3000, B) == doctest::Approx(0.25 + 3 * iter_s + iter_s));
}

TEST_CASE("power draw follows the logistic curve within the measured band") {
  const GpuProfile& h100 = profile_by_name("H100-80GB");
  CHECK(std::fabs(power_w(h100, 1) - 304.0) <= 2.0);
  CHECK(std::fabs(power_w(h100, 48) - 540.0) <= 2.0);
  CHECK(std::fabs(power_w(h100, 128) - 583.0) <= 2.0);
  CHECK(h100.power_curve);
  CHECK(h100.power_curve->nominal_w() == doctest::Approx(600.0));

  // Recover the curve parameters from two probes; they must reproduce the
  // configured idle and range within a couple of watts.
  auto s = [&](double b) {
    return 1.0 / (1.0 + std::exp(-h100.power_curve->k *
                                 (std::log2(b) - h100.power_curve->x0)));
  };
  double range = (power_w(h100, 128) - power_w(h100, 1)) / (s(128) - s(1));
  double idle = power_w(h100, 1) - range * s(1);
  CHECK(std::fabs(range - h100.power_curve->p_range_w) < 2.0);
  CHECK(std::fabs(idle - h100.power_curve->p_idle_w) < 2.0);

  // monotone nondecreasing in batch
  double prev = power_w(h100, 1);
  for (int b = 2; b <= 128; ++b) {
    double cur = power_w(h100, b);
    CHECK(cur >= prev);
    prev = cur;
  }
  CHECK_THROWS_AS(power_w(profile_by_name("A100-80GB"), 8),
                  std::runtime_error);
  CHECK_THROWS_AS(power_w(h100, 0.5), std::invalid_argument);
}

TEST_CASE("catalog carries the published prices") {
  CHECK(builtin_profiles().size() == 3);
  CHECK(profile_by_name("A10G-24GB").annual_cost_usd == doctest::Approx(8850));
  CHECK(profile_by_name("A100-80GB").annual_cost_usd == doctest::Approx(19400));
  CHECK(profile_by_name("H100-80GB").annual_cost_usd == doctest::Approx(35200));
  CHECK(profile_by_name("H100-80GB").hourly_cost_usd == doctest::Approx(4.02));
  CHECK_THROWS_AS(profile_by_name("B200"), std::runtime_error);
}
