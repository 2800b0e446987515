#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetsim/des.hpp"
#include "fleetsim/queueing.hpp"

using namespace fleetsim;

namespace {

// Truncated-exponential total-token CDF rendered through the standard loader.
WorkloadCdf exp_cdf(double mean_tokens, double max_tokens) {
  std::ostringstream js;
  js.setf(std::ios::fmtflags(0), std::ios::floatfield);
  js.precision(12);
  js << "[";
  bool first = true;
  for (int i = 1; i < 512; ++i) {
    double u = i / 512.0;
    double t = -mean_tokens * std::log1p(-u);
    if (t < 1.0) continue;
    js << (first ? "" : ",") << "[" << u << "," << t << "]";
    first = false;
  }
  js << ",[1.0," << max_tokens << "]]";
  return load_cdf(js.str());
}

FleetConfig one_pool(const std::string& gpu, int count, long B) {
  FleetConfig f;
  f.pools.push_back({profile_by_name(gpu), count, B});
  return f;
}

}  // namespace

TEST_CASE("simulated mean wait tracks the analytical queue at single-slot service") {
  // Context bound so large that each GPU holds exactly one sequence: the pool
  // is then a plain c-server queue with near-exponential service.
  const long B = 1048576;
  FleetConfig fleet = one_pool("A100-80GB", 4, B);
  const GpuProfile& g = fleet.pools[0].gpu;
  REQUIRE(n_max(g, B) == 1);

  WorkloadSpec w;
  w.cdf = exp_cdf(115.6, 1400);
  w.prompt_fraction = 0.001;

  auto hold = [&](double t) {
    LengthSample s = split_total(std::max(1L, std::lround(t)), w.prompt_fraction);
    return slot_hold_s(g, s.l_in, s.l_out, B);
  };
  Moments m = conditional_moments(w.cdf, 0, B, hold, 4096);
  w.arrival_rate = 0.7 * 4 / m.mean;

  SimOptions opts;
  opts.seed = 3;
  opts.n_requests = 20000;
  FleetSimResult r = run_sim(fleet, w, opts);

  CHECK(r.fleet.rejected == 0);
  CHECK(r.in_flight_end == 0);
  CHECK(r.fleet.measured == 20000 - 200);  // automatic warm-up

  PoolLoad load{w.arrival_rate, m.mean, m.scv, 4};
  double want = mean_wait_s(load);
  CHECK(r.fleet.mean_wait_s == doctest::Approx(want).epsilon(0.10));
  CHECK(r.fleet.mean_util == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("one slot serves strictly in arrival order with exact timings") {
  const long B = 1048576;
  FleetConfig fleet = one_pool("A100-80GB", 1, B);
  double iter = t_iter_ms(fleet.pools[0].gpu, 1) / 1000.0;  // 8.65 ms

  std::vector<Request> reqs;
  for (int i = 0; i < 3; ++i) reqs.push_back({i, 0.001 * i, {1, 999, 1000}, ""});

  SimOptions opts;
  opts.warmup = 0;
  auto trace = std::filesystem::temp_directory_path() / "fleetsim_unit_trace.csv";
  opts.trace_path = trace.string();
  FleetSimResult r = run_sim_requests(fleet, reqs, opts);

  double hold = 1000 * iter;  // one prefill chunk + 999 completion tokens
  CHECK(r.arrivals == 3);
  CHECK(r.completions == 3);
  CHECK(r.fleet.measured == 3);
  CHECK(r.fleet.wait.p50 == doctest::Approx(hold - 0.001));
  CHECK(r.fleet.wait.p99 == doctest::Approx(2 * hold - 0.002));
  CHECK(r.fleet.mean_wait_s == doctest::Approx(hold - 0.001));
  CHECK(r.fleet.ttft.p50 == doctest::Approx(hold - 0.001 + 2 * iter));
  CHECK(r.fleet.e2e.p50 == doctest::Approx(2 * hold - 0.001));
  CHECK(r.fleet.mean_util == doctest::Approx(1.0));
  CHECK(r.sim_end_s == doctest::Approx(3 * hold));  // back-to-back from t = 0

  // trace carries one row per request with the same numbers
  std::ifstream in(trace);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "id,arrival_s,pool,queue_wait_s,ttft_s,e2e_s,l_in,l_out");
  std::getline(in, line);  // request 0
  std::getline(in, line);  // request 1
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  REQUIRE(f.size() == 8);
  CHECK(f[0] == "1");
  CHECK(std::stod(f[1]) == doctest::Approx(0.001));
  CHECK(f[2] == "0");
  CHECK(std::stod(f[3]) == doctest::Approx(hold - 0.001).epsilon(1e-4));
  CHECK(std::stod(f[5]) == doctest::Approx(2 * hold - 0.001).epsilon(1e-4));
  CHECK(f[6] == "1");
  CHECK(f[7] == "999");
  in.close();
  std::filesystem::remove(trace);
}

TEST_CASE("identical seeds replay identical runs; different seeds diverge") {
  FleetConfig fleet = one_pool("A100-80GB", 2, 8192);
  WorkloadSpec w;
  w.cdf = load_cdf("[[1.0,4096]]");
  w.arrival_rate = 2;
  w.prompt_fraction = 0.5;

  SimOptions opts;
  opts.seed = 9;
  opts.n_requests = 3000;
  FleetSimResult a = run_sim(fleet, w, opts);
  FleetSimResult b = run_sim(fleet, w, opts);
  CHECK(a.fleet.wait.p99 == b.fleet.wait.p99);
  CHECK(a.fleet.ttft.p50 == b.fleet.ttft.p50);
  CHECK(a.fleet.mean_util == b.fleet.mean_util);
  CHECK(a.sim_end_s == b.sim_end_s);
  CHECK(a.completions == b.completions);

  opts.seed = 10;
  FleetSimResult c = run_sim(fleet, w, opts);
  CHECK(c.sim_end_s != a.sim_end_s);  // a different arrival stream
}

TEST_CASE("requests beyond the context bound are rejected, not served") {
  FleetConfig fleet = one_pool("A100-80GB", 1, 8192);
  WorkloadSpec w;
  w.cdf = load_cdf("[[1.0,16384]]");
  w.arrival_rate = 1000;
  w.prompt_fraction = 0.5;

  SimOptions opts;
  opts.seed = 21;
  opts.n_requests = 4000;
  FleetSimResult r = run_sim(fleet, w, opts);
  CHECK(r.arrivals == 4000);
  CHECK(std::fabs(r.fleet.rejected - 2000.0) < 200);
  CHECK(r.completions == 4000 - r.fleet.rejected);
  CHECK(r.in_flight_end == 0);

  opts.reject_hard_error = true;
  opts.n_requests = 50;
  CHECK_THROWS_AS(run_sim(fleet, w, opts), std::runtime_error);
}

TEST_CASE("warm-up drops the earliest completions from the measured set") {
  FleetConfig fleet = one_pool("A100-80GB", 2, 8192);
  WorkloadSpec w;
  w.cdf = load_cdf("[[1.0,4096]]");
  w.arrival_rate = 30;
  w.prompt_fraction = 0.5;

  SimOptions opts;
  opts.seed = 2;
  opts.n_requests = 2000;
  CHECK(run_sim(fleet, w, opts).fleet.measured == 1900);  // auto: max(100, N/100)
  opts.warmup = 0;
  CHECK(run_sim(fleet, w, opts).fleet.measured == 2000);
  opts.warmup = 1999;
  CHECK(run_sim(fleet, w, opts).fleet.measured == 1);
  opts.n_requests = 500;  // small runs skip warm-up automatically
  opts.warmup = -1;
  CHECK(run_sim(fleet, w, opts).fleet.measured == 500);
}

TEST_CASE("capping the batch trades throughput for iteration speed") {
  FleetConfig fleet = one_pool("A100-80GB", 2, 8192);
  WorkloadSpec w;
  w.cdf = load_cdf("[[1.0,2048]]");
  w.arrival_rate = 0.3;
  w.prompt_fraction = 0.5;

  SimOptions opts;
  opts.seed = 4;
  opts.n_requests = 3000;
  FleetSimResult free_batch = run_sim(fleet, w, opts);
  opts.batch_cap = 1;
  FleetSimResult capped = run_sim(fleet, w, opts);
  // two single-sequence servers queue hard where 256 slots never did
  CHECK(capped.fleet.ttft.p99 > free_batch.fleet.ttft.p99);
  CHECK(capped.fleet.e2e.p50 < free_batch.fleet.e2e.p50);  // faster iterations
}

TEST_CASE("window mode simulates every arrival inside the window and drains") {
  FleetConfig fleet = one_pool("A100-80GB", 2, 8192);
  WorkloadSpec w;
  w.cdf = load_cdf("[[1.0,2048]]");
  w.arrival_rate = 5;
  w.prompt_fraction = 0.5;

  SimOptions opts;
  opts.seed = 6;
  opts.window_s = 10.0;
  FleetSimResult r = run_sim(fleet, w, opts);
  CHECK(r.arrivals >= 20);
  CHECK(r.in_flight_end == 0);
  CHECK(r.completions == r.arrivals);
  CHECK(r.fleet.measured == r.completions);  // windows measure everything
  CHECK(r.sim_end_s > 0);

  opts.window_s = -1.0;
  CHECK_THROWS_AS(run_sim(fleet, w, opts), std::invalid_argument);
}

TEST_CASE("malformed request streams are refused") {
  FleetConfig fleet = one_pool("A100-80GB", 1, 8192);
  SimOptions opts;
  std::vector<Request> dup = {{0, 0.0, {1, 10, 11}, ""}, {0, 0.1, {1, 10, 11}, ""}};
  CHECK_THROWS_AS(run_sim_requests(fleet, dup, opts), std::invalid_argument);
  std::vector<Request> oob = {{0, 0.0, {1, 10, 11}, ""}, {2, 0.1, {1, 10, 11}, ""}};
  CHECK_THROWS_AS(run_sim_requests(fleet, oob, opts), std::invalid_argument);
  std::vector<Request> back = {{0, 1.0, {1, 10, 11}, ""}, {1, 0.5, {1, 10, 11}, ""}};
  CHECK_THROWS_AS(run_sim_requests(fleet, back, opts), std::invalid_argument);

  WorkloadSpec w;
  w.cdf = load_cdf("[[1.0,100]]");
  w.arrival_rate = 0;
  CHECK_THROWS_AS(run_sim(fleet, w, opts), std::invalid_argument);
  w.arrival_rate = 1;
  opts.n_requests = 0;
  CHECK_THROWS_AS(run_sim(fleet, w, opts), std::invalid_argument);
  CHECK_THROWS_AS(run_sim_requests(FleetConfig{}, {}, SimOptions{}), std::runtime_error);
}

TEST_CASE("nearest-rank percentile") {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  CHECK(percentile(v, 50) == 50);
  CHECK(percentile(v, 99) == 99);
  CHECK(percentile(v, 100) == 100);
  CHECK(percentile(v, 1) == 1);
  CHECK(percentile({42.0}, 99) == 42.0);
  CHECK_THROWS_AS(percentile({}, 50), std::invalid_argument);
  CHECK_THROWS_AS(percentile({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(percentile({1.0}, 101), std::invalid_argument);
}
