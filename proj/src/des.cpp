#include "fleetsim/des.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <queue>
#include <stdexcept>

namespace fleetsim {

double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (p <= 0 || p > 100) throw std::invalid_argument("percentile must be in (0,100]");
  std::sort(samples.begin(), samples.end());
  size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * samples.size()));
  if (rank < 1) rank = 1;
  return samples[rank - 1];
}

namespace {

struct PoolRuntime {
  int eff_batch = 1;     // concurrent sequences per GPU actually allowed
  long total_slots = 0;  // gpu_count * eff_batch
  double iter_s = 0;     // one iteration at eff_batch, seconds
  long busy = 0;
  std::deque<std::int64_t> fifo;   // waiting request ids in arrival order
  std::vector<int> instance_load;  // in-service count per GPU (least-loaded assignment)
  double util_area = 0;            // integral of busy slots over time
  double last_t = 0;
};

struct ReqState {
  double arrival = 0;
  int pool = -1;
  int instance = -1;
  long l_in = 1, l_out = 1;  // effective lengths after routing
  long chunks = 1;
  double wait = -1, ttft = -1, e2e = -1, hold = 0;
  bool rejected = false;
};

// Min-heap on (time, id); kind is always Completion here.
struct CompletionOrder {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.request_id > b.request_id;
  }
};

PctSet pct_set(std::vector<double>& v) {
  PctSet p;
  if (v.empty()) return p;
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    size_t rank = static_cast<size_t>(std::ceil(q / 100.0 * v.size()));
    return v[rank < 1 ? 0 : rank - 1];
  };
  p.p50 = at(50);
  p.p90 = at(90);
  p.p99 = at(99);
  return p;
}

}  // namespace

FleetSimResult run_sim_requests(const FleetConfig& fleet, const std::vector<Request>& requests,
                                const SimOptions& opts) {
  auto t_start = std::chrono::steady_clock::now();
  if (fleet.pools.empty()) throw std::runtime_error("fleet has no pools");

  const auto n_req = static_cast<std::int64_t>(requests.size());
  std::vector<PoolRuntime> pools(fleet.pools.size());
  std::vector<double> slot_weights;
  for (size_t i = 0; i < fleet.pools.size(); ++i) {
    const PoolConfig& pc = fleet.pools[i];
    if (pc.gpu_count < 1) throw std::runtime_error("pool needs at least one GPU");
    int n = n_max(pc.gpu, pc.context_bound);
    pools[i].eff_batch = opts.batch_cap ? std::min(n, std::max(1, *opts.batch_cap)) : n;
    pools[i].total_slots = static_cast<long>(pc.gpu_count) * pools[i].eff_batch;
    pools[i].iter_s = t_iter_ms(pc.gpu, pools[i].eff_batch) / 1000.0;
    pools[i].instance_load.assign(pc.gpu_count, 0);
    slot_weights.push_back(static_cast<double>(pools[i].total_slots));
  }

  std::vector<ReqState> st(requests.size());
  std::vector<char> seen(requests.size(), 0);
  for (const Request& r : requests) {
    if (r.id < 0 || r.id >= n_req || seen[r.id])
      throw std::invalid_argument("request ids must be unique in [0, N)");
    seen[r.id] = 1;
  }

  // Routing draws come from their own stream so the arrival-generation stream
  // (owned by run_sim) and the router stay independent and reproducible.
  Rng route_rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
  std::priority_queue<SimEvent, std::vector<SimEvent>, CompletionOrder> completions;

  auto advance_util = [&](double now) {
    for (auto& p : pools) {
      p.util_area += static_cast<double>(p.busy) * (now - p.last_t);
      p.last_t = now;
    }
  };

  auto start_service = [&](std::int64_t id, double now) {
    PoolRuntime& p = pools[st[id].pool];
    p.busy++;
    int best = 0;
    for (size_t g = 1; g < p.instance_load.size(); ++g)
      if (p.instance_load[g] < p.instance_load[best]) best = static_cast<int>(g);
    p.instance_load[best]++;
    st[id].instance = best;
    st[id].wait = now - st[id].arrival;
    st[id].ttft = st[id].wait + (st[id].chunks + 1) * p.iter_s;
    st[id].e2e = st[id].wait + st[id].hold;
    completions.push({now + st[id].hold, SimEvent::Kind::Completion, id});
  };

  FleetSimResult res;
  res.seed = opts.seed;
  res.arrivals = static_cast<long>(requests.size());

  size_t next_arrival = 0;
  long completed = 0, rejected_total = 0;
  std::vector<std::int64_t> completion_order;
  completion_order.reserve(requests.size());
  double now = 0;

  while (true) {
    bool have_arr = next_arrival < requests.size();
    bool have_comp = !completions.empty();
    if (!have_arr && (!have_comp || !opts.drain)) break;
    // Completions win timestamp ties so a slot freed at t serves an arrival at t.
    bool take_comp =
        have_comp && (!have_arr || completions.top().time <= requests[next_arrival].arrival_s);
    if (take_comp) {
      SimEvent ev = completions.top();
      completions.pop();
      now = ev.time;
      advance_util(now);
      PoolRuntime& p = pools[st[ev.request_id].pool];
      p.busy--;
      p.instance_load[st[ev.request_id].instance]--;
      completed++;
      completion_order.push_back(ev.request_id);
      if (!p.fifo.empty()) {
        std::int64_t head = p.fifo.front();
        p.fifo.pop_front();
        start_service(head, now);
      }
    } else {
      const Request& rq = requests[next_arrival++];
      if (rq.arrival_s < now && now - rq.arrival_s > 1e-9)
        throw std::invalid_argument("arrival times must be nondecreasing");
      now = std::max(now, rq.arrival_s);
      advance_util(now);
      RouteDecision d = route(fleet.router, rq, slot_weights, route_rng);
      if (d.pool_index < 0 || d.pool_index >= static_cast<int>(pools.size()))
        throw std::runtime_error("router chose a pool outside the fleet");
      ReqState& s = st[rq.id];
      s.arrival = rq.arrival_s;
      s.pool = d.pool_index;
      s.l_in = d.effective.l_in;
      s.l_out = d.effective.l_out;
      const PoolConfig& pc = fleet.pools[d.pool_index];
      if (d.effective.total > pc.context_bound) {
        if (opts.reject_hard_error)
          throw std::runtime_error("request " + std::to_string(rq.id) +
                                   " exceeds the routed pool's context bound");
        s.rejected = true;
        rejected_total++;
        continue;
      }
      s.chunks = prefill_chunks(pc.gpu, s.l_in);
      PoolRuntime& p = pools[d.pool_index];
      s.hold = (s.chunks + s.l_out) * p.iter_s;
      if (p.busy < p.total_slots)
        start_service(rq.id, now);
      else
        p.fifo.push_back(rq.id);
    }
  }

  res.sim_end_s = now;
  res.completions = completed;
  res.in_flight_end = res.arrivals - completed - rejected_total;

  // Warm-up: drop the earliest completions from the measured set.
  long warm = opts.warmup;
  if (warm < 0) {
    long n = static_cast<long>(requests.size());
    warm = (!opts.window_s && n >= 1000) ? std::max(100L, n / 100) : 0;
  }
  std::vector<char> measured(requests.size(), 0);
  for (size_t k = 0; k < completion_order.size(); ++k)
    if (static_cast<long>(k) >= warm) measured[completion_order[k]] = 1;

  res.pools.assign(pools.size(), PoolStats{});
  std::vector<std::vector<double>> w(pools.size()), t(pools.size()), e(pools.size());
  std::vector<long> slo_ok(pools.size(), 0);
  for (size_t id = 0; id < st.size(); ++id) {
    const ReqState& s = st[id];
    if (s.pool < 0) continue;  // never processed (non-drain cut-off before arrival)
    PoolStats& ps = res.pools[s.pool];
    ps.arrivals++;
    if (s.rejected) {
      ps.rejected++;
      continue;
    }
    if (s.e2e < 0) continue;  // still in flight at end
    ps.completions++;
    if (!measured[id]) continue;
    ps.measured++;
    w[s.pool].push_back(s.wait);
    t[s.pool].push_back(s.ttft);
    e[s.pool].push_back(s.e2e);
    if (opts.slo_p99_ttft_s > 0 && s.ttft <= opts.slo_p99_ttft_s) slo_ok[s.pool]++;
  }

  std::vector<double> fw, ft, fe;
  long f_ok = 0;
  double util_num = 0, util_den = 0;
  auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  for (size_t i = 0; i < pools.size(); ++i) {
    PoolStats& ps = res.pools[i];
    ps.mean_wait_s = mean_of(w[i]);
    ps.wait = pct_set(w[i]);
    ps.ttft = pct_set(t[i]);
    ps.e2e = pct_set(e[i]);
    double span = pools[i].last_t;
    ps.mean_util = span > 0 ? pools[i].util_area / (span * pools[i].total_slots) : 0;
    if (opts.slo_p99_ttft_s > 0 && ps.measured > 0)
      ps.slo_attain = static_cast<double>(slo_ok[i]) / ps.measured;
    fw.insert(fw.end(), w[i].begin(), w[i].end());
    ft.insert(ft.end(), t[i].begin(), t[i].end());
    fe.insert(fe.end(), e[i].begin(), e[i].end());
    f_ok += slo_ok[i];
    util_num += pools[i].util_area;
    util_den += span * pools[i].total_slots;
    res.fleet.arrivals += ps.arrivals;
    res.fleet.completions += ps.completions;
    res.fleet.measured += ps.measured;
    res.fleet.rejected += ps.rejected;
  }
  res.fleet.mean_wait_s = mean_of(fw);
  res.fleet.wait = pct_set(fw);
  res.fleet.ttft = pct_set(ft);
  res.fleet.e2e = pct_set(fe);
  res.fleet.mean_util = util_den > 0 ? util_num / util_den : 0;
  if (opts.slo_p99_ttft_s > 0 && res.fleet.measured > 0)
    res.fleet.slo_attain = static_cast<double>(f_ok) / res.fleet.measured;

  if (!opts.trace_path.empty()) {
    std::FILE* f = std::fopen(opts.trace_path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write trace file: " + opts.trace_path);
    std::fprintf(f, "id,arrival_s,pool,queue_wait_s,ttft_s,e2e_s,l_in,l_out\n");
    for (size_t id = 0; id < st.size(); ++id) {
      const ReqState& s = st[id];
      if (s.pool < 0) continue;
      std::fprintf(f, "%zu,%.6f,%d,%.6f,%.6f,%.6f,%ld,%ld\n", id, s.arrival, s.pool, s.wait,
                   s.ttft, s.e2e, s.l_in, s.l_out);
    }
    std::fclose(f);
  }

  auto t_end = std::chrono::steady_clock::now();
  res.wall_s = std::chrono::duration<double>(t_end - t_start).count();
  return res;
}

FleetSimResult run_sim(const FleetConfig& fleet, const WorkloadSpec& workload,
                       const SimOptions& opts) {
  if (workload.arrival_rate <= 0) throw std::invalid_argument("arrival rate must be > 0");
  Rng rng(opts.seed);
  std::vector<Request> requests;
  double t = 0;
  if (opts.window_s) {
    // Fixed-duration window: every arrival landing inside it is simulated
    // (plus the drain that follows).
    if (*opts.window_s <= 0) throw std::invalid_argument("window must be > 0");
    for (std::int64_t id = 0;; ++id) {
      t += rng.exponential(workload.arrival_rate);
      if (t > *opts.window_s) break;
      requests.push_back({id, t, sample_length(workload, rng), ""});
    }
    if (requests.empty()) throw std::runtime_error("no arrivals within the event window");
  } else {
    if (opts.n_requests < 1) throw std::invalid_argument("need at least one request");
    requests.reserve(opts.n_requests);
    for (std::int64_t id = 0; id < opts.n_requests; ++id) {
      t += rng.exponential(workload.arrival_rate);
      requests.push_back({id, t, sample_length(workload, rng), ""});
    }
  }
  return run_sim_requests(fleet, requests, opts);
}

}  // namespace fleetsim
