#include "fleetsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fleetsim/reliability.hpp"

namespace fleetsim {

namespace {

// Arrival-rate-independent description of one pool's service distribution,
// so feasibility can be re-evaluated cheaply at any lambda.
struct PoolModel {
  double share = 0;  // probability a request falls in this pool's token range
  double mean_s = 0, scv = 0;
  long p99_l_in = 1;
  int nm = 1;  // concurrent sequences per GPU at the pool's context bound
};

PoolModel pool_model(const WorkloadCdf& cdf, double phi, const GpuProfile& g, long B, double lo,
                     double hi) {
  PoolModel m;
  m.share = cdf.fraction_below(hi) - cdf.fraction_below(lo);
  if (m.share <= 1e-12) {
    m.share = 0;
    return m;
  }
  m.nm = n_max(g, B);
  auto hold = [&](double total) {
    LengthSample ls = split_total(std::max(1L, std::lround(total)), phi);
    return slot_hold_s(g, ls.l_in, ls.l_out, B);
  };
  Moments mo = conditional_moments(cdf, lo, hi, hold);
  m.mean_s = mo.mean;
  m.scv = mo.scv;
  long q99 = std::max(1L, std::lround(conditional_quantile(cdf, lo, hi, 0.99)));
  m.p99_l_in = split_total(q99, phi).l_in;
  return m;
}

struct PoolPlan {
  int count = 0;
  long slots = 0;
  double rho = 0;
  double ttft = 0;
  bool feasible = false;
  std::string cause;
};

// Smallest GPU count where utilization stays under the cap and the analytical
// P99 TTFT meets the SLO. Both constraints relax monotonically with more GPUs
// except the prefill floor, which no count can fix.
PoolPlan size_pool(const PoolModel& m, const GpuProfile& g, long B, double lambda_pool,
                   const SweepSpace& sp) {
  PoolPlan p;
  if (lambda_pool <= 0 || m.share == 0) {
    p.feasible = true;
    return p;
  }
  double iter_s = t_iter_ms(g, m.nm) / 1000.0;
  double floor_ttft = prefill_chunks(g, m.p99_l_in) * iter_s + iter_s;
  if (floor_ttft > sp.slo_p99_ttft_s) {
    p.cause = "prefill-bound";
    p.ttft = floor_ttft;
    return p;
  }
  int c0 = std::max(1, static_cast<int>(std::ceil(
                           lambda_pool * m.mean_s / (sp.rho_cap * m.nm) - 1e-12)));
  for (int c = c0; c <= sp.c_max; ++c) {
    PoolLoad load{lambda_pool, m.mean_s, m.scv, static_cast<long>(c) * m.nm};
    QueueStats st = w99(load);
    p.count = c;
    p.slots = load.servers;
    p.rho = st.rho;
    if (st.rho > sp.rho_cap + 1e-12) continue;
    p.ttft = pool_p99_ttft_s(load, g, B, m.p99_l_in);
    if (p.ttft <= sp.slo_p99_ttft_s) {
      p.feasible = true;
      return p;
    }
  }
  if (p.count == 0) {  // count bound below even the utilization requirement
    PoolLoad load{lambda_pool, m.mean_s, m.scv, static_cast<long>(sp.c_max) * m.nm};
    QueueStats st = w99(load);
    p.count = sp.c_max;
    p.slots = load.servers;
    p.rho = st.rho;
    p.ttft = pool_p99_ttft_s(load, g, B, m.p99_l_in);
  }
  p.cause = "count-bound";
  return p;
}

void fill_production(ParetoPoint& pt, const SweepSpace& sp) {
  double a = sp.node_avail.value_or(1.0);
  pt.prod_n_s = pt.n_s >= 1 ? production_count(pt.n_s, a) : 0;
  pt.prod_n_l = pt.n_l >= 1 ? production_count(pt.n_l, a) : 0;
  double cost_s = pt.n_s >= 1 ? profile_by_name(pt.gpu_s).annual_cost_usd : 0;
  double cost_l = pt.n_l >= 1 ? profile_by_name(pt.gpu_l).annual_cost_usd : 0;
  pt.production_cost_usd = pt.prod_n_s * cost_s + pt.prod_n_l * cost_l;
}

bool rank_points(const ParetoPoint& a, const ParetoPoint& b) {
  if (a.annual_cost_usd != b.annual_cost_usd) return a.annual_cost_usd < b.annual_cost_usd;
  if (a.total_gpus != b.total_gpus) return a.total_gpus < b.total_gpus;
  if (a.slots_s != b.slots_s) return a.slots_s > b.slots_s;  // prefer short-pool headroom
  if (a.gpu_s != b.gpu_s) return a.gpu_s < b.gpu_s;
  if (a.gpu_l != b.gpu_l) return a.gpu_l < b.gpu_l;
  return a.b_short < b.b_short;
}

long baseline_context(double max_tokens) {
  long b = 1024;
  while (b < max_tokens) b *= 2;
  return b;
}

}  // namespace

SweepResult analytical_sweep(const WorkloadSpec& w, const SweepSpace& space) {
  if (space.b_short_grid.empty()) throw std::invalid_argument("empty b_short grid");
  if (space.gpu_catalog.empty()) throw std::invalid_argument("empty GPU catalog");
  if (space.rho_cap <= 0 || space.rho_cap >= 1)
    throw std::invalid_argument("rho_cap must be in (0,1)");
  if (space.c_max < 1) throw std::invalid_argument("c_max must be >= 1");
  if (w.arrival_rate <= 0) throw std::invalid_argument("arrival rate must be > 0");

  double max_tok = w.cdf.max_tokens();
  long b_long = space.long_context_bound > 0 ? space.long_context_bound
                                             : static_cast<long>(std::ceil(max_tok));
  SweepResult out;

  for (long b : space.b_short_grid) {
    if (b < 1) throw std::invalid_argument("b_short must be >= 1");
    double alpha = w.cdf.fraction_below(static_cast<double>(b));
    double lambda_s = w.arrival_rate * alpha;
    double lambda_l = w.arrival_rate * (1 - alpha);
    bool single_pool = (1 - alpha) <= 1e-12;
    for (const GpuProfile& gs : space.gpu_catalog) {
      for (const GpuProfile& gl : space.gpu_catalog) {
        if ((single_pool || !space.allow_mixed_types) && gl.name != gs.name) continue;
        ParetoPoint pt;
        pt.b_short = b;
        pt.b_long = single_pool ? 0 : b_long;
        pt.alpha_s = alpha;
        pt.gpu_s = gs.name;
        pt.gpu_l = single_pool ? "" : gl.name;
        try {
          PoolModel ms = pool_model(w.cdf, w.prompt_fraction, gs, b, 0, static_cast<double>(b));
          PoolPlan ps = size_pool(ms, gs, b, lambda_s, space);
          pt.n_s = ps.count;
          pt.slots_s = ps.slots;
          pt.rho_s = ps.rho;
          pt.pool_ttft_s = ps.ttft;
          if (!ps.feasible) pt.cause = "short-pool " + ps.cause;
          if (!single_pool) {
            PoolModel ml = pool_model(w.cdf, w.prompt_fraction, gl, b_long,
                                      static_cast<double>(b), max_tok);
            PoolPlan pl = size_pool(ml, gl, b_long, lambda_l, space);
            pt.n_l = pl.count;
            pt.slots_l = pl.slots;
            pt.rho_l = pl.rho;
            pt.pool_ttft_l = pl.ttft;
            if (!pl.feasible) {
              if (!pt.cause.empty()) pt.cause += "; ";
              pt.cause += "long-pool " + pl.cause;
            }
          }
        } catch (const std::runtime_error&) {
          pt.cause = "context-bound";  // the context bound leaves no room for one sequence
        }
        pt.total_gpus = pt.n_s + pt.n_l;
        pt.annual_cost_usd = pt.n_s * gs.annual_cost_usd + pt.n_l * gl.annual_cost_usd;
        pt.analytical_slo_pass = pt.cause.empty() && pt.total_gpus > 0;
        fill_production(pt, space);
        if (pt.analytical_slo_pass)
          out.feasible.push_back(std::move(pt));
        else
          out.infeasible.push_back(std::move(pt));
      }
    }
  }

  // Homogeneous single-pool baseline: cheapest GPU type serving everything at
  // the smallest 1024*2^k context bound covering the workload's longest request.
  long b_base = baseline_context(max_tok);
  for (const GpuProfile& g : space.gpu_catalog) {
    ParetoPoint pt;
    pt.b_short = b_base;
    pt.alpha_s = 1;
    pt.gpu_s = g.name;
    try {
      PoolModel m = pool_model(w.cdf, w.prompt_fraction, g, b_base, 0, max_tok);
      PoolPlan p = size_pool(m, g, b_base, w.arrival_rate, space);
      if (!p.feasible) continue;
      pt.n_s = p.count;
      pt.slots_s = p.slots;
      pt.rho_s = p.rho;
      pt.pool_ttft_s = p.ttft;
    } catch (const std::runtime_error&) {
      continue;
    }
    pt.total_gpus = pt.n_s;
    pt.annual_cost_usd = pt.n_s * g.annual_cost_usd;
    pt.analytical_slo_pass = true;
    fill_production(pt, space);
    if (!out.baseline || rank_points(pt, *out.baseline)) out.baseline = std::move(pt);
  }

  if (out.baseline)
    for (ParetoPoint& pt : out.feasible)
      pt.saving_vs_baseline = 1 - pt.annual_cost_usd / out.baseline->annual_cost_usd;

  std::sort(out.feasible.begin(), out.feasible.end(), rank_points);
  std::sort(out.infeasible.begin(), out.infeasible.end(), [](const auto& a, const auto& b) {
    if (a.b_short != b.b_short) return a.b_short < b.b_short;
    if (a.gpu_s != b.gpu_s) return a.gpu_s < b.gpu_s;
    return a.gpu_l < b.gpu_l;
  });
  return out;
}

FleetConfig fleet_for(const ParetoPoint& pt, const RouterConfig& router) {
  FleetConfig fc;
  fc.router = router;
  fc.router.b_short = pt.b_short;
  if (pt.n_s > 0)
    fc.pools.push_back({profile_by_name(pt.gpu_s), pt.n_s, pt.b_short});
  if (pt.n_l > 0)
    fc.pools.push_back({profile_by_name(pt.gpu_l), pt.n_l, pt.b_long});
  if (fc.pools.empty()) throw std::runtime_error("plan has no serving pools");
  return fc;
}

OptimizerResult verify_top_k(const SweepResult& sweep, int k, const WorkloadSpec& w,
                             const SweepSpace& space, const RouterConfig& router,
                             const DesParams& des) {
  if (k < 1) throw std::invalid_argument("top-k must be >= 1");
  OptimizerResult out;
  out.baseline = sweep.baseline;
  out.frontier = sweep.feasible;
  size_t kk = std::min(static_cast<size_t>(k), out.frontier.size());
  for (size_t i = 0; i < kk; ++i) {
    ParetoPoint& pt = out.frontier[i];
    SimOptions so;
    so.seed = des.seed + i;
    so.n_requests = des.n_requests;
    so.slo_p99_ttft_s = space.slo_p99_ttft_s;
    FleetSimResult r = run_sim(fleet_for(pt, router), w, so);
    pt.des_slo_pass = r.fleet.measured > 0 && r.fleet.ttft.p99 <= space.slo_p99_ttft_s;
    pt.des = std::move(r);
    if (pt.des_slo_pass && out.best_index < 0) out.best_index = static_cast<int>(i);
  }
  return out;
}

std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points) {
  if (points.empty()) throw std::invalid_argument("pareto_frontier needs at least one point");
  std::vector<ParetoPoint> out;
  for (size_t i = 0; i < points.size(); ++i) {
    const ParetoPoint& p = points[i];
    bool dominated = false;
    for (size_t j = 0; j < points.size() && !dominated; ++j) {
      if (j == i) continue;
      const ParetoPoint& q = points[j];
      bool as_good = (q.analytical_slo_pass || !p.analytical_slo_pass) &&
                     q.annual_cost_usd <= p.annual_cost_usd && q.total_gpus <= p.total_gpus;
      bool better = (q.analytical_slo_pass && !p.analytical_slo_pass) ||
                    q.annual_cost_usd < p.annual_cost_usd || q.total_gpus < p.total_gpus;
      dominated = as_good && better;
    }
    if (!dominated) out.push_back(p);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ParetoPoint& a, const ParetoPoint& b) { return a.b_short < b.b_short; });
  return out;
}

namespace {

// Largest arrival rate at which the fixed fleet still passes the analytical
// checks, by doubling then bisection.
double headroom_lambda(const ParetoPoint& pt, const WorkloadSpec& w, const SweepSpace& space) {
  const GpuProfile& gs = profile_by_name(pt.gpu_s);
  double max_tok = w.cdf.max_tokens();
  PoolModel ms =
      pool_model(w.cdf, w.prompt_fraction, gs, pt.b_short, 0, static_cast<double>(pt.b_short));
  PoolModel ml;
  const GpuProfile* gl = nullptr;
  if (pt.n_l > 0) {
    gl = &profile_by_name(pt.gpu_l);
    ml = pool_model(w.cdf, w.prompt_fraction, *gl, pt.b_long, static_cast<double>(pt.b_short),
                    max_tok);
  }
  auto pool_ok = [&](double lam, const PoolModel& m, long slots, const GpuProfile& g, long B) {
    if (lam <= 0 || m.share == 0 || slots == 0) return true;
    PoolLoad load{lam, m.mean_s, m.scv, slots};
    QueueStats st = w99(load);
    if (!st.stable || st.rho > space.rho_cap + 1e-12) return false;
    return pool_p99_ttft_s(load, g, B, m.p99_l_in) <= space.slo_p99_ttft_s;
  };
  auto ok = [&](double lam) {
    if (!pool_ok(lam * pt.alpha_s, ms, pt.slots_s, gs, pt.b_short)) return false;
    if (gl && !pool_ok(lam * (1 - pt.alpha_s), ml, pt.slots_l, *gl, pt.b_long)) return false;
    return true;
  };
  double lo = w.arrival_rate, hi = w.arrival_rate;
  int guard = 0;
  while (ok(hi) && guard++ < 40) {
    lo = hi;
    hi *= 2;
  }
  if (ok(hi)) return hi;  // effectively unbounded
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

std::vector<WhatifRow> whatif_lambda_sweep(WorkloadSpec w, const SweepSpace& space,
                                           const std::vector<double>& lambda_grid,
                                           const RouterConfig& router, const DesParams& des) {
  if (lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (size_t i = 0; i < lambda_grid.size(); ++i) {
    if (lambda_grid[i] <= 0) throw std::invalid_argument("lambda must be > 0");
    if (i > 0 && lambda_grid[i] <= lambda_grid[i - 1])
      throw std::invalid_argument("lambda grid must be strictly ascending");
  }
  std::vector<WhatifRow> rows;
  for (double lam : lambda_grid) {
    WhatifRow row;
    row.lambda = lam;
    w.arrival_rate = lam;
    SweepResult sw = analytical_sweep(w, space);
    OptimizerResult res = verify_top_k(sw, des.top_k, w, space, router, des);
    if (res.best_index >= 0) {
      row.feasible = true;
      row.best = res.frontier[res.best_index];
      row.lambda_star = headroom_lambda(row.best, w, space);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fleetsim
