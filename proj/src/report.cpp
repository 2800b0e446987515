#include "fleetsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fleetsim {

namespace {

std::string pad(const std::string& s, size_t w) {
  return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
}

void rstrip(std::string& s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
}

std::string pool_cell(int count, const std::string& gpu) {
  return count > 0 && !gpu.empty() ? std::to_string(count) + "x" + gpu : "-";
}

std::string router_cell(const RouterConfig& rc) {
  switch (rc.kind) {
    case RouterConfig::Kind::Length:
      return "length b_short=" + std::to_string(rc.b_short);
    case RouterConfig::Kind::Compress:
      return "compress b_short=" + std::to_string(rc.b_short) + " gamma=" + fmt_f(rc.gamma, 2);
    case RouterConfig::Kind::Random:
      return rc.weights.empty() ? (rc.uniform ? "random uniform" : "random by-capacity")
                                : "random weighted";
    case RouterConfig::Kind::Model:
      return "model tags=" + std::to_string(rc.tag_to_pool.size());
  }
  return "?";
}

std::string workload_line(const Scenario& sc) {
  return "# workload: " + sc.workload.cdf.name + " lambda=" +
         fmt_f(sc.workload.arrival_rate, 2) + "/s phi=" +
         fmt_f(sc.workload.prompt_fraction, 2) + "\n";
}

std::string fleet_cell(const FleetConfig& fc) {
  std::string s;
  for (size_t i = 0; i < fc.pools.size(); ++i) {
    if (i) s += " + ";
    s += pool_cell(fc.pools[i].gpu_count, fc.pools[i].gpu.name) + "@" +
         std::to_string(fc.pools[i].context_bound);
  }
  return s;
}

}  // namespace

std::string fmt_f(double v, int prec) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::string fmt_ms(double s) { return fmt_f(s * 1000.0, 1); }

std::string fmt_k(double usd) {
  std::string s = fmt_f(usd / 1000.0, 2);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::string fmt_pct(double frac) {
  std::string s = fmt_f(frac * 100.0, 1);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.erase(s.size() - 2);
  return s + "%";
}

std::string render_table(const Table& t) {
  std::vector<size_t> wd(t.cols.size());
  for (size_t i = 0; i < t.cols.size(); ++i) wd[i] = t.cols[i].size();
  for (const auto& row : t.rows)
    for (size_t i = 0; i < row.size() && i < wd.size(); ++i)
      wd[i] = std::max(wd[i], row[i].size());
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) line += pad(cells[i], wd[i]) + "  ";
    rstrip(line);
    out += line + "\n";
  };
  emit(t.cols);
  std::vector<std::string> rule;
  for (size_t w : wd) rule.push_back(std::string(w, '-'));
  emit(rule);
  for (const auto& row : t.rows) emit(row);
  return out;
}

std::string render_csv(const Table& t) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ",";
      out += cells[i];
    }
    out += "\n";
  };
  emit(t.cols);
  for (const auto& row : t.rows) emit(row);
  return out;
}

std::string report_optimize(const Scenario& sc, const SweepResult& sweep,
                            const OptimizerResult& res, bool csv) {
  std::string out;
  if (!sc.title.empty()) out += "# " + sc.title + "\n";
  out += workload_line(sc);
  out += "# slo: p99 ttft " + fmt_ms(sc.slo_p99_ttft_s) + " ms\n";

  std::vector<const ParetoPoint*> rows;
  for (const auto& p : res.frontier) rows.push_back(&p);
  for (const auto& p : sweep.infeasible) rows.push_back(&p);
  std::sort(rows.begin(), rows.end(), [](const ParetoPoint* a, const ParetoPoint* b) {
    if (a->b_short != b->b_short) return a->b_short < b->b_short;
    if (a->annual_cost_usd != b->annual_cost_usd) return a->annual_cost_usd < b->annual_cost_usd;
    if (a->gpu_s != b->gpu_s) return a->gpu_s < b->gpu_s;
    return a->gpu_l < b->gpu_l;
  });

  bool avail = sc.sweep && sc.sweep->node_avail.has_value();
  Table t;
  t.cols = {"b_short", "alpha_s", "short_pool", "long_pool", "gpus",   "usd_k_yr",
            "saving",  "rho_s",   "rho_l",      "analytic",  "sim_p99_ms", "sim"};
  if (avail) {
    t.cols.push_back("prod_gpus");
    t.cols.push_back("prod_usd_k");
  }
  for (const ParetoPoint* p : rows) {
    bool ok = p->analytical_slo_pass;
    std::vector<std::string> r = {
        std::to_string(p->b_short),
        fmt_f(p->alpha_s, 3),
        pool_cell(p->n_s, p->gpu_s),
        pool_cell(p->n_l, p->gpu_l),
        ok ? std::to_string(p->total_gpus) : "-",
        ok ? fmt_k(p->annual_cost_usd) : "-",
        ok && sweep.baseline ? fmt_pct(p->saving_vs_baseline) : "-",
        p->rho_s > 0 ? fmt_f(p->rho_s, 3) : "-",
        p->rho_l > 0 ? fmt_f(p->rho_l, 3) : "-",
        ok ? "pass" : p->cause,
        p->des ? fmt_ms(p->des->fleet.ttft.p99) : "-",
        p->des ? (p->des_slo_pass ? "pass" : "FAIL") : "-",
    };
    if (avail) {
      r.push_back(ok ? std::to_string(p->prod_n_s + p->prod_n_l) : "-");
      r.push_back(ok ? fmt_k(p->production_cost_usd) : "-");
    }
    t.rows.push_back(std::move(r));
  }
  out += csv ? render_csv(t) : render_table(t);

  if (sweep.baseline) {
    const ParetoPoint& b = *sweep.baseline;
    out += "# baseline: " + pool_cell(b.n_s, b.gpu_s) + "@" + std::to_string(b.b_short) +
           " cost=" + fmt_k(b.annual_cost_usd) + "K/yr rho=" + fmt_f(b.rho_s, 3) + "\n";
  } else {
    out += "# baseline: none feasible\n";
  }
  if (res.best_index >= 0) {
    const ParetoPoint& b = res.frontier[res.best_index];
    out += "# best: b_short=" + std::to_string(b.b_short) + " short=" +
           pool_cell(b.n_s, b.gpu_s) + " long=" + pool_cell(b.n_l, b.gpu_l) +
           " cost=" + fmt_k(b.annual_cost_usd) + "K/yr";
    if (sweep.baseline) out += " saving=" + fmt_pct(b.saving_vs_baseline);
    out += " sim_p99=" + fmt_ms(b.des->fleet.ttft.p99) + "ms\n";
  } else {
    out += "# best: no candidate passed simulation\n";
  }
  return out;
}

std::string report_simulate(const Scenario& sc, const std::vector<FleetSimResult>& runs,
                            bool csv) {
  std::string out;
  if (!sc.title.empty()) out += "# " + sc.title + "\n";
  out += workload_line(sc);
  if (sc.slo_p99_ttft_s > 0) out += "# slo: p99 ttft " + fmt_ms(sc.slo_p99_ttft_s) + " ms\n";
  std::string simline = "# sim: requests=" + std::to_string(sc.sim.requests) +
                        " seed=" + std::to_string(sc.sim.seed);
  if (sc.sim.window_s > 0) simline += " window_s=" + fmt_f(sc.sim.window_s, 1);
  if (sc.sim.batch_cap > 0) simline += " batch_cap=" + std::to_string(sc.sim.batch_cap);
  out += simline + "\n";

  for (size_t v = 0; v < runs.size() && v < sc.variants.size(); ++v) {
    const VariantSpec& spec = sc.variants[v];
    const FleetSimResult& r = runs[v];
    out += "\n# variant: " + spec.name + "\n";
    out += "# fleet: " + fleet_cell(spec.fleet) + " router=" + router_cell(spec.fleet.router) +
           "\n";
    std::vector<PoolAnalytic> an = analyze_fleet(spec.fleet, sc.workload);

    Table t;
    t.cols = {"pool",        "gpu",         "count",       "context",     "arrivals",
              "rejected",    "completed",   "util",        "slo_attain",  "ttft_p50_ms",
              "ttft_p90_ms", "ttft_p99_ms", "wait_p99_ms", "e2e_p99_ms",  "rho_analytic",
              "p99_analytic_ms"};
    auto stat_row = [&](const std::string& label, const PoolStats& ps, const PoolAnalytic* pa,
                        const PoolConfig* pc) {
      std::vector<std::string> row = {
          label,
          pc ? pc->gpu.name : "-",
          pc ? std::to_string(pc->gpu_count) : "-",
          pc ? std::to_string(pc->context_bound) : "-",
          std::to_string(ps.arrivals),
          std::to_string(ps.rejected),
          std::to_string(ps.completions),
          fmt_f(ps.mean_util, 3),
          ps.slo_attain >= 0 ? fmt_pct(ps.slo_attain) : "-",
          ps.measured > 0 ? fmt_ms(ps.ttft.p50) : "-",
          ps.measured > 0 ? fmt_ms(ps.ttft.p90) : "-",
          ps.measured > 0 ? fmt_ms(ps.ttft.p99) : "-",
          ps.measured > 0 ? fmt_ms(ps.wait.p99) : "-",
          ps.measured > 0 ? fmt_ms(ps.e2e.p99) : "-",
          pa && pa->valid ? fmt_f(pa->rho, 3) : "-",
          pa && pa->valid ? fmt_ms(pa->p99_ttft_s) : "-",
      };
      t.rows.push_back(std::move(row));
    };
    for (size_t i = 0; i < r.pools.size(); ++i)
      stat_row(std::to_string(i), r.pools[i], i < an.size() ? &an[i] : nullptr,
               i < spec.fleet.pools.size() ? &spec.fleet.pools[i] : nullptr);
    stat_row("all", r.fleet, nullptr, nullptr);
    out += csv ? render_csv(t) : render_table(t);
    out += "# totals: arrivals=" + std::to_string(r.arrivals) +
           " completions=" + std::to_string(r.completions) +
           " rejected=" + std::to_string(r.fleet.rejected) +
           " in_flight_end=" + std::to_string(r.in_flight_end) +
           " sim_end=" + fmt_f(r.sim_end_s, 1) + "s\n";
  }
  return out;
}

std::string report_whatif(const Scenario& sc, const std::vector<WhatifRow>& rows, bool csv) {
  std::string out;
  if (!sc.title.empty()) out += "# " + sc.title + "\n";
  out += workload_line(sc);
  out += "# slo: p99 ttft " + fmt_ms(sc.slo_p99_ttft_s) + " ms\n";
  Table t;
  t.cols = {"lambda",   "status", "b_short",    "short_pool",      "long_pool",
            "gpus",     "usd_k_yr", "sim_p99_ms", "headroom_lambda"};
  for (const WhatifRow& r : rows) {
    if (r.feasible) {
      t.rows.push_back({fmt_f(r.lambda, 1), "ok", std::to_string(r.best.b_short),
                        pool_cell(r.best.n_s, r.best.gpu_s),
                        pool_cell(r.best.n_l, r.best.gpu_l),
                        std::to_string(r.best.total_gpus), fmt_k(r.best.annual_cost_usd),
                        r.best.des ? fmt_ms(r.best.des->fleet.ttft.p99) : "-",
                        fmt_f(r.lambda_star, 1)});
    } else {
      t.rows.push_back({fmt_f(r.lambda, 1), "infeasible", "-", "-", "-", "-", "-", "-", "-"});
    }
  }
  out += csv ? render_csv(t) : render_table(t);
  return out;
}

std::string report_disagg(const Scenario& sc, const std::vector<DisaggResult>& rows, bool csv) {
  std::string out;
  if (!sc.title.empty()) out += "# " + sc.title + "\n";
  out += workload_line(sc);
  double beta = rows.empty() ? 1.8 : rows.front().config.beta_ttft;
  int batch = rows.empty() ? 128 : rows.front().config.decode_batch;
  out += "# slo: p99 ttft " + fmt_ms(sc.slo_p99_ttft_s) + " ms, tpot " +
         (sc.tpot_slo_s ? fmt_ms(*sc.tpot_slo_s) : "-") + " ms; beta_ttft=" + fmt_f(beta, 2) +
         " decode_batch=" + std::to_string(batch) + "\n";
  Table t;
  t.cols = {"prefill", "decode",  "config",      "gpus",    "usd_k_yr",
            "ttft_p99_ms", "tpot_ms", "rho_prefill", "rho_decode", "status"};
  bool any = false;
  for (const DisaggResult& r : rows) {
    any = any || r.feasible;
    bool sized = r.config.n_prefill > 0;
    t.rows.push_back({
        r.config.prefill_gpu,
        r.config.decode_gpu,
        sized ? std::to_string(r.config.n_prefill) + "P+" + std::to_string(r.config.n_decode) + "D"
              : "-",
        sized ? std::to_string(r.config.n_prefill + r.config.n_decode) : "-",
        sized ? fmt_k(r.annual_cost_usd) : "-",
        sized && r.cause != "throughput-bound" ? fmt_ms(r.ttft_p99_s) : "-",
        fmt_ms(r.tpot_s),
        r.rho_prefill > 0 ? fmt_f(r.rho_prefill, 3) : "-",
        r.rho_decode > 0 ? fmt_f(r.rho_decode, 3) : "-",
        r.feasible ? "ok" : r.cause,
    });
  }
  out += csv ? render_csv(t) : render_table(t);
  if (!any) out += "# disaggregation not viable\n";
  return out;
}

std::string report_gridflex(const Scenario& sc, const std::vector<FlexPoint>& rows, bool csv) {
  std::string out;
  if (!sc.title.empty()) out += "# " + sc.title + "\n";
  out += workload_line(sc);
  out += "# slo: p99 ttft " + fmt_ms(sc.slo_p99_ttft_s) + " ms\n";
  if (sc.gridflex) {
    out += "# fleet: " + std::to_string(sc.gridflex->count) + "x" + sc.gridflex->gpu + "@" +
           std::to_string(sc.gridflex->context) +
           " baseline_batch=" + std::to_string(sc.gridflex->baseline_batch) +
           " window_s=" + fmt_f(sc.gridflex->window_s, 1) + "\n";
  }
  Table t;
  t.cols = {"flex", "batch_cap", "w_per_gpu", "fleet_kw",        "rho",
            "p99_analytic_ms", "p99_des_ms", "steady_state",    "short_event"};
  bool starred = false;
  for (const FlexPoint& f : rows) {
    starred = starred || f.over_target;
    t.rows.push_back({fmt_pct(f.flex), std::to_string(f.batch_cap) + (f.over_target ? "*" : ""),
                      fmt_f(f.watts_per_gpu, 1), fmt_f(f.fleet_kw, 2), fmt_f(f.rho, 3),
                      fmt_ms(f.p99_analytical_s), fmt_ms(f.p99_des_s),
                      f.slo_pass ? "pass" : "FAIL", f.short_event_pass ? "pass" : "FAIL"});
  }
  out += csv ? render_csv(t) : render_table(t);
  if (starred) out += "# *: even a batch of 1 draws more than the power target\n";
  return out;
}

std::string report_profiles(bool csv) {
  Table t;
  t.cols = {"name",       "w_ms",    "h_ms_per_slot", "kv_blocks", "chunk_tokens",
            "n_max_8192", "n_max_65536", "usd_per_yr", "usd_per_hr", "power_curve"};
  for (const GpuProfile& g : builtin_profiles()) {
    t.rows.push_back({g.name, fmt_f(g.w_ms, 2), fmt_f(g.h_ms_per_slot, 2),
                      std::to_string(g.kv_block_budget), std::to_string(g.chunk_tokens),
                      std::to_string(n_max(g, 8192)), std::to_string(n_max(g, 65536)),
                      fmt_f(g.annual_cost_usd, 0), fmt_f(g.hourly_cost_usd, 2),
                      g.power_curve ? "yes" : "-"});
  }
  return csv ? render_csv(t) : render_table(t);
}

}  // namespace fleetsim
