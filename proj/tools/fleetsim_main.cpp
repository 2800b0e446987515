#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fleetsim/disagg.hpp"
#include "fleetsim/gridflex.hpp"
#include "fleetsim/optimizer.hpp"
#include "fleetsim/report.hpp"
#include "fleetsim/scenario.hpp"

using namespace fleetsim;

namespace {

struct Args {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<long> requests;
  std::string format = "table";
  std::string out;
  std::string trace;
};

int emit(const std::string& body, const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 2;
    }
    f << body;
  }
  std::cout << body;
  return 0;
}

int cmd_optimize(const Scenario& sc, const Args& a, bool csv) {
  if (!sc.sweep)
    throw ConfigError("optimize needs a [sweep] section; explicit fleets run with `simulate`");
  if (!sc.variants.empty())
    throw ConfigError("scenario defines explicit fleets; run them with `simulate`");
  DesParams dp;
  dp.n_requests = a.requests.value_or(sc.sim.requests);
  dp.seed = a.seed.value_or(sc.sim.seed);
  SweepResult sweep = analytical_sweep(sc.workload, *sc.sweep);
  OptimizerResult res = verify_top_k(sweep, dp.top_k, sc.workload, *sc.sweep, sc.router, dp);
  int rc = emit(report_optimize(sc, sweep, res, csv), a.out);
  if (rc) return rc;
  return res.best_index >= 0 ? 0 : 1;
}

int cmd_simulate(const Scenario& sc, const Args& a, bool csv) {
  if (sc.variants.empty())
    throw ConfigError("simulate needs [[variant]] fleets; a sweep space runs with `optimize`");
  if (sc.sweep)
    throw ConfigError("scenario defines a sweep space; run it with `optimize`");
  for (const VariantSpec& v : sc.variants)
    for (const PoolConfig& p : v.fleet.pools)
      try {
        n_max(p.gpu, p.context_bound);
      } catch (const std::runtime_error& e) {
        std::cerr << "infeasible fleet '" << v.name << "': " << e.what() << "\n";
        return 1;
      }
  std::vector<FleetSimResult> runs;
  for (size_t i = 0; i < sc.variants.size(); ++i) {
    SimOptions so;
    so.seed = a.seed.value_or(sc.sim.seed);
    so.n_requests = a.requests.value_or(sc.sim.requests);
    so.warmup = sc.sim.warmup;
    if (sc.sim.window_s > 0) so.window_s = sc.sim.window_s;
    if (sc.sim.batch_cap > 0) so.batch_cap = sc.sim.batch_cap;
    so.slo_p99_ttft_s = sc.slo_p99_ttft_s;
    if (!a.trace.empty())
      so.trace_path =
          sc.variants.size() > 1 ? a.trace + "." + sc.variants[i].name : a.trace;
    runs.push_back(run_sim(sc.variants[i].fleet, sc.workload, so));
  }
  return emit(report_simulate(sc, runs, csv), a.out);
}

int cmd_whatif(const Scenario& sc, const Args& a, bool csv) {
  if (!sc.sweep) throw ConfigError("whatif needs a [sweep] section");
  if (sc.whatif_grid.empty()) throw ConfigError("whatif needs [whatif] lambda_grid");
  DesParams dp;
  dp.n_requests = a.requests.value_or(sc.sim.requests);
  dp.seed = a.seed.value_or(sc.sim.seed);
  std::vector<WhatifRow> rows =
      whatif_lambda_sweep(sc.workload, *sc.sweep, sc.whatif_grid, sc.router, dp);
  int rc = emit(report_whatif(sc, rows, csv), a.out);
  if (rc) return rc;
  for (const WhatifRow& r : rows)
    if (!r.feasible) return 1;
  return 0;
}

int cmd_disagg(const Scenario& sc, const Args& a, bool csv) {
  if (!sc.tpot_slo_s) throw ConfigError("disagg needs [slo] tpot_ms");
  if (sc.slo_p99_ttft_s <= 0) throw ConfigError("disagg needs [slo] p99_ttft_ms");
  DisaggSpace space;
  DisaggScenario ds = sc.disagg.value_or(DisaggScenario{});
  if (!ds.gpus.empty())
    for (const std::string& n : ds.gpus) space.catalog.push_back(profile_by_name(n));
  else
    space.catalog = builtin_profiles();
  space.decode_batch = ds.decode_batch;
  space.beta_ttft = ds.beta_ttft;
  space.rho_cap = ds.rho_cap;
  space.context_bound = ds.context;
  std::vector<DisaggResult> rows =
      size_disagg(sc.workload, space, sc.slo_p99_ttft_s, *sc.tpot_slo_s);
  int rc = emit(report_disagg(sc, rows, csv), a.out);
  if (rc) return rc;
  for (const DisaggResult& r : rows)
    if (r.feasible) return 0;
  return 1;
}

int cmd_gridflex(const Scenario& sc, const Args& a, bool csv) {
  if (!sc.gridflex || sc.gridflex->flex_grid.empty())
    throw ConfigError("gridflex needs a [gridflex] section with flex_grid");
  const GridflexScenario& gf = *sc.gridflex;
  PoolConfig pool{profile_by_name(gf.gpu), gf.count, gf.context};
  std::vector<FlexPoint> rows =
      flex_curve(pool, sc.workload, sc.slo_p99_ttft_s, gf.flex_grid, gf.baseline_batch,
                 gf.window_s, a.seed.value_or(sc.sim.seed));
  return emit(report_gridflex(sc, rows, csv), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fleetsim: capacity planning for LLM inference GPU fleets"};
  app.require_subcommand(1);
  Args a;
  std::uint64_t seed_v = 0;
  long requests_v = 0;
  const char* names[] = {"optimize", "simulate", "whatif", "disagg", "gridflex", "profiles"};
  const char* descs[] = {"sweep split thresholds and GPU types for the cheapest SLO-safe fleet",
                         "simulate explicit fleet variants and report latency percentiles",
                         "minimum fleet vs. arrival rate, with per-fleet headroom",
                         "size disaggregated prefill/decode pools",
                         "power-reduction sweep: batch caps, steady-state and windowed P99",
                         "list built-in GPU profiles"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--scenario", a.scenario, "scenario file (key-value sections or JSON)")
        ->required(std::string(names[i]) != "profiles");
    sub->add_option("--seed", seed_v, "override the scenario RNG seed");
    sub->add_option("--requests", requests_v, "override the simulated request count");
    sub->add_option("--format", a.format, "report format")
        ->check(CLI::IsMember({"table", "csv"}));
    sub->add_option("--out", a.out, "also write the report to this file");
    sub->add_option("--trace", a.trace, "write per-request CSV (simulate only)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string cmd = sub->get_name();
  if (sub->count("--seed")) a.seed = seed_v;
  if (sub->count("--requests")) a.requests = requests_v;
  bool csv = a.format == "csv";

  try {
    if (cmd == "profiles") return emit(report_profiles(csv), a.out);
    Scenario sc = load_scenario(a.scenario);
    if (cmd == "optimize") return cmd_optimize(sc, a, csv);
    if (cmd == "simulate") return cmd_simulate(sc, a, csv);
    if (cmd == "whatif") return cmd_whatif(sc, a, csv);
    if (cmd == "disagg") return cmd_disagg(sc, a, csv);
    if (cmd == "gridflex") return cmd_gridflex(sc, a, csv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
