#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fleetsim/des.hpp"
#include "fleetsim/optimizer.hpp"
#include "fleetsim/routing.hpp"
#include "fleetsim/workload.hpp"

namespace fleetsim {

// Bad command line, unreadable/invalid scenario file, or a scenario shape
// that does not match the requested command.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimSettings {
  long requests = 20000;
  std::uint64_t seed = 1;
  long warmup = -1;  // automatic
  double window_s = 0;
  int batch_cap = 0;
};

struct VariantSpec {
  std::string name;
  FleetConfig fleet;  // router filled from the variant override or the scenario default
};

struct DisaggScenario {
  std::vector<std::string> gpus;  // empty = sweep catalog, else all built-ins
  int decode_batch = 128;
  double beta_ttft = 1.80;
  double rho_cap = 0.85;
  long context = 0;
};

struct GridflexScenario {
  std::string gpu = "H100-80GB";
  int count = 1;
  long context = 8192;
  int baseline_batch = 128;
  std::vector<double> flex_grid;
  double window_s = 75;
};

struct Scenario {
  std::string title;
  WorkloadSpec workload;
  double slo_p99_ttft_s = 0;
  std::optional<double> tpot_slo_s;
  std::optional<SweepSpace> sweep;
  std::vector<VariantSpec> variants;
  RouterConfig router;
  SimSettings sim;
  std::vector<double> whatif_grid;
  std::optional<DisaggScenario> disagg;
  std::optional<GridflexScenario> gridflex;
};

// Load a scenario file. The format is a key-value section format (a TOML
// subset: [section], [[list.of.tables]], key = scalar/array, # comments) or a
// JSON object with the same shape; relative CDF paths resolve against the
// scenario file's directory. Throws ConfigError with a line reference.
Scenario load_scenario(const std::string& path);

// Parse a config body into a canonical JSON string (exposed for tests).
std::string config_to_json(const std::string& text);

// Analytical per-pool comparison for an explicit fleet: traffic split by the
// length threshold and conditioned on each pool's context bound (rejected
// tails excluded). Valid for single-pool fleets and two-pool length/compress
// routing; other shapes report invalid.
struct PoolAnalytic {
  bool valid = false;
  double lambda = 0;
  double rho = 0;
  double p99_ttft_s = 0;
  bool stable = false;
};
std::vector<PoolAnalytic> analyze_fleet(const FleetConfig& fleet, const WorkloadSpec& w);

}  // namespace fleetsim
