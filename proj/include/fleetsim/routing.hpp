#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fleetsim/rng.hpp"
#include "fleetsim/workload.hpp"

namespace fleetsim {

struct Request {
  std::int64_t id = 0;
  double arrival_s = 0;
  LengthSample lengths;
  std::string model_tag;  // only used by the model router
};

struct RouteDecision {
  int pool_index = 0;
  LengthSample effective;  // equals the original lengths unless compressed
};

// Short pool (index 0) iff total <= b_short, else long pool (index 1).
RouteDecision route_length(const Request& req, long b_short);

// Like route_length, but requests in the band (b_short, gamma*b_short] get
// their prompt compressed down so effective total = b_short and go short.
// The completion length is preserved unless the prompt would drop below one
// token. gamma must be > 1.
RouteDecision route_compress(const Request& req, long b_short, double gamma);

// Pool drawn with probability proportional to weight. Throws unless some
// weight is positive.
RouteDecision route_random(const Request& req, const std::vector<double>& weights, Rng& rng);

// Pool looked up from the request's model tag; missing or unmapped tags throw.
RouteDecision route_model(const Request& req, const std::map<std::string, int>& tag_to_pool);

struct RouterConfig {
  enum class Kind { Length, Compress, Random, Model } kind = Kind::Length;
  long b_short = 4096;
  double gamma = 2.0;            // compress band upper bound, multiple of b_short
  std::vector<double> weights;   // random router; empty = per-pool slot capacity
  bool uniform = false;          // random router: ignore capacity, equal weights
  std::map<std::string, int> tag_to_pool;
};

// Dispatch through the configured policy. default_weights is the per-pool
// slot capacity used when the random router has no explicit weights.
RouteDecision route(const RouterConfig& cfg, const Request& req,
                    const std::vector<double>& default_weights, Rng& rng);

}  // namespace fleetsim
