#include "fleetsim/routing.hpp"

#include <algorithm>
#include <stdexcept>

namespace fleetsim {

RouteDecision route_length(const Request& req, long b_short) {
  return {req.lengths.total <= b_short ? 0 : 1, req.lengths};
}

RouteDecision route_compress(const Request& req, long b_short, double gamma) {
  if (gamma <= 1.0) throw std::invalid_argument("compress ratio gamma must be > 1");
  long total = req.lengths.total;
  if (total <= b_short) return {0, req.lengths};
  if (total > static_cast<long>(gamma * b_short)) return {1, req.lengths};
  // Borderline: shrink the prompt until the request fits the short bound.
  LengthSample eff;
  eff.l_out = std::min(req.lengths.l_out, std::max(1L, b_short - 1));
  eff.l_in = std::max(1L, b_short - eff.l_out);
  eff.total = eff.l_in + eff.l_out;
  return {0, eff};
}

RouteDecision route_random(const Request& req, const std::vector<double>& weights, Rng& rng) {
  double sum = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("router weights must be >= 0");
    sum += w;
  }
  if (sum <= 0) throw std::runtime_error("random router needs a positive weight");
  double x = rng.uniform() * sum;
  for (size_t i = 0; i < weights.size(); ++i) {
    x -= weights[i];
    if (x < 0) return {static_cast<int>(i), req.lengths};
  }
  return {static_cast<int>(weights.size()) - 1, req.lengths};
}

RouteDecision route_model(const Request& req, const std::map<std::string, int>& tag_to_pool) {
  if (req.model_tag.empty()) throw std::runtime_error("request has no model tag");
  auto it = tag_to_pool.find(req.model_tag);
  if (it == tag_to_pool.end()) throw std::runtime_error("unmapped model tag: " + req.model_tag);
  return {it->second, req.lengths};
}

RouteDecision route(const RouterConfig& cfg, const Request& req,
                    const std::vector<double>& default_weights, Rng& rng) {
  // A single-pool fleet has nothing to decide regardless of policy.
  if (default_weights.size() == 1 && cfg.kind != RouterConfig::Kind::Model)
    return {0, req.lengths};
  switch (cfg.kind) {
    case RouterConfig::Kind::Length:
      return route_length(req, cfg.b_short);
    case RouterConfig::Kind::Compress:
      return route_compress(req, cfg.b_short, cfg.gamma);
    case RouterConfig::Kind::Random: {
      if (!cfg.weights.empty()) return route_random(req, cfg.weights, rng);
      if (cfg.uniform)
        return route_random(req, std::vector<double>(default_weights.size(), 1.0), rng);
      return route_random(req, default_weights, rng);
    }
    case RouterConfig::Kind::Model:
      return route_model(req, cfg.tag_to_pool);
  }
  throw std::logic_error("unreachable router kind");
}

}  // namespace fleetsim
