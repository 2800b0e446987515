#pragma once
#include <functional>
#include <string>
#include <vector>

#include "fleetsim/rng.hpp"

namespace fleetsim {

struct CdfPoint {
  double cum_prob = 0;  // in (0, 1]
  double tokens = 0;    // total token budget, >= 1
};

// Empirical distribution of total tokens per request. Piecewise linear on the
// token axis with an implied origin at (0,0); the same interpolation serves
// F(B), quantiles, inverse-CDF sampling and conditional moments, so sampled
// frequencies always converge to fraction_below.
struct WorkloadCdf {
  std::string name;
  std::vector<CdfPoint> breakpoints;  // strictly increasing in both fields, last cum_prob = 1

  double fraction_below(double tokens) const;  // F(B), linear between breakpoints
  double quantile(double u) const;             // inverse of F, u in [0,1]
  double max_tokens() const { return breakpoints.back().tokens; }
};

// Parse a CDF from JSON: either [[cum_prob, tokens], ...] or
// {"name": ..., "breakpoints": [[cum_prob, tokens], ...]}.
// Pairs are sorted by cum_prob first; an order that stays conflicting after
// the sort (token budgets not increasing with probability) is rejected, as is
// a missing terminal cum_prob of 1.0.
WorkloadCdf load_cdf(const std::string& json_text);
WorkloadCdf load_cdf_file(const std::string& path);

// Synthetic total-token distributions, discretized to a WorkloadCdf at load
// time so every consumer sees one distribution format.
struct SyntheticDist {
  enum class Kind { Pareto, Lognormal } kind = Kind::Pareto;
  double shape = 1.5;        // Pareto tail index alpha / lognormal sigma
  double scale = 256;        // Pareto minimum x_m / lognormal exp(mu)
  long truncation_max = 65536;
};
WorkloadCdf discretize(const SyntheticDist& dist, int points = 512);

struct LengthSample {
  long l_in = 1;
  long l_out = 1;
  long total = 2;  // always l_in + l_out
};

// Deterministic split of a sampled total into prompt and completion tokens.
LengthSample split_total(long total, double prompt_fraction);

struct WorkloadSpec {
  WorkloadCdf cdf;
  double arrival_rate = 1;      // requests per second
  double prompt_fraction = 0.5; // fraction of total tokens that are input
};

LengthSample sample_length(const WorkloadSpec& spec, Rng& rng);

struct Moments {
  double mean = 0;  // E[f(T)] over the conditional range
  double scv = 0;   // Var/mean^2
};

// Moments of service_fn(total) conditional on total in (lo, hi]: the
// conditional distribution is cut into equal-probability quantile cells and
// service_fn is evaluated at each cell's probability midpoint. Throws when the
// range carries no mass.
Moments conditional_moments(const WorkloadCdf& cdf, double lo, double hi,
                            const std::function<double(double)>& service_fn,
                            int cells = 1024);

// q-quantile (q in (0,1]) of total conditional on total in (lo, hi].
double conditional_quantile(const WorkloadCdf& cdf, double lo, double hi, double q);

}  // namespace fleetsim
