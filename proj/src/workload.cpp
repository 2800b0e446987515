#include "fleetsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fleetsim {

double WorkloadCdf::fraction_below(double tokens) const {
  if (tokens <= 0) return 0.0;
  double prev_p = 0.0, prev_t = 0.0;  // implied origin
  for (const auto& bp : breakpoints) {
    if (tokens <= bp.tokens)
      return prev_p + (bp.cum_prob - prev_p) * (tokens - prev_t) / (bp.tokens - prev_t);
    prev_p = bp.cum_prob;
    prev_t = bp.tokens;
  }
  return 1.0;
}

double WorkloadCdf::quantile(double u) const {
  if (u <= 0) return 0.0;
  if (u >= 1) return breakpoints.back().tokens;
  double prev_p = 0.0, prev_t = 0.0;
  for (const auto& bp : breakpoints) {
    if (u <= bp.cum_prob)
      return prev_t + (bp.tokens - prev_t) * (u - prev_p) / (bp.cum_prob - prev_p);
    prev_p = bp.cum_prob;
    prev_t = bp.tokens;
  }
  return breakpoints.back().tokens;
}

static WorkloadCdf validate(WorkloadCdf cdf) {
  if (cdf.breakpoints.empty()) throw std::runtime_error("CDF has no breakpoints");
  std::stable_sort(cdf.breakpoints.begin(), cdf.breakpoints.end(),
                   [](const CdfPoint& a, const CdfPoint& b) { return a.cum_prob < b.cum_prob; });
  double prev_p = 0.0, prev_t = 0.0;
  for (const auto& bp : cdf.breakpoints) {
    if (bp.cum_prob <= prev_p)
      throw std::runtime_error("CDF probabilities must be strictly increasing");
    if (bp.tokens <= prev_t || bp.tokens < 1)
      throw std::runtime_error("CDF token budgets must be >= 1 and increase with probability");
    prev_p = bp.cum_prob;
    prev_t = bp.tokens;
  }
  if (std::abs(cdf.breakpoints.back().cum_prob - 1.0) > 1e-12)
    throw std::runtime_error("CDF must end at cumulative probability 1.0");
  cdf.breakpoints.back().cum_prob = 1.0;
  return cdf;
}

WorkloadCdf load_cdf(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed CDF JSON: ") + e.what());
  }
  WorkloadCdf cdf;
  const nlohmann::json* pairs = &j;
  if (j.is_object()) {
    if (j.contains("name")) cdf.name = j["name"].get<std::string>();
    if (!j.contains("breakpoints")) throw std::runtime_error("CDF object needs \"breakpoints\"");
    pairs = &j["breakpoints"];
  }
  if (!pairs->is_array()) throw std::runtime_error("CDF breakpoints must be an array of pairs");
  for (const auto& p : *pairs) {
    if (!p.is_array() || p.size() != 2)
      throw std::runtime_error("each CDF breakpoint must be a [cum_prob, tokens] pair");
    cdf.breakpoints.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return validate(std::move(cdf));
}

WorkloadCdf load_cdf_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CDF file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  WorkloadCdf cdf = load_cdf(ss.str());
  if (cdf.name.empty()) cdf.name = path;
  return cdf;
}

// Inverse standard-normal CDF (Acklam's rational approximation, ~1e-9 abs error).
static double inv_normal(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

WorkloadCdf discretize(const SyntheticDist& dist, int points) {
  if (points < 8) throw std::invalid_argument("need at least 8 discretization points");
  if (dist.truncation_max < 2) throw std::invalid_argument("truncation_max must be >= 2");

  // Quantile of the untruncated distribution.
  auto raw_quantile = [&](double u) {
    if (dist.kind == SyntheticDist::Kind::Pareto) {
      if (dist.shape <= 0 || dist.scale < 1)
        throw std::invalid_argument("Pareto needs shape > 0 and scale >= 1");
      return dist.scale * std::pow(1.0 - u, -1.0 / dist.shape);
    }
    if (dist.shape <= 0) throw std::invalid_argument("lognormal needs sigma > 0");
    return dist.scale * std::exp(dist.shape * inv_normal(u));
  };
  // Conditioning on total <= truncation_max: invert at u * F(max).
  double f_max;
  if (dist.kind == SyntheticDist::Kind::Pareto) {
    f_max = 1.0 - std::pow(dist.scale / dist.truncation_max, dist.shape);
    if (f_max <= 0) throw std::invalid_argument("Pareto scale exceeds truncation_max");
  } else {
    // No closed form needed: bisect F at the truncation point via the quantile.
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
      double mid = (lo + hi) / 2;
      (raw_quantile(mid) < dist.truncation_max ? lo : hi) = mid;
    }
    f_max = lo;
  }

  WorkloadCdf cdf;
  cdf.name = dist.kind == SyntheticDist::Kind::Pareto ? "pareto" : "lognormal";
  for (int i = 1; i <= points; ++i) {
    double u = static_cast<double>(i) / points;
    double t = std::max(1.0, std::round(raw_quantile(u * f_max)));
    if (i == points) t = dist.truncation_max;
    if (!cdf.breakpoints.empty() && t <= cdf.breakpoints.back().tokens) {
      cdf.breakpoints.back().cum_prob = u;  // merge cells that round to one token count
      continue;
    }
    cdf.breakpoints.push_back({u, t});
  }
  return validate(std::move(cdf));
}

LengthSample split_total(long total, double prompt_fraction) {
  if (total < 1) throw std::invalid_argument("total tokens must be >= 1");
  if (prompt_fraction <= 0 || prompt_fraction >= 1)
    throw std::invalid_argument("prompt fraction must be in (0,1)");
  LengthSample s;
  // Clamping the prompt to [1, total-1] keeps the split exact for any total
  // >= 2; a single-token request is the one case that must grow (both sides
  // need a token).
  s.l_in = total >= 2 ? std::clamp(std::lround(prompt_fraction * total), 1L, total - 1)
                      : 1;
  s.l_out = std::max(1L, total - s.l_in);
  s.total = s.l_in + s.l_out;
  return s;
}

LengthSample sample_length(const WorkloadSpec& spec, Rng& rng) {
  double t = spec.cdf.quantile(rng.uniform());
  return split_total(std::max(1L, std::lround(t)), spec.prompt_fraction);
}

Moments conditional_moments(const WorkloadCdf& cdf, double lo, double hi,
                            const std::function<double(double)>& service_fn, int cells) {
  if (cells < 256) cells = 256;
  double p_lo = cdf.fraction_below(lo);
  double p_hi = cdf.fraction_below(hi);
  double mass = p_hi - p_lo;
  if (mass <= 1e-12)
    throw std::runtime_error("conditional range carries no probability mass");
  double m1 = 0, m2 = 0;
  for (int i = 0; i < cells; ++i) {
    double u = p_lo + (i + 0.5) / cells * mass;
    double s = service_fn(cdf.quantile(u));
    m1 += s;
    m2 += s * s;
  }
  Moments m;
  m.mean = m1 / cells;
  double var = std::max(0.0, m2 / cells - m.mean * m.mean);
  m.scv = m.mean > 0 ? var / (m.mean * m.mean) : 0.0;
  return m;
}

double conditional_quantile(const WorkloadCdf& cdf, double lo, double hi, double q) {
  double p_lo = cdf.fraction_below(lo);
  double p_hi = cdf.fraction_below(hi);
  if (p_hi - p_lo <= 1e-12)
    throw std::runtime_error("conditional range carries no probability mass");
  return cdf.quantile(p_lo + q * (p_hi - p_lo));
}

}  // namespace fleetsim
