#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fleetsim/rng.hpp"
#include "fleetsim/workload.hpp"

using namespace fleetsim;

static WorkloadCdf three_step() {
  return load_cdf("[[0.5,50],[0.9,100],[1.0,200]]");
}

TEST_CASE("piecewise-linear CDF interpolates from an implied origin") {
  WorkloadCdf cdf = three_step();
  CHECK(cdf.fraction_below(0) == 0.0);
  CHECK(cdf.fraction_below(-5) == 0.0);
  CHECK(cdf.fraction_below(25) == doctest::Approx(0.25));
  CHECK(cdf.fraction_below(50) == doctest::Approx(0.5));
  CHECK(cdf.fraction_below(75) == doctest::Approx(0.7));
  CHECK(cdf.fraction_below(100) == doctest::Approx(0.9));
  CHECK(cdf.fraction_below(150) == doctest::Approx(0.95));
  CHECK(cdf.fraction_below(200) == doctest::Approx(1.0));
  CHECK(cdf.fraction_below(5000) == 1.0);
  CHECK(cdf.max_tokens() == 200);

  CHECK(cdf.quantile(0) == 0.0);
  CHECK(cdf.quantile(0.25) == doctest::Approx(25));
  CHECK(cdf.quantile(0.5) == doctest::Approx(50));
  CHECK(cdf.quantile(0.7) == doctest::Approx(75));
  CHECK(cdf.quantile(0.95) == doctest::Approx(150));
  CHECK(cdf.quantile(1.0) == 200);

  for (double u : {0.01, 0.1, 0.33, 0.5, 0.62, 0.9, 0.999})
    CHECK(cdf.fraction_below(cdf.quantile(u)) == doctest::Approx(u));
}

TEST_CASE("CDF loader sorts rows, then rejects anything still inconsistent") {
  // out-of-order rows describing a valid CDF are accepted after sorting
  WorkloadCdf cdf = load_cdf("[[0.9,100],[0.5,50],[1.0,200]]");
  CHECK(cdf.quantile(0.5) == doctest::Approx(50));
  CHECK(cdf.breakpoints.size() == 3);

  // named-object form
  WorkloadCdf named = load_cdf(R"({"name":"toy","breakpoints":[[1.0,10]]})");
  CHECK(named.name == "toy");
  CHECK(named.quantile(0.5) == doctest::Approx(5));

  // tokens that decrease once probabilities are sorted cannot be repaired
  CHECK_THROWS_AS(load_cdf("[[0.9,50],[0.5,100],[1.0,200]]"), std::runtime_error);
  // terminal probability must be 1
  CHECK_THROWS_AS(load_cdf("[[0.5,50],[0.99,100]]"), std::runtime_error);
  // duplicated probability
  CHECK_THROWS_AS(load_cdf("[[0.5,50],[0.5,60],[1.0,100]]"), std::runtime_error);
  // token budgets below one
  CHECK_THROWS_AS(load_cdf("[[1.0,0.5]]"), std::runtime_error);
  CHECK_THROWS_AS(load_cdf("[]"), std::runtime_error);
  CHECK_THROWS_AS(load_cdf("{nope"), std::runtime_error);
  CHECK_THROWS_AS(load_cdf(R"({"name":"x"})"), std::runtime_error);
  CHECK_THROWS_AS(load_cdf("[[0.5]]"), std::runtime_error);
}

TEST_CASE("splitting a total preserves it and keeps both sides positive") {
  LengthSample s = split_total(100, 0.3);
  CHECK(s.l_in == 30);
  CHECK(s.l_out == 70);
  CHECK(s.total == 100);

  s = split_total(3, 0.5);
  CHECK(s.l_in == 2);
  CHECK(s.l_out == 1);

  s = split_total(1, 0.5);  // degenerate: both sides clamp to one token
  CHECK(s.l_in == 1);
  CHECK(s.l_out == 1);

  for (long total = 2; total <= 400; ++total) {
    LengthSample x = split_total(total, 0.85);
    CHECK(x.l_in >= 1);
    CHECK(x.l_out >= 1);
    CHECK(x.total == total);
    CHECK(x.l_in + x.l_out == x.total);
  }
  CHECK_THROWS_AS(split_total(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(split_total(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(split_total(10, 1.0), std::invalid_argument);
}

TEST_CASE("sampled totals converge to the CDF (Kolmogorov-Smirnov)") {
  WorkloadSpec spec;
  spec.cdf = load_cdf("[[1.0,4096]]");  // uniform over (0, 4096]
  spec.prompt_fraction = 0.5;
  Rng rng(7);
  const int N = 100000;
  std::vector<double> totals;
  totals.reserve(N);
  for (int i = 0; i < N; ++i) {
    LengthSample s = sample_length(spec, rng);
    CHECK(s.l_in + s.l_out == s.total);
    totals.push_back(static_cast<double>(s.total));
  }
  std::sort(totals.begin(), totals.end());
  double d = 0;
  for (int i = 0; i < N; ++i) {
    double f = spec.cdf.fraction_below(totals[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / N));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / N - f));
  }
  CHECK(d < 0.01);
}

TEST_CASE("conditional moments match closed forms on a uniform distribution") {
  WorkloadCdf cdf = load_cdf("[[1.0,100]]");
  auto identity = [](double t) { return t; };

  Moments full = conditional_moments(cdf, 0, 100, identity);
  CHECK(full.mean == doctest::Approx(50.0).epsilon(1e-4));
  CHECK(full.scv == doctest::Approx(1.0 / 3.0).epsilon(1e-4));

  Moments upper = conditional_moments(cdf, 50, 100, identity);
  CHECK(upper.mean == doctest::Approx(75.0).epsilon(1e-4));
  CHECK(upper.scv == doctest::Approx((2500.0 / 12.0) / (75.0 * 75.0)).epsilon(1e-4));

  // a two-point service function is integrated exactly by the quantile cells
  Moments two = conditional_moments(cdf, 0, 100,
                                    [](double t) { return t <= 50 ? 1.0 : 3.0; });
  CHECK(two.mean == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(two.scv == doctest::Approx(0.25).epsilon(1e-9));

  CHECK_THROWS_AS(conditional_moments(cdf, 200, 300, identity), std::runtime_error);
  CHECK_THROWS_AS(conditional_moments(cdf, 60, 60, identity), std::runtime_error);
}

TEST_CASE("conditional quantiles restrict to the requested band") {
  WorkloadCdf cdf = load_cdf("[[1.0,100]]");
  CHECK(conditional_quantile(cdf, 0, 100, 0.99) == doctest::Approx(99.0));
  CHECK(conditional_quantile(cdf, 50, 100, 0.5) == doctest::Approx(75.0));
  CHECK(conditional_quantile(cdf, 50, 100, 1.0) == doctest::Approx(100.0));
  CHECK_THROWS_AS(conditional_quantile(cdf, 200, 300, 0.5), std::runtime_error);
}

namespace {
// Independent standard-normal quantile: bisection on erf.
double phi_inv_oracle(double p) {
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    double mid = (lo + hi) / 2;
    (0.5 * (1 + std::erf(mid / std::sqrt(2.0))) < p ? lo : hi) = mid;
  }
  return lo;
}
}  // namespace

TEST_CASE("discretized Pareto tracks the closed-form truncated CDF") {
  SyntheticDist d;
  d.kind = SyntheticDist::Kind::Pareto;
  d.shape = 1.5;
  d.scale = 256;
  d.truncation_max = 65536;
  WorkloadCdf cdf = discretize(d);

  double f_max = 1.0 - std::pow(256.0 / 65536.0, 1.5);
  auto closed = [&](double x) {
    return (1.0 - std::pow(256.0 / x, 1.5)) / f_max;
  };
  for (double x : {300.0, 512.0, 1024.0, 4096.0, 16384.0})
    CHECK(std::fabs(cdf.fraction_below(x) - closed(x)) < 6e-3);

  double median_closed = 256.0 * std::pow(1.0 - 0.5 * f_max, -1.0 / 1.5);
  CHECK(cdf.quantile(0.5) == doctest::Approx(median_closed).epsilon(0.01));
  CHECK(cdf.max_tokens() == 65536);
  CHECK(cdf.fraction_below(65536) == doctest::Approx(1.0));
}

TEST_CASE("discretized lognormal matches an erf-based oracle at the median") {
  SyntheticDist d;
  d.kind = SyntheticDist::Kind::Lognormal;
  d.shape = 1.0;
  d.scale = 400;
  d.truncation_max = 8192;
  WorkloadCdf cdf = discretize(d);

  double f_max = 0.5 * (1 + std::erf(std::log(8192.0 / 400.0) / std::sqrt(2.0)));
  double median_oracle = 400.0 * std::exp(phi_inv_oracle(0.5 * f_max));
  CHECK(cdf.quantile(0.5) == doctest::Approx(median_oracle).epsilon(0.02));
  CHECK(cdf.max_tokens() == 8192);
}

TEST_CASE("discretization rejects impossible parameters and merges dense cells") {
  SyntheticDist d;
  d.kind = SyntheticDist::Kind::Pareto;
  d.scale = 100000;
  d.truncation_max = 65536;
  CHECK_THROWS_AS(discretize(d), std::invalid_argument);
  d.scale = 256;
  CHECK_THROWS_AS(discretize(d, 4), std::invalid_argument);

  // a narrow token range collapses many quantile cells into few breakpoints
  SyntheticDist narrow;
  narrow.kind = SyntheticDist::Kind::Pareto;
  narrow.shape = 3.0;
  narrow.scale = 1;
  narrow.truncation_max = 16;
  WorkloadCdf c = discretize(narrow);
  CHECK(c.breakpoints.size() < 32);
  CHECK(c.max_tokens() == 16);
  CHECK(c.fraction_below(16) == doctest::Approx(1.0));
}
