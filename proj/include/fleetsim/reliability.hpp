#pragma once
#include <string>

namespace fleetsim {

// Steady-state node availability from failure rate (per node-day) and mean
// time to repair (days): 1/(1 + r_f * mttr).
double availability(double failures_per_node_day, double mttr_days);

// Analytical GPU count rounded up so the expected-operational fleet still
// covers it: ceil(n / A).
long production_count(long n_analytical, double avail);

// Published availability figures by deployment label; throws on unknown names.
double availability_constant(const std::string& name);

}  // namespace fleetsim
