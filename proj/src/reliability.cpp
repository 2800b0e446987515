#include "fleetsim/reliability.hpp"

#include <cmath>
#include <stdexcept>

namespace fleetsim {

double availability(double failures_per_node_day, double mttr_days) {
  if (failures_per_node_day < 0 || mttr_days < 0)
    throw std::invalid_argument("failure rate and repair time must be >= 0");
  return 1.0 / (1.0 + failures_per_node_day * mttr_days);
}

long production_count(long n_analytical, double avail) {
  if (n_analytical < 1) throw std::invalid_argument("count must be >= 1");
  if (avail <= 0 || avail > 1) throw std::invalid_argument("availability must be in (0,1]");
  return static_cast<long>(std::ceil(n_analytical / avail));
}

double availability_constant(const std::string& name) {
  if (name == "A100_AVAIL_RSC1_FAST") return 0.9989;
  if (name == "A100_AVAIL_RSC1_SLOW") return 0.9871;
  if (name == "H100_AVAIL_5PCT") return 0.9500;
  throw std::runtime_error("unknown availability constant: " + name);
}

}  // namespace fleetsim
