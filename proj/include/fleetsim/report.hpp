#pragma once
#include <string>
#include <utility>
#include <vector>

#include "fleetsim/des.hpp"
#include "fleetsim/disagg.hpp"
#include "fleetsim/gridflex.hpp"
#include "fleetsim/optimizer.hpp"
#include "fleetsim/scenario.hpp"

namespace fleetsim {

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<std::string>> rows;
};

// Aligned-column text with a dashed header rule; no trailing whitespace.
std::string render_table(const Table& t);
// Same cells, comma-separated. Metadata lines keep their leading '#'.
std::string render_csv(const Table& t);

// Deterministic formatting (fixed binary, fixed seed -> byte-stable reports).
std::string fmt_f(double v, int prec);  // fixed-point; "inf" when not finite
std::string fmt_ms(double s);           // seconds -> milliseconds, one decimal
std::string fmt_k(double usd);          // dollars -> $K with trailing zeros trimmed
std::string fmt_pct(double frac);       // 0.429 -> "42.9%"

// Full report bodies, one per command. `csv` flips the table rendering; the
// leading '#' metadata lines are shared.
std::string report_optimize(const Scenario& sc, const SweepResult& sweep,
                            const OptimizerResult& res, bool csv);
std::string report_simulate(const Scenario& sc, const std::vector<FleetSimResult>& runs,
                            bool csv);
std::string report_whatif(const Scenario& sc, const std::vector<WhatifRow>& rows, bool csv);
std::string report_disagg(const Scenario& sc, const std::vector<DisaggResult>& rows, bool csv);
std::string report_gridflex(const Scenario& sc, const std::vector<FlexPoint>& rows, bool csv);
std::string report_profiles(bool csv);

}  // namespace fleetsim
