#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nkpower/fitting.hpp"
#include "nkpower/inference.hpp"
#include "nkpower/sweep.hpp"

namespace nkpower {

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);
// Fixed 17 significant digits.
std::string format_double17(double x);

// Strict: unknown fields and type mismatches throw InvalidSpec naming the
// offending path. Missing fields take the defaults of SweepSpec.
SweepSpec parse_config(std::istream& source);
SweepSpec parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const SweepSpec& spec);

nlohmann::json test_result_json(const TestResult& result);
nlohmann::json minimum_json(const BudgetMinimum& minimum);
// Lowest-budget table plus the CI-width table at each of those budgets.
nlohmann::json summary_json(const SweepReport& report, double p_threshold);

inline constexpr const char* kResultColumns[] = {
    "preset_or_alpha", "metric", "epsilon", "nk", "k", "n", "skipped", "p_value",
    "ci_lower", "ci_upper", "ci_width", "delta", "replicates", "seed", "reason"};

void write_results_csv(const SweepReport& report, std::ostream& sink);
SweepReport read_results_csv(std::istream& source);

// Structured document with every FitResult field; doubles at 17 significant digits.
std::string format_fit_result(const FitResult& fit, std::span<const std::string> label_names);

// One score per line, 17 significant digits.
void write_scores(std::span<const double> scores, std::ostream& sink);
std::vector<double> read_scores(std::istream& source);

}  // namespace nkpower
