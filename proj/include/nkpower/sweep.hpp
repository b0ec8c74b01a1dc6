#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nkpower/generator.hpp"
#include "nkpower/inference.hpp"
#include "nkpower/metrics.hpp"

namespace nkpower {

std::vector<std::size_t> default_nk_budgets();
// 1..10, then 20, 40, ..., 500 (35 values).
std::vector<std::size_t> default_k_schedule();
std::vector<double> default_epsilons();

struct SweepSpec {
    std::vector<std::size_t> nk_budgets = default_nk_budgets();
    std::vector<std::size_t> k_schedule = default_k_schedule();
    std::vector<double> epsilons = default_epsilons();
    std::vector<MetricKind> metrics{std::begin(kAllMetrics), std::end(kAllMetrics)};
    // Set when alpha came from the preset catalog.
    std::optional<std::string> preset;
    std::vector<double> alpha;
    // Empty means uniform [1/M] * M.
    std::vector<double> rho;
    std::size_t replicates = 1000;
    double smoothing = kDefaultSmoothing;
    std::uint64_t master_seed = 0;
    std::size_t min_items = 2;
    double p_threshold = 0.05;
    bool paired = false;
    PValueMode p_mode = PValueMode::AllPairs;

    // Throws InvalidSpec.
    void validate() const;
    DirichletParams alpha_params() const;
    DirichletParams rho_params() const;
    // Preset name, or alpha entries joined with ';'.
    std::string alpha_label() const;
};

struct GridCell {
    std::size_t ordinal = 0;
    std::size_t nk = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    double epsilon = 0.0;
    MetricKind metric = MetricKind::Accuracy;
    bool skipped = false;
    std::string skip_reason;
};

struct SweepRow {
    GridCell cell;
    std::optional<TestResult> result;
    // Set only under keep-going when the cell failed.
    std::string error;
};

struct BudgetMinimum {
    MetricKind metric = MetricKind::Accuracy;
    double epsilon = 0.0;
    bool achieved = false;
    std::size_t nk = 0;
    std::size_t k = 0;
    double p_value = 0.0;
    double effect_size = 0.0;
    double ci_width = 0.0;
};

struct SweepReport {
    std::string alpha_label;
    std::uint64_t master_seed = 0;
    std::size_t replicates = 0;
    std::vector<SweepRow> rows;
    std::vector<BudgetMinimum> minima;
};

// nk-major, then k, epsilon, metric. Cells with floor(nk/k) < min_items are
// kept but marked skipped.
std::vector<GridCell> build_grid(const SweepSpec& spec);

// Substream root shared by every (epsilon, metric) cell at this (nk, k).
SeedSpec cell_seed(std::uint64_t master_seed, std::size_t nk, std::size_t k);

GenerationConfig cell_config(const GridCell& cell, const SweepSpec& spec);

TestResult run_cell(const GridCell& cell, const SweepSpec& spec, std::size_t threads = 1);

SweepReport run_sweep(const SweepSpec& spec, std::size_t parallelism, bool keep_going = false);

// Per (metric, epsilon) in order of first appearance: the smallest nk with any
// active cell at p <= threshold, and within it the minimum-p cell (ties to smaller k).
std::vector<BudgetMinimum> find_min_budget(const SweepReport& report, double p_threshold);

// Per (metric, epsilon) at the given nk: the active cell of minimal CI width
// (ties to smaller k). Throws InvalidInput if nk does not occur in the report.
std::vector<BudgetMinimum> find_min_ci(const SweepReport& report, std::size_t nk);

struct CalibrationResult {
    double threshold = 0.05;
    // Fraction of repeats whose p-value is <= threshold.
    double rejection_rate = 0.0;
    double mean_p_value = 0.0;
    // Mean over repeats of the single-replicate rejection rate.
    double replicate_rejection_rate = 0.0;
    std::vector<double> p_values;
};

// Repeats the alt/null comparison with epsilon forced to 0, so both hypotheses
// share one law. Repeat r uses cell_seed(seed, nk, K).child("repeat", r).
CalibrationResult calibrate_null(GenerationConfig config, MetricKind metric, const ScoreOptions& options,
                                 std::size_t repeats, double threshold, std::uint64_t seed, std::size_t nk);

}  // namespace nkpower
