#include "nkpower/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nkpower/error.hpp"
#include "nkpower/io.hpp"
#include "nkpower/parallel.hpp"

namespace nkpower {

namespace {

template <typename T>
void require_strictly_increasing(const std::vector<T>& v, const char* name) {
    if (v.empty()) throw InvalidSpec(std::string(name) + " must not be empty");
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i - 1] < v[i])) throw InvalidSpec(std::string(name) + " must be strictly increasing");
    }
}

bool same_group(const GridCell& a, const GridCell& b) {
    return a.nk == b.nk && a.k == b.k && a.epsilon == b.epsilon;
}

using GroupKey = std::pair<MetricKind, double>;

}  // namespace

std::vector<std::size_t> default_nk_budgets() {
    return {100, 250, 500, 1000, 2500, 5000, 10000, 25000, 50000};
}

std::vector<std::size_t> default_k_schedule() {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= 10; ++k) out.push_back(k);
    for (std::size_t k = 20; k <= 500; k += 20) out.push_back(k);
    return out;
}

std::vector<double> default_epsilons() { return {0.1, 0.2, 0.3, 0.4}; }

void SweepSpec::validate() const {
    require_strictly_increasing(nk_budgets, "nk_budgets");
    require_strictly_increasing(k_schedule, "k_schedule");
    if (nk_budgets.front() == 0) throw InvalidSpec("nk_budgets entries must be positive");
    if (k_schedule.front() == 0) throw InvalidSpec("k_schedule entries must be positive");
    if (epsilons.empty()) throw InvalidSpec("epsilons must not be empty");
    for (double e : epsilons) {
        if (!(e > 0.0 && e <= 1.0)) throw InvalidSpec("epsilons must lie in (0, 1]");
    }
    if (metrics.empty()) throw InvalidSpec("metrics must not be empty");
    if (alpha.empty()) throw InvalidSpec("alpha or preset is required");
    try {
        const DirichletParams a = alpha_params();
        const DirichletParams r = rho_params();
        if (r.size() != a.size()) throw InvalidSpec("rho must have the same length as alpha");
    } catch (const InvalidParameter& e) {
        throw InvalidSpec(e.what());
    }
    if (replicates < kMinCiReplicates) {
        throw InvalidSpec("replicates must be at least " + std::to_string(kMinCiReplicates));
    }
    if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) throw InvalidSpec("smoothing must be >= 0");
    if (min_items < 2) throw InvalidSpec("min_items must be at least 2");
    if (!(p_threshold >= 0.0 && p_threshold <= 1.0)) throw InvalidSpec("p_threshold must lie in [0, 1]");
}

DirichletParams SweepSpec::alpha_params() const { return DirichletParams(alpha); }

DirichletParams SweepSpec::rho_params() const {
    if (rho.empty()) return DirichletParams::uniform(alpha.size(), 1.0 / static_cast<double>(alpha.size()));
    return DirichletParams(rho);
}

std::string SweepSpec::alpha_label() const {
    if (preset) return *preset;
    std::string out;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (i) out += ';';
        out += format_double(alpha[i]);
    }
    return out;
}

std::vector<GridCell> build_grid(const SweepSpec& spec) {
    spec.validate();
    std::vector<GridCell> cells;
    cells.reserve(spec.nk_budgets.size() * spec.k_schedule.size() * spec.epsilons.size() * spec.metrics.size());
    for (std::size_t nk : spec.nk_budgets) {
        for (std::size_t k : spec.k_schedule) {
            const std::size_t n = nk / k;
            for (double eps : spec.epsilons) {
                for (MetricKind metric : spec.metrics) {
                    GridCell cell;
                    cell.ordinal = cells.size();
                    cell.nk = nk;
                    cell.k = k;
                    cell.n = n;
                    cell.epsilon = eps;
                    cell.metric = metric;
                    if (n < spec.min_items) {
                        cell.skipped = true;
                        cell.skip_reason = "n=" + std::to_string(n) + " < min_items=" + std::to_string(spec.min_items);
                    }
                    cells.push_back(std::move(cell));
                }
            }
        }
    }
    return cells;
}

SeedSpec cell_seed(std::uint64_t master_seed, std::size_t nk, std::size_t k) {
    return SeedSpec{master_seed, {}}.child("nk", nk).child("k", k);
}

GenerationConfig cell_config(const GridCell& cell, const SweepSpec& spec) {
    return GenerationConfig{
        .n_items = cell.n,
        .k_responses = cell.k,
        .n_categories = spec.alpha.size(),
        .alpha = spec.alpha_params(),
        .rho = spec.rho_params(),
        .epsilon = cell.epsilon,
    };
}

TestResult run_cell(const GridCell& cell, const SweepSpec& spec, std::size_t threads) {
    if (cell.skipped) throw CellSkipped("cell skipped: " + cell.skip_reason);
    const GenerationConfig config = cell_config(cell, spec);
    const ScoreOptions options{spec.replicates, spec.smoothing, spec.paired, threads};
    const ScorePair scores =
        score_distributions(config, cell.metric, options, cell_seed(spec.master_seed, cell.nk, cell.k));
    return summarize(scores, config, cell.nk, spec.master_seed, spec.p_mode);
}

SweepReport run_sweep(const SweepSpec& spec, std::size_t parallelism, bool keep_going) {
    if (parallelism == 0) throw InvalidParameter("parallelism must be >= 1");
    const std::vector<GridCell> grid = build_grid(spec);

    SweepReport report;
    report.alpha_label = spec.alpha_label();
    report.master_seed = spec.master_seed;
    report.replicates = spec.replicates;
    report.rows.reserve(grid.size());
    for (const auto& cell : grid) report.rows.push_back(SweepRow{cell, std::nullopt, {}});

    // One work unit per active (nk, k, epsilon): all metrics are scored on the same draws.
    std::vector<std::pair<std::size_t, std::size_t>> units;  // [begin, end) into grid
    for (std::size_t i = 0; i < grid.size();) {
        std::size_t j = i + 1;
        while (j < grid.size() && same_group(grid[i], grid[j])) ++j;
        if (!grid[i].skipped) units.emplace_back(i, j);
        i = j;
    }

    parallel_for(units.size(), parallelism, [&](std::size_t u) {
        const auto [begin, end] = units[u];
        const GridCell& first = grid[begin];
        try {
            const GenerationConfig config = cell_config(first, spec);
            std::vector<MetricKind> metrics;
            for (std::size_t c = begin; c < end; ++c) metrics.push_back(grid[c].metric);
            const ScoreOptions options{spec.replicates, spec.smoothing, spec.paired, 1};
            const auto pairs =
                score_distributions(config, metrics, options, cell_seed(spec.master_seed, first.nk, first.k));
            for (std::size_t c = begin; c < end; ++c) {
                report.rows[c].result = summarize(pairs[c - begin], config, first.nk, spec.master_seed, spec.p_mode);
            }
        } catch (const std::exception& e) {
            if (!keep_going) throw;
            for (std::size_t c = begin; c < end; ++c) report.rows[c].error = e.what();
        }
    });

    report.minima = find_min_budget(report, spec.p_threshold);
    return report;
}

std::vector<BudgetMinimum> find_min_budget(const SweepReport& report, double p_threshold) {
    std::vector<GroupKey> order;
    std::map<GroupKey, BudgetMinimum> best;
    for (const auto& row : report.rows) {
        const GroupKey key{row.cell.metric, row.cell.epsilon};
        if (!best.contains(key)) {
            order.push_back(key);
            best[key] = BudgetMinimum{row.cell.metric, row.cell.epsilon};
        }
        if (!row.result || !(row.result->p_value <= p_threshold)) continue;
        BudgetMinimum& b = best[key];
        const TestResult& r = *row.result;
        const bool better = !b.achieved || row.cell.nk < b.nk ||
                            (row.cell.nk == b.nk &&
                             (r.p_value < b.p_value || (r.p_value == b.p_value && row.cell.k < b.k)));
        if (better) {
            b.achieved = true;
            b.nk = row.cell.nk;
            b.k = row.cell.k;
            b.p_value = r.p_value;
            b.effect_size = r.effect_size;
            b.ci_width = r.ci_width;
        }
    }
    std::vector<BudgetMinimum> out;
    for (const auto& key : order) out.push_back(best[key]);
    return out;
}

std::vector<BudgetMinimum> find_min_ci(const SweepReport& report, std::size_t nk) {
    const bool present = std::any_of(report.rows.begin(), report.rows.end(),
                                     [nk](const SweepRow& r) { return r.cell.nk == nk; });
    if (!present) throw InvalidInput("budget " + std::to_string(nk) + " does not occur in the report");
    std::vector<GroupKey> order;
    std::map<GroupKey, BudgetMinimum> best;
    for (const auto& row : report.rows) {
        if (row.cell.nk != nk) continue;
        const GroupKey key{row.cell.metric, row.cell.epsilon};
        if (!best.contains(key)) {
            order.push_back(key);
            best[key] = BudgetMinimum{row.cell.metric, row.cell.epsilon};
        }
        if (!row.result) continue;
        BudgetMinimum& b = best[key];
        const TestResult& r = *row.result;
        const bool better =
            !b.achieved || r.ci_width < b.ci_width || (r.ci_width == b.ci_width && row.cell.k < b.k);
        if (better) {
            b.achieved = true;
            b.nk = nk;
            b.k = row.cell.k;
            b.p_value = r.p_value;
            b.effect_size = r.effect_size;
            b.ci_width = r.ci_width;
        }
    }
    std::vector<BudgetMinimum> out;
    for (const auto& key : order) out.push_back(best[key]);
    return out;
}

CalibrationResult calibrate_null(GenerationConfig config, MetricKind metric, const ScoreOptions& options,
                                 std::size_t repeats, double threshold, std::uint64_t seed, std::size_t nk) {
    if (repeats == 0) throw InvalidParameter("repeats must be >= 1");
    config.epsilon = 0.0;
    config.validate();
    CalibrationResult out;
    out.threshold = threshold;
    out.p_values.resize(repeats);
    std::vector<double> replicate_rates(repeats);
    ScoreOptions inner = options;
    inner.threads = 1;
    const SeedSpec root = cell_seed(seed, nk, config.k_responses);
    parallel_for(repeats, options.threads, [&](std::size_t r) {
        const ScorePair scores = score_distributions(config, metric, inner, root.child("repeat", r));
        out.p_values[r] = p_value(scores.alt, scores.null);
        replicate_rates[r] = rejection_rate(scores.alt, scores.null, threshold);
    });
    std::size_t rejected = 0;
    double p_sum = 0.0;
    double rate_sum = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
        rejected += out.p_values[r] <= threshold;
        p_sum += out.p_values[r];
        rate_sum += replicate_rates[r];
    }
    const double n = static_cast<double>(repeats);
    out.rejection_rate = static_cast<double>(rejected) / n;
    out.mean_p_value = p_sum / n;
    out.replicate_rejection_rate = rate_sum / n;
    return out;
}

}  // namespace nkpower
