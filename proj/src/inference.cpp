#include "nkpower/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nkpower/error.hpp"
#include "nkpower/parallel.hpp"

namespace nkpower {

namespace {

// Shifted by the first score so a constant sample has an exact mean.
double mean_of(const std::vector<double>& v) {
    const double pivot = v.front();
    double s = 0.0;
    for (double x : v) s += x - pivot;
    return pivot + s / static_cast<double>(v.size());
}

void require_comparable(const ScoreDistribution& alt, const ScoreDistribution& null) {
    if (alt.metric != null.metric) throw InvalidInput("score distributions use different metrics");
    if (alt.scores.empty() || null.scores.empty()) throw InvalidInput("empty score distribution");
}

// Number of entries of a sorted vector that are >= x.
std::size_t count_at_least(const std::vector<double>& sorted, double x) {
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), x));
}

std::vector<double> sorted_copy(const std::vector<double>& v) {
    std::vector<double> out = v;
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<ScorePair> score_distributions(const GenerationConfig& config, std::span<const MetricKind> metrics,
                                           const ScoreOptions& options, const SeedSpec& seed) {
    config.validate();
    if (options.replicates == 0) throw InvalidParameter("replicates must be >= 1");
    if (metrics.empty()) throw InvalidParameter("no metrics requested");

    const std::size_t r = options.replicates;
    const std::size_t n_metrics = metrics.size();
    // [hypothesis][replicate][metric]
    std::vector<double> alt(r * n_metrics), null(r * n_metrics);

    parallel_for(2 * r, options.threads, [&](std::size_t job) {
        const Hypothesis h = job < r ? Hypothesis::Alt : Hypothesis::Null;
        const std::size_t rep = job % r;
        const std::uint64_t hyp_index = (h == Hypothesis::Null && !options.paired) ? 1 : 0;
        Stream stream = derive_stream(seed.child("hyp", hyp_index).child("rep", rep));
        const TripleSample t = generate(config, h, stream);
        const auto stats = comparison_statistics(metrics, t.model_a, t.model_b, t.gold, options.smoothing);
        auto& dest = h == Hypothesis::Alt ? alt : null;
        std::copy(stats.begin(), stats.end(), dest.begin() + static_cast<std::ptrdiff_t>(rep * n_metrics));
    });

    std::vector<ScorePair> out;
    out.reserve(n_metrics);
    for (std::size_t j = 0; j < n_metrics; ++j) {
        ScorePair pair{{{}, Hypothesis::Alt, metrics[j]}, {{}, Hypothesis::Null, metrics[j]}};
        pair.alt.scores.resize(r);
        pair.null.scores.resize(r);
        for (std::size_t rep = 0; rep < r; ++rep) {
            pair.alt.scores[rep] = alt[rep * n_metrics + j];
            pair.null.scores[rep] = null[rep * n_metrics + j];
        }
        out.push_back(std::move(pair));
    }
    return out;
}

ScorePair score_distributions(const GenerationConfig& config, MetricKind metric, const ScoreOptions& options,
                              const SeedSpec& seed) {
    const MetricKind one[] = {metric};
    return std::move(score_distributions(config, one, options, seed).front());
}

double p_value(const ScoreDistribution& alt, const ScoreDistribution& null) {
    require_comparable(alt, null);
    const std::vector<double> sorted_null = sorted_copy(null.scores);
    // Integer pair count keeps the result independent of alt ordering.
    std::uint64_t exceed = 0;
    for (double a : alt.scores) exceed += count_at_least(sorted_null, a);
    return static_cast<double>(exceed) /
           (static_cast<double>(alt.scores.size()) * static_cast<double>(null.scores.size()));
}

double p_value_against_mean(const ScoreDistribution& alt, const ScoreDistribution& null) {
    require_comparable(alt, null);
    const double m = mean_of(alt.scores);
    const auto exceed = std::count_if(null.scores.begin(), null.scores.end(), [m](double x) { return x >= m; });
    return static_cast<double>(exceed) / static_cast<double>(null.scores.size());
}

double rejection_rate(const ScoreDistribution& alt, const ScoreDistribution& null, double threshold) {
    require_comparable(alt, null);
    const std::vector<double> sorted_null = sorted_copy(null.scores);
    const double r_null = static_cast<double>(null.scores.size());
    const auto rejected = std::count_if(alt.scores.begin(), alt.scores.end(), [&](double a) {
        return static_cast<double>(count_at_least(sorted_null, a)) / r_null <= threshold;
    });
    return static_cast<double>(rejected) / static_cast<double>(alt.scores.size());
}

ConfidenceInterval confidence_interval(const ScoreDistribution& alt) {
    const std::size_t r = alt.scores.size();
    if (r < kMinCiReplicates) {
        throw InsufficientReplicates("confidence interval needs at least " + std::to_string(kMinCiReplicates) +
                                     " replicates (got " + std::to_string(r) + ")");
    }
    const std::vector<double> sorted = sorted_copy(alt.scores);
    const double m = mean_of(alt.scores);
    const std::size_t hi = (975 * r) / 1000;
    const std::size_t lo = (25 * r) / 1000;
    return ConfidenceInterval{2.0 * m - sorted[hi], 2.0 * m - sorted[lo]};
}

double effect_size(const ScoreDistribution& alt) {
    if (alt.scores.empty()) throw InvalidInput("empty score distribution");
    return mean_of(alt.scores);
}

double standardized_effect_size(const ScoreDistribution& alt, const ScoreDistribution& null) {
    require_comparable(alt, null);
    const double ma = mean_of(alt.scores);
    const double mn = mean_of(null.scores);
    auto ss = [](const std::vector<double>& v, double mean) {
        double s = 0.0;
        for (double x : v) s += (x - mean) * (x - mean);
        return s;
    };
    const double dof = static_cast<double>(alt.scores.size() + null.scores.size()) - 2.0;
    const double diff = ma - mn;
    if (dof <= 0.0) return diff == 0.0 ? 0.0 : std::copysign(HUGE_VAL, diff);
    const double sd = std::sqrt((ss(alt.scores, ma) + ss(null.scores, mn)) / dof);
    if (sd == 0.0) return diff == 0.0 ? 0.0 : std::copysign(HUGE_VAL, diff);
    return diff / sd;
}

double within_item_variance(const GenerationConfig& config, std::size_t replicates, const SeedSpec& seed) {
    config.validate();
    if (config.k_responses < 2) throw InvalidParameter("within-item variance is undefined for K = 1");
    if (replicates == 0) throw InvalidParameter("replicates must be >= 1");
    const double k = static_cast<double>(config.k_responses);
    const double m = static_cast<double>(config.n_categories);
    const double correction = k / (k - 1.0);
    double total = 0.0;
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        Stream stream = derive_stream(seed.child("rep", rep));
        const ResponseTable gold = generate_gold(config, stream);
        const auto counts = gold.counts();
        double sum = 0.0;
        for (std::uint32_t c : counts) {
            const double p = c / k;
            sum += p * (1.0 - p);
        }
        total += sum * correction / m / static_cast<double>(config.n_items);
    }
    return total / static_cast<double>(replicates);
}

std::vector<double> export_score_histogram(const ScoreDistribution& dist) {
    return dist.scores;
}

TestResult summarize(const ScorePair& scores, const GenerationConfig& config, std::size_t nk, std::uint64_t seed,
                     PValueMode mode) {
    const ConfidenceInterval ci = confidence_interval(scores.alt);
    TestResult out;
    out.p_value = mode == PValueMode::AllPairs ? p_value(scores.alt, scores.null)
                                               : p_value_against_mean(scores.alt, scores.null);
    out.ci_lower = ci.lower;
    out.ci_upper = ci.upper;
    out.ci_width = ci.width();
    out.effect_size = effect_size(scores.alt);
    out.r_replicates = scores.alt.scores.size();
    out.n = config.n_items;
    out.k = config.k_responses;
    out.nk = nk;
    out.m = config.n_categories;
    out.epsilon = config.epsilon;
    out.metric = scores.alt.metric;
    out.seed = seed;
    return out;
}

}  // namespace nkpower
