#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nkpower/generator.hpp"
#include "nkpower/metrics.hpp"
#include "nkpower/sampling.hpp"

namespace nkpower {

struct ScoreDistribution {
    std::vector<double> scores;
    Hypothesis hypothesis = Hypothesis::Alt;
    MetricKind metric = MetricKind::Accuracy;
};

struct ScorePair {
    ScoreDistribution alt;
    ScoreDistribution null;
};

struct ScoreOptions {
    std::size_t replicates = 1000;
    double smoothing = kDefaultSmoothing;
    // Alt and null replicate r share beta, varrho and the gold table.
    bool paired = false;
    std::size_t threads = 1;
};

// Replicate r of hypothesis h is generated from seed.child("hyp", h).child("rep", r),
// so results do not depend on thread count.
std::vector<ScorePair> score_distributions(const GenerationConfig& config, std::span<const MetricKind> metrics,
                                           const ScoreOptions& options, const SeedSpec& seed);
ScorePair score_distributions(const GenerationConfig& config, MetricKind metric, const ScoreOptions& options,
                              const SeedSpec& seed);

// Fraction of (alt, null) pairs with null >= alt.
double p_value(const ScoreDistribution& alt, const ScoreDistribution& null);
// Fraction of null scores >= mean(alt).
double p_value_against_mean(const ScoreDistribution& alt, const ScoreDistribution& null);
// Fraction of alt replicates whose single-replicate p-value
// (fraction of null >= that replicate) is <= threshold.
double rejection_rate(const ScoreDistribution& alt, const ScoreDistribution& null, double threshold);

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
};

inline constexpr std::size_t kMinCiReplicates = 40;

// 95% reverse-percentile interval: (2*mean - q97.5, 2*mean - q2.5) with
// 0-based order statistics floor(0.975 R) and floor(0.025 R).
ConfidenceInterval confidence_interval(const ScoreDistribution& alt);

double effect_size(const ScoreDistribution& alt);
// (mean(alt) - mean(null)) / pooled standard deviation.
double standardized_effect_size(const ScoreDistribution& alt, const ScoreDistribution& null);

// Mean over replicates and items of (1/M) sum_m p(1-p) K/(K-1) on the gold table.
double within_item_variance(const GenerationConfig& config, std::size_t replicates, const SeedSpec& seed);

std::vector<double> export_score_histogram(const ScoreDistribution& dist);

struct TestResult {
    double p_value = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double ci_width = 0.0;
    double effect_size = 0.0;
    std::size_t r_replicates = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t nk = 0;
    std::size_t m = 0;
    double epsilon = 0.0;
    MetricKind metric = MetricKind::Accuracy;
    std::uint64_t seed = 0;
};

enum class PValueMode { AllPairs, AgainstMean };

// p-value, CI and effect size of one score pair; echo fields come from config.
TestResult summarize(const ScorePair& scores, const GenerationConfig& config, std::size_t nk, std::uint64_t seed,
                     PValueMode mode = PValueMode::AllPairs);

}  // namespace nkpower
