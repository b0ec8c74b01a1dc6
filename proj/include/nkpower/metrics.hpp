#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nkpower/generator.hpp"

namespace nkpower {

enum class MetricKind { Accuracy, TotalVariation, Wins, KLDivergence };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::Accuracy, MetricKind::TotalVariation,
                                             MetricKind::Wins, MetricKind::KLDivergence};

// CLI spelling: accuracy | tv | wins | kl.
std::string_view metric_name(MetricKind kind);
// Case-insensitive; also accepts a few long-form aliases ("total_variation", "kl_divergence").
std::optional<MetricKind> parse_metric(std::string_view text);

// Value range of the oriented comparison statistic.
struct StatisticBounds {
    double lower;
    double upper;
};
StatisticBounds statistic_bounds(MetricKind kind);

inline constexpr double kDefaultSmoothing = 0.5;

struct ComparisonScore {
    double value = 0.0;
    MetricKind metric = MetricKind::Accuracy;
};

struct WinCounts {
    std::size_t wins_a = 0;
    std::size_t wins_b = 0;
    std::size_t ties = 0;

    friend bool operator==(const WinCounts&, const WinCounts&) = default;
};

// Most frequent category; ties go to the lowest index.
std::size_t plurality_vote(std::span<const ResponseTable::Category> row, std::size_t n_categories);
CategoryDistribution empirical_dist(std::span<const ResponseTable::Category> row, std::size_t n_categories);

double accuracy(const ResponseTable& x, const ResponseTable& gold);
// Mean per-item L1 distance between empirical distributions (range [0, 2]).
double total_variation(const ResponseTable& x, const ResponseTable& gold);
// Mean per-item KL(gold || x) in nats, both sides smoothed by (count + lambda) / (K + lambda * M).
// With lambda = 0 a zero in x where gold is positive throws InfiniteDivergence.
double kl_divergence(const ResponseTable& x, const ResponseTable& gold, double smoothing = kDefaultSmoothing);
WinCounts wins(const ResponseTable& a, const ResponseTable& b, const ResponseTable& gold);

// Gamma(A, B, G) oriented so larger values favour A.
ComparisonScore comparison_statistic(MetricKind metric, const ResponseTable& a, const ResponseTable& b,
                                     const ResponseTable& gold, double smoothing = kDefaultSmoothing);

// Several statistics on the same triple, sharing the per-item counts.
std::vector<double> comparison_statistics(std::span<const MetricKind> metrics, const ResponseTable& a,
                                          const ResponseTable& b, const ResponseTable& gold,
                                          double smoothing = kDefaultSmoothing);

}  // namespace nkpower
