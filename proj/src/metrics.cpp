#include "nkpower/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "nkpower/error.hpp"

namespace nkpower {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Per-item counts of one table, with everything the metrics need.
struct Counts {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    std::vector<std::uint32_t> c;

    explicit Counts(const ResponseTable& t)
        : n(t.n_items()), k(t.k_responses()), m(t.n_categories()), c(t.counts()) {}

    const std::uint32_t* item(std::size_t i) const { return c.data() + i * m; }

    std::size_t vote(std::size_t i) const {
        const auto* row = item(i);
        return static_cast<std::size_t>(std::max_element(row, row + m) - row);
    }
};

void require_same_items(const ResponseTable& x, const ResponseTable& g) {
    if (x.n_items() != g.n_items()) {
        throw ShapeError("tables differ in item count (" + std::to_string(x.n_items()) + " vs " +
                         std::to_string(g.n_items()) + ")");
    }
}

void require_same_items_and_categories(const ResponseTable& x, const ResponseTable& g) {
    require_same_items(x, g);
    if (x.n_categories() != g.n_categories()) {
        throw ShapeError("tables differ in category count");
    }
}

double item_l1(const Counts& x, const Counts& g, std::size_t i) {
    const auto* cx = x.item(i);
    const auto* cg = g.item(i);
    const double kx = static_cast<double>(x.k);
    const double kg = static_cast<double>(g.k);
    double d = 0.0;
    for (std::size_t m = 0; m < x.m; ++m) {
        d += std::abs(cx[m] / kx - cg[m] / kg);
    }
    return d;
}

double accuracy_counts(const Counts& x, const Counts& g) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < x.n; ++i) {
        if (x.vote(i) == g.vote(i)) ++agree;
    }
    return static_cast<double>(agree) / static_cast<double>(x.n);
}

double tv_counts(const Counts& x, const Counts& g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) sum += item_l1(x, g, i);
    return sum / static_cast<double>(x.n);
}

double kl_counts(const Counts& x, const Counts& g, double lambda) {
    const double lm = lambda * static_cast<double>(x.m);
    const double denom_x = static_cast<double>(x.k) + lm;
    const double denom_g = static_cast<double>(g.k) + lm;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        const auto* cx = x.item(i);
        const auto* cg = g.item(i);
        for (std::size_t m = 0; m < x.m; ++m) {
            const double pg = (cg[m] + lambda) / denom_g;
            if (pg == 0.0) continue;
            const double px = (cx[m] + lambda) / denom_x;
            if (px == 0.0) {
                throw InfiniteDivergence("KL divergence is infinite: item " + std::to_string(i) +
                                         " has zero count in category " + std::to_string(m) +
                                         " where gold is positive (use smoothing > 0)");
            }
            sum += pg * std::log(pg / px);
        }
    }
    return sum / static_cast<double>(x.n);
}

WinCounts wins_counts(const Counts& a, const Counts& b, const Counts& g) {
    WinCounts out;
    for (std::size_t i = 0; i < a.n; ++i) {
        const double ta = item_l1(a, g, i);
        const double tb = item_l1(b, g, i);
        if (ta < tb) {
            ++out.wins_a;
        } else if (tb < ta) {
            ++out.wins_b;
        } else {
            ++out.ties;
        }
    }
    return out;
}

double statistic_counts(MetricKind metric, const Counts& a, const Counts& b, const Counts& g, double lambda) {
    switch (metric) {
        case MetricKind::Accuracy:
            return accuracy_counts(a, g) - accuracy_counts(b, g);
        case MetricKind::TotalVariation:
            return tv_counts(b, g) - tv_counts(a, g);
        case MetricKind::KLDivergence:
            return kl_counts(b, g, lambda) - kl_counts(a, g, lambda);
        case MetricKind::Wins: {
            const WinCounts w = wins_counts(a, b, g);
            return (static_cast<double>(w.wins_a) - static_cast<double>(w.wins_b)) / static_cast<double>(a.n);
        }
    }
    return 0.0;
}

void require_smoothing(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidParameter("smoothing must be a finite value >= 0");
    }
}

}  // namespace

std::string_view metric_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::Accuracy: return "accuracy";
        case MetricKind::TotalVariation: return "tv";
        case MetricKind::Wins: return "wins";
        case MetricKind::KLDivergence: return "kl";
    }
    return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view text) {
    const std::string s = lowercase(text);
    if (s == "accuracy" || s == "acc") return MetricKind::Accuracy;
    if (s == "tv" || s == "total_variation" || s == "totalvariation") return MetricKind::TotalVariation;
    if (s == "wins") return MetricKind::Wins;
    if (s == "kl" || s == "kl_divergence" || s == "kldivergence" || s == "kl-div") return MetricKind::KLDivergence;
    return std::nullopt;
}

StatisticBounds statistic_bounds(MetricKind kind) {
    switch (kind) {
        case MetricKind::Accuracy: return {-1.0, 1.0};
        case MetricKind::TotalVariation: return {-2.0, 2.0};
        case MetricKind::Wins: return {-1.0, 1.0};
        case MetricKind::KLDivergence: break;
    }
    return {-HUGE_VAL, HUGE_VAL};
}

std::size_t plurality_vote(std::span<const ResponseTable::Category> row, std::size_t n_categories) {
    if (row.empty()) throw InvalidInput("plurality vote of an empty row");
    std::vector<std::uint32_t> counts(n_categories, 0);
    for (auto v : row) {
        if (v >= n_categories) throw InvalidInput("category index out of range");
        ++counts[v];
    }
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

CategoryDistribution empirical_dist(std::span<const ResponseTable::Category> row, std::size_t n_categories) {
    if (row.empty()) throw InvalidInput("empirical distribution of an empty row");
    std::vector<double> p(n_categories, 0.0);
    for (auto v : row) {
        if (v >= n_categories) throw InvalidInput("category index out of range");
        p[v] += 1.0;
    }
    const double k = static_cast<double>(row.size());
    for (double& x : p) x /= k;
    return CategoryDistribution(std::move(p));
}

double accuracy(const ResponseTable& x, const ResponseTable& gold) {
    require_same_items(x, gold);
    if (x.n_items() == 0) throw InvalidInput("accuracy of an empty table");
    return accuracy_counts(Counts(x), Counts(gold));
}

double total_variation(const ResponseTable& x, const ResponseTable& gold) {
    require_same_items_and_categories(x, gold);
    if (x.n_items() == 0) throw InvalidInput("total variation of an empty table");
    return tv_counts(Counts(x), Counts(gold));
}

double kl_divergence(const ResponseTable& x, const ResponseTable& gold, double smoothing) {
    require_same_items_and_categories(x, gold);
    require_smoothing(smoothing);
    if (x.n_items() == 0) throw InvalidInput("KL divergence of an empty table");
    return kl_counts(Counts(x), Counts(gold), smoothing);
}

WinCounts wins(const ResponseTable& a, const ResponseTable& b, const ResponseTable& gold) {
    require_same_items_and_categories(a, gold);
    require_same_items_and_categories(b, gold);
    return wins_counts(Counts(a), Counts(b), Counts(gold));
}

std::vector<double> comparison_statistics(std::span<const MetricKind> metrics, const ResponseTable& a,
                                          const ResponseTable& b, const ResponseTable& gold, double smoothing) {
    require_same_items_and_categories(a, gold);
    require_same_items_and_categories(b, gold);
    require_smoothing(smoothing);
    if (a.n_items() == 0) throw InvalidInput("comparison of empty tables");
    const Counts ca(a), cb(b), cg(gold);
    std::vector<double> out;
    out.reserve(metrics.size());
    for (MetricKind metric : metrics) out.push_back(statistic_counts(metric, ca, cb, cg, smoothing));
    return out;
}

ComparisonScore comparison_statistic(MetricKind metric, const ResponseTable& a, const ResponseTable& b,
                                     const ResponseTable& gold, double smoothing) {
    const MetricKind one[] = {metric};
    return ComparisonScore{comparison_statistics(one, a, b, gold, smoothing).front(), metric};
}

}  // namespace nkpower
