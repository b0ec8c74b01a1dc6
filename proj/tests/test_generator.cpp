#include <cmath>
#include <numeric>

#include "doctest.h"
#include "nkpower/error.hpp"
#include "nkpower/generator.hpp"
#include "nkpower/metrics.hpp"

using namespace nkpower;

namespace {

GenerationConfig make(std::size_t n, std::size_t k, std::vector<double> alpha, std::vector<double> rho, double eps) {
    const std::size_t m = alpha.size();
    return GenerationConfig{n, k, m, DirichletParams(std::move(alpha)), DirichletParams(std::move(rho)), eps};
}

std::vector<double> pooled_frequencies(const ResponseTable& t) {
    std::vector<double> f(t.n_categories(), 0.0);
    for (std::size_t i = 0; i < t.n_items(); ++i) {
        for (auto v : t.row(i)) f[v] += 1.0;
    }
    const double total = static_cast<double>(t.n_items() * t.k_responses());
    for (double& x : f) x /= total;
    return f;
}

}  // namespace

TEST_CASE("item parameters are a convex combination") {
    Stream stream = derive_stream(SeedSpec{1, {}});
    SUBCASE("epsilon = 0 gives beta") {
        const auto p = generate_item_params(make(1, 1, {2, 3, 4}, {1, 1, 1}, 0.0), stream);
        CHECK(p.gamma == p.beta);
    }
    SUBCASE("epsilon = 1 gives varrho") {
        const auto p = generate_item_params(make(1, 1, {2, 3, 4}, {1, 1, 1}, 1.0), stream);
        CHECK(p.gamma == p.varrho);
    }
    SUBCASE("arithmetic") {
        const auto g = convex_mix(CategoryDistribution({1, 0}), CategoryDistribution({0, 1}), 0.3);
        CHECK(g[0] == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(g[1] == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("invariant holds for random draws") {
        const auto cfg = make(1, 1, {5.22, 0.86, 2.75}, {1. / 3, 1. / 3, 1. / 3}, 0.37);
        for (int i = 0; i < 200; ++i) {
            const auto p = generate_item_params(cfg, stream);
            for (std::size_t m = 0; m < 3; ++m) {
                CHECK(std::abs(p.gamma[m] - (0.63 * p.beta[m] + 0.37 * p.varrho[m])) < 1e-9);
            }
        }
    }
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(make(10, 5, {1, 1}, {1, 1}, 1.5).validate(), InvalidParameter);
    CHECK_THROWS_AS(make(10, 5, {1, 1}, {1, 1}, -0.1).validate(), InvalidParameter);
    CHECK_THROWS_AS(make(0, 5, {1, 1}, {1, 1}, 0.1).validate(), InvalidParameter);
    auto bad = make(10, 5, {1, 1}, {1, 1, 1}, 0.1);
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    CHECK_THROWS_AS(ResponseTable({{0, 1}, {0}}, 2), ShapeError);
    CHECK_THROWS_AS(ResponseTable({{0, 2}}, 2), InvalidInput);
}

TEST_CASE("H_alt at epsilon 0 gives A and B the gold law") {
    Stream stream = derive_stream(SeedSpec{2, {}});
    const auto t = generate_alt(make(50, 1000, {1e9, 1e9}, {0.5, 0.5}, 0.0), stream);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(std::abs(empirical_dist(t.model_a.row(i), 2)[0] - 0.5) < 0.05);
        CHECK(std::abs(empirical_dist(t.model_b.row(i), 2)[0] - 0.5) < 0.05);
    }
}

TEST_CASE("H_alt degenerate endpoints") {
    Stream stream = derive_stream(SeedSpec{3, {}});
    const auto t = generate_alt(make(20, 50, {1e9, 1e-9}, {1e-9, 1e9}, 1.0), stream);
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t j = 0; j < 50; ++j) {
            CHECK(t.gold.at(i, j) == 0);
            CHECK(t.model_a.at(i, j) == 0);
            CHECK(t.model_b.at(i, j) == 1);
        }
    }
}

TEST_CASE("pooled gold frequencies match the Dirichlet-categorical marginal") {
    // Marginal P(category m) = E[beta_m] = alpha_m / sum(alpha).
    const auto cfg = make(100, 20, {5.22, 0.86, 2.75}, {1. / 3, 1. / 3, 1. / 3}, 0.3);
    const double a0 = 5.22 + 0.86 + 2.75;
    const std::vector<double> marginal = {5.22 / a0, 0.86 / a0, 2.75 / a0};
    std::vector<double> pooled(3, 0.0);
    for (std::uint64_t r = 0; r < 200; ++r) {
        Stream stream = derive_stream(SeedSpec{4, {{"rep", r}}});
        const auto f = pooled_frequencies(generate_alt(cfg, stream).gold);
        for (std::size_t m = 0; m < 3; ++m) pooled[m] += f[m] / 200.0;
    }
    for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(pooled[m] - marginal[m]) < 0.02);
}

TEST_CASE("H_null mixes beta and gamma with probability one half") {
    Stream stream = derive_stream(SeedSpec{5, {}});
    // beta ~ [1, 0], gamma ~ [0, 1]
    const auto t = generate_null(make(1, 10000, {1e9, 1e-9}, {1e-9, 1e9}, 1.0), stream);
    CHECK(std::abs(pooled_frequencies(t.model_a)[1] - 0.5) < 0.02);
    CHECK(std::abs(pooled_frequencies(t.model_b)[1] - 0.5) < 0.02);
    CHECK(pooled_frequencies(t.gold)[1] == 0.0);
}

TEST_CASE("H_null and H_alt coincide in law at epsilon 0") {
    const auto cfg = make(200, 10, {5.22, 0.86, 2.75}, {1. / 3, 1. / 3, 1. / 3}, 0.0);
    std::vector<double> alt_b(3, 0.0), null_a(3, 0.0), null_b(3, 0.0);
    for (std::uint64_t r = 0; r < 100; ++r) {
        Stream s1 = derive_stream(SeedSpec{6, {{"alt", r}}});
        Stream s2 = derive_stream(SeedSpec{6, {{"null", r}}});
        const auto fa = pooled_frequencies(generate_alt(cfg, s1).model_b);
        const auto t = generate_null(cfg, s2);
        const auto na = pooled_frequencies(t.model_a);
        const auto nb = pooled_frequencies(t.model_b);
        for (std::size_t m = 0; m < 3; ++m) {
            alt_b[m] += fa[m] / 100;
            null_a[m] += na[m] / 100;
            null_b[m] += nb[m] / 100;
        }
    }
    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(std::abs(alt_b[m] - null_a[m]) < 0.02);
        CHECK(std::abs(null_a[m] - null_b[m]) < 0.02);
    }
}

TEST_CASE("A and B are exchangeable under H_null") {
    const auto cfg = make(50, 10, {1.37, 1.33}, {0.5, 0.5}, 0.3);
    const int reps = 600;
    std::vector<double> diffs;
    for (int r = 0; r < reps; ++r) {
        Stream stream = derive_stream(SeedSpec{7, {{"rep", static_cast<std::uint64_t>(r)}}});
        const auto t = generate_null(cfg, stream);
        const auto w = wins(t.model_a, t.model_b, t.gold);
        diffs.push_back((double(w.wins_a) - double(w.wins_b)) / 50.0);
    }
    const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / reps;
    double var = 0.0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    const double se = std::sqrt(var / (reps - 1) / reps);
    CHECK(std::abs(mean) < 3 * se);
}

TEST_CASE("mean L1(gamma, beta) is linear in epsilon") {
    const std::vector<double> eps = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> l1;
    for (double e : eps) {
        const auto cfg = make(1, 1, {5.22, 0.86, 2.75}, {1. / 3, 1. / 3, 1. / 3}, e);
        Stream stream = derive_stream(SeedSpec{8, {{"eps", static_cast<std::uint64_t>(e * 10)}}});
        double sum = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const auto p = generate_item_params(cfg, stream);
            for (std::size_t m = 0; m < 3; ++m) sum += std::abs(p.gamma[m] - p.beta[m]);
        }
        l1.push_back(sum / 10000);
    }
    const double mx = std::accumulate(eps.begin(), eps.end(), 0.0) / eps.size();
    const double my = std::accumulate(l1.begin(), l1.end(), 0.0) / l1.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        sxy += (eps[i] - mx) * (l1[i] - my);
        sxx += (eps[i] - mx) * (eps[i] - mx);
        syy += (l1[i] - my) * (l1[i] - my);
    }
    const double r2 = sxy * sxy / (sxx * syy);
    CHECK(r2 > 0.99);
    CHECK(sxy / sxx > 0.0);
}

TEST_CASE("shared stream gives identical gold under both hypotheses") {
    const auto cfg = make(30, 7, {2, 1, 1}, {1. / 3, 1. / 3, 1. / 3}, 0.3);
    Stream s1 = derive_stream(SeedSpec{9, {}});
    Stream s2 = derive_stream(SeedSpec{9, {}});
    const auto alt = generate_alt(cfg, s1);
    const auto null = generate_null(cfg, s2);
    CHECK(alt.gold == null.gold);
    Stream s3 = derive_stream(SeedSpec{9, {}});
    CHECK(generate_gold(cfg, s3) == alt.gold);
}
