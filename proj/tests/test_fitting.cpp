#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>

#include "doctest.h"
#include "nkpower/error.hpp"
#include "nkpower/fitting.hpp"
#include "nkpower/presets.hpp"

using namespace nkpower;

namespace {

DatasetCounts counts_of(std::vector<std::vector<std::uint32_t>> items) {
    DatasetCounts d;
    d.items = std::move(items);
    for (std::size_t m = 0; m < d.items.front().size(); ++m) d.label_names.push_back("c" + std::to_string(m));
    for (const auto& c : d.items)
        for (auto v : c) d.total_responses += v;
    return d;
}

DatasetCounts simulate(const std::vector<double>& alpha, std::size_t items, std::size_t k, std::uint64_t seed) {
    Stream stream = derive_stream(SeedSpec{seed, {}});
    const DirichletParams params(alpha);
    std::vector<std::vector<std::uint32_t>> out;
    for (std::size_t i = 0; i < items; ++i) {
        const auto beta = sample_dirichlet(params, stream);
        std::vector<std::uint32_t> c(alpha.size(), 0);
        for (std::size_t j = 0; j < k; ++j) ++c[sample_categorical(beta, stream)];
        out.push_back(std::move(c));
    }
    return counts_of(std::move(out));
}

DatasetCounts ingest(const std::string& text) {
    std::istringstream in(text);
    return ingest_long_csv(in);
}

}  // namespace

TEST_CASE("digamma matches boost") {
    for (double x : {1e-8, 1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 5.9, 6.0, 10.0, 123.456, 1e5, 1e10}) {
        const double ref = boost::math::digamma(x);
        CHECK(std::abs(digamma(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-6.0, 4.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = std::pow(10.0, u(rng));
        const double ref = boost::math::digamma(x);
        CHECK(std::abs(digamma(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
    CHECK_THROWS_AS(digamma(0.0), InvalidParameter);
}

TEST_CASE("long-format ingestion") {
    SUBCASE("aggregation and label order") {
        const auto d = ingest("item_id,label\ni1,yes\ni1,no\ni2,yes\n");
        CHECK(d.label_names == std::vector<std::string>{"no", "yes"});
        REQUIRE(d.items.size() == 2);
        CHECK(d.items[0] == std::vector<std::uint32_t>{1, 1});
        CHECK(d.items[1] == std::vector<std::uint32_t>{0, 1});
        CHECK(d.total_responses == 3);
    }
    SUBCASE("rater_id and column order") {
        const auto d = ingest("rater_id,label,item_id\r\nr1,b,z\r\nr2,a,z\r\nr1,\"a\",\"y,1\"\r\n");
        CHECK(d.label_names == std::vector<std::string>{"a", "b"});
        CHECK(d.items[0] == std::vector<std::uint32_t>{1, 1});
        CHECK(d.items[1] == std::vector<std::uint32_t>{1, 0});
    }
    SUBCASE("identical labels per item") {
        std::string text = "item_id,label\n";
        for (const char* item : {"a", "b", "c"})
            for (int r = 0; r < 5; ++r) text += std::string(item) + ",x\n";
        text += "d,y\n";
        const auto d = ingest(text);
        CHECK(d.items[0] == std::vector<std::uint32_t>{5, 0});
        CHECK(d.items[3] == std::vector<std::uint32_t>{0, 1});
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ingest(""), FormatError);
        CHECK_THROWS_AS(ingest("item_id,label\ni1,a\n"), FormatError);
        CHECK_THROWS_AS(ingest("item_id,label\n"), FormatError);
        try {
            ingest("item,label\ni1,a\n");
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 1);
            CHECK(std::string(e.what()).find("item_id") != std::string::npos);
        }
        CHECK_THROWS_AS(ingest("item_id,label\ni1,\"a\n"), FormatError);
    }
}

TEST_CASE("pooled theta and MAB") {
    CHECK(pooled_theta(counts_of({{1, 1}, {1, 0}}))[0] == doctest::Approx(2.0 / 3.0));
    CHECK(pooled_theta(counts_of({{5, 0}, {5, 0}, {5, 0}})).probs()[1] == 0.0);
    CHECK(pooled_theta(counts_of({{2, 2}, {3, 3}}))[0] == 0.5);
    CHECK(mab(CategoryDistribution({0.6, 0.4}), DirichletParams({3, 2})) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mab(CategoryDistribution({1, 0}), DirichletParams({1, 1})) == 0.5);
    CHECK(mab(CategoryDistribution({0.5, 0.3, 0.2}), DirichletParams({5, 3, 2})) < 1e-15);
    CHECK_THROWS_AS(mab(CategoryDistribution({0.5, 0.5}), DirichletParams({1, 1, 1})), ShapeError);
}

TEST_CASE("dataset validation") {
    auto d = counts_of({{1, 1}, {1, 0}});
    d.total_responses = 7;
    CHECK_THROWS_AS(d.validate(), InvalidInput);
    CHECK_THROWS_AS(counts_of({{1, 1}, {1}}).validate(), ShapeError);
    CHECK_THROWS_AS(counts_of({{1, 1}, {0, 0}}).validate(), InvalidInput);
}

TEST_CASE("synthetic recovery") {
    const auto data = simulate({5, 1, 3}, 2000, 5, 32);
    const auto fit = map_fit(data);
    CHECK(fit.converged);
    CHECK(fit.iterations <= 2000);
    const double truth[] = {5.0 / 9, 1.0 / 9, 3.0 / 9};
    for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(fit.expected_theta[m] - truth[m]) <= 0.02);
    CHECK(mab(CategoryDistribution({truth[0], truth[1], truth[2]}), fit.alpha_hat) <= 0.02);
    CHECK(fit.mab <= 0.02);
    // generating concentration is 9; allow generous sampling error
    CHECK(fit.alpha_hat.concentration() > 6.0);
    CHECK(fit.alpha_hat.concentration() < 13.0);

    double manual = 0.0;
    for (std::size_t m = 0; m < 3; ++m) manual += std::abs(fit.theta_pooled[m] - fit.expected_theta[m]);
    CHECK(fit.mab == doctest::Approx(manual / 3).epsilon(1e-12));
    for (std::size_t m = 0; m < 3; ++m)
        CHECK(fit.expected_theta[m] == doctest::Approx(fit.alpha_hat[m] / fit.alpha_hat.concentration()));
}

TEST_CASE("objective never decreases") {
    for (std::uint64_t seed : {33u, 34u, 35u}) {
        const auto fit = map_fit(simulate({0.7, 2.0, 0.4, 1.1}, 500, 7, seed));
        REQUIRE(fit.objective_trace.size() >= 2);
        for (std::size_t t = 1; t < fit.objective_trace.size(); ++t)
            CHECK(fit.objective_trace[t] >= fit.objective_trace[t - 1] - 1e-9);
        CHECK(fit.objective_trace.back() ==
              doctest::Approx(dirichlet_multinomial_loglik(simulate({0.7, 2.0, 0.4, 1.1}, 500, 7, seed), fit.alpha_hat)));
    }
}

TEST_CASE("identical items drive concentration upward") {
    const auto fit = map_fit(counts_of(std::vector<std::vector<std::uint32_t>>(50, {70, 30})));
    CHECK(fit.alpha_hat.concentration() > 100.0);
    CHECK(fit.expected_theta[0] == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("concentration ordering") {
    const auto tight = map_fit(simulate({3, 3}, 2000, 10, 36));
    const auto loose = map_fit(simulate({0.3, 0.3}, 2000, 10, 37));
    CHECK(tight.alpha_hat.concentration() > loose.alpha_hat.concentration());
}

TEST_CASE("item order and relabelling") {
    const auto data = simulate({2, 0.5, 1}, 400, 6, 38);
    const auto base = map_fit(data);

    auto shuffled = data;
    std::mt19937_64 rng(39);
    std::shuffle(shuffled.items.begin(), shuffled.items.end(), rng);
    const auto s = map_fit(shuffled);
    for (std::size_t m = 0; m < 3; ++m) CHECK(s.alpha_hat[m] == doctest::Approx(base.alpha_hat[m]).epsilon(1e-9));

    const std::size_t perm[] = {2, 0, 1};
    auto relabelled = data;
    for (auto& c : relabelled.items) c = {c[perm[0]], c[perm[1]], c[perm[2]]};
    const auto r = map_fit(relabelled);
    for (std::size_t m = 0; m < 3; ++m)
        CHECK(r.alpha_hat[m] == doctest::Approx(base.alpha_hat[perm[m]]).epsilon(1e-6));
}

TEST_CASE("fit errors and options") {
    CHECK_THROWS_AS(map_fit(counts_of({{3, 0}, {2, 0}})), DegenerateCategory);
    try {
        map_fit(counts_of({{3, 0, 1}, {2, 0, 1}}));
    } catch (const DegenerateCategory& e) {
        CHECK(e.category() == 1);
    }
    CHECK_THROWS_AS(map_fit(counts_of({{3, 1}})), InvalidInput);
    FitOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(map_fit(counts_of({{3, 1}, {1, 1}}), bad), InvalidParameter);

    FitOptions capped;
    capped.max_iters = 3;
    const auto c = map_fit(simulate({2, 2}, 100, 5, 40), capped);
    CHECK_FALSE(c.converged);
    CHECK(c.iterations == 3);
}

TEST_CASE("jagged response counts") {
    const auto fit = map_fit(counts_of({{1, 0}, {3, 2}, {0, 7}, {4, 4}, {2, 1}}));
    CHECK(fit.alpha_hat.size() == 2);
    CHECK(std::isfinite(fit.alpha_hat.concentration()));
}

TEST_CASE("exponential prior shrinks concentration") {
    const auto data = counts_of(std::vector<std::vector<std::uint32_t>>(20, {7, 3}));
    FitOptions prior;
    prior.prior_rate = 0.1;
    const auto shrunk = map_fit(data, prior);
    CHECK(shrunk.converged);
    CHECK(shrunk.alpha_hat.concentration() < map_fit(data).alpha_hat.concentration());
}

TEST_CASE("refitting preset data stays within the published bias range") {
    std::uint64_t seed = 41;
    for (const auto& preset : dataset_presets()) {
        CAPTURE(preset.name);
        const auto fit = map_fit(simulate(preset.alpha, 1000, 5, seed++));
        CHECK(fit.mab <= 0.09);
    }
}
