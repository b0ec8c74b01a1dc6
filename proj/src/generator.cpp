#include "nkpower/generator.hpp"

#include <limits>
#include <string>

#include "nkpower/error.hpp"

namespace nkpower {

const char* hypothesis_name(Hypothesis h) {
    return h == Hypothesis::Alt ? "alt" : "null";
}

void GenerationConfig::validate() const {
    if (n_items == 0) throw InvalidParameter("n_items must be positive");
    if (k_responses == 0) throw InvalidParameter("k_responses must be positive");
    if (n_categories < 2 || n_categories > std::numeric_limits<ResponseTable::Category>::max()) {
        throw InvalidParameter("n_categories must be in [2, 65535]");
    }
    if (alpha.size() != n_categories || rho.size() != n_categories) {
        throw InvalidParameter("alpha and rho must have n_categories entries");
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw InvalidParameter("epsilon must lie in [0, 1]");
    }
}

ResponseTable::ResponseTable(std::size_t n_items, std::size_t k_responses, std::size_t n_categories)
    : n_items_(n_items), k_(k_responses), m_(n_categories), data_(n_items * k_responses, 0) {
    if (m_ < 2 || m_ > std::numeric_limits<Category>::max()) {
        throw InvalidParameter("n_categories must be in [2, 65535]");
    }
}

ResponseTable::ResponseTable(const std::vector<std::vector<int>>& rows, std::size_t n_categories)
    : ResponseTable(rows.size(), rows.empty() ? 0 : rows.front().size(), n_categories) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != k_ || k_ == 0) {
            throw ShapeError("response table rows must be non-empty and rectangular");
        }
        for (std::size_t j = 0; j < k_; ++j) {
            const int v = rows[i][j];
            if (v < 0 || static_cast<std::size_t>(v) >= m_) {
                throw InvalidInput("category index " + std::to_string(v) + " out of range");
            }
            data_[i * k_ + j] = static_cast<Category>(v);
        }
    }
}

std::vector<std::uint32_t> ResponseTable::counts() const {
    std::vector<std::uint32_t> out(n_items_ * m_, 0);
    for (std::size_t i = 0; i < n_items_; ++i) {
        auto* c = out.data() + i * m_;
        for (Category v : row(i)) ++c[v];
    }
    return out;
}

CategoryDistribution convex_mix(const CategoryDistribution& beta, const CategoryDistribution& varrho, double epsilon) {
    if (beta.size() != varrho.size()) throw ShapeError("beta and varrho lengths differ");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidParameter("epsilon must lie in [0, 1]");
    std::vector<double> gamma(beta.size());
    for (std::size_t m = 0; m < gamma.size(); ++m) {
        gamma[m] = (1.0 - epsilon) * beta[m] + epsilon * varrho[m];
    }
    return CategoryDistribution(std::move(gamma));
}

ItemParams generate_item_params(const GenerationConfig& config, Stream& stream) {
    CategoryDistribution beta = sample_dirichlet(config.alpha, stream);
    CategoryDistribution varrho = sample_dirichlet(config.rho, stream);
    CategoryDistribution gamma = convex_mix(beta, varrho, config.epsilon);
    return ItemParams{std::move(beta), std::move(varrho), std::move(gamma)};
}

namespace {

struct GoldPhase {
    std::vector<ItemParams> params;
    ResponseTable gold;
};

GoldPhase draw_params_and_gold(const GenerationConfig& config, Stream& stream) {
    config.validate();
    GoldPhase out{{}, ResponseTable(config.n_items, config.k_responses, config.n_categories)};
    out.params.reserve(config.n_items);
    for (std::size_t i = 0; i < config.n_items; ++i) {
        out.params.push_back(generate_item_params(config, stream));
        const auto beta = out.params.back().beta.probs();
        for (auto& v : out.gold.row(i)) {
            v = static_cast<ResponseTable::Category>(sample_categorical(beta, stream));
        }
    }
    return out;
}

}  // namespace

ResponseTable generate_gold(const GenerationConfig& config, Stream& stream) {
    return draw_params_and_gold(config, stream).gold;
}

TripleSample generate_alt(const GenerationConfig& config, Stream& stream) {
    GoldPhase phase = draw_params_and_gold(config, stream);
    ResponseTable a(config.n_items, config.k_responses, config.n_categories);
    ResponseTable b(config.n_items, config.k_responses, config.n_categories);
    for (std::size_t i = 0; i < config.n_items; ++i) {
        const auto beta = phase.params[i].beta.probs();
        for (auto& v : a.row(i)) {
            v = static_cast<ResponseTable::Category>(sample_categorical(beta, stream));
        }
    }
    for (std::size_t i = 0; i < config.n_items; ++i) {
        const auto gamma = phase.params[i].gamma.probs();
        for (auto& v : b.row(i)) {
            v = static_cast<ResponseTable::Category>(sample_categorical(gamma, stream));
        }
    }
    return TripleSample{std::move(phase.gold), std::move(a), std::move(b)};
}

TripleSample generate_null(const GenerationConfig& config, Stream& stream) {
    GoldPhase phase = draw_params_and_gold(config, stream);
    ResponseTable a(config.n_items, config.k_responses, config.n_categories);
    ResponseTable b(config.n_items, config.k_responses, config.n_categories);
    // A: x = 0 -> beta, x = 1 -> gamma. B: x = 0 -> gamma, x = 1 -> beta.
    for (std::size_t i = 0; i < config.n_items; ++i) {
        const auto beta = phase.params[i].beta.probs();
        const auto gamma = phase.params[i].gamma.probs();
        for (auto& v : a.row(i)) {
            const bool x = stream.coin();
            v = static_cast<ResponseTable::Category>(sample_categorical(x ? gamma : beta, stream));
        }
    }
    for (std::size_t i = 0; i < config.n_items; ++i) {
        const auto beta = phase.params[i].beta.probs();
        const auto gamma = phase.params[i].gamma.probs();
        for (auto& v : b.row(i)) {
            const bool x = stream.coin();
            v = static_cast<ResponseTable::Category>(sample_categorical(x ? beta : gamma, stream));
        }
    }
    return TripleSample{std::move(phase.gold), std::move(a), std::move(b)};
}

TripleSample generate(const GenerationConfig& config, Hypothesis hypothesis, Stream& stream) {
    return hypothesis == Hypothesis::Alt ? generate_alt(config, stream) : generate_null(config, stream);
}

}  // namespace nkpower
