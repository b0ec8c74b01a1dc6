#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nkpower/sampling.hpp"

namespace nkpower {

enum class Hypothesis { Alt, Null };

const char* hypothesis_name(Hypothesis h);

struct GenerationConfig {
    std::size_t n_items = 0;
    std::size_t k_responses = 0;
    std::size_t n_categories = 0;
    DirichletParams alpha;
    DirichletParams rho;
    double epsilon = 0.0;

    // Throws InvalidParameter on a length mismatch, epsilon outside [0, 1],
    // N or K of zero, or M outside [2, 65535].
    void validate() const;
};

struct ItemParams {
    CategoryDistribution beta;
    CategoryDistribution varrho;
    CategoryDistribution gamma;
};

// N x K matrix of category indices, row-major.
class ResponseTable {
public:
    using Category = std::uint16_t;

    ResponseTable(std::size_t n_items, std::size_t k_responses, std::size_t n_categories);
    // Rows must be non-empty and rectangular; entries in [0, M).
    ResponseTable(const std::vector<std::vector<int>>& rows, std::size_t n_categories);

    std::size_t n_items() const noexcept { return n_items_; }
    std::size_t k_responses() const noexcept { return k_; }
    std::size_t n_categories() const noexcept { return m_; }

    std::span<const Category> row(std::size_t i) const { return {data_.data() + i * k_, k_}; }
    std::span<Category> row(std::size_t i) { return {data_.data() + i * k_, k_}; }
    Category at(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }

    // Per-item category counts, row-major N x M.
    std::vector<std::uint32_t> counts() const;

    friend bool operator==(const ResponseTable&, const ResponseTable&) = default;

private:
    std::size_t n_items_;
    std::size_t k_;
    std::size_t m_;
    std::vector<Category> data_;
};

struct TripleSample {
    ResponseTable gold;
    ResponseTable model_a;
    ResponseTable model_b;
};

// (1 - epsilon) * beta + epsilon * varrho
CategoryDistribution convex_mix(const CategoryDistribution& beta, const CategoryDistribution& varrho, double epsilon);

ItemParams generate_item_params(const GenerationConfig& config, Stream& stream);

// Item parameters and gold responses are drawn for every item before the
// model tables. generate_alt and generate_null therefore consume a shared
// stream identically up to that point, which is what paired mode relies on.
TripleSample generate_alt(const GenerationConfig& config, Stream& stream);
TripleSample generate_null(const GenerationConfig& config, Stream& stream);
TripleSample generate(const GenerationConfig& config, Hypothesis hypothesis, Stream& stream);

// Gold table only (the first phase of generate_alt).
ResponseTable generate_gold(const GenerationConfig& config, Stream& stream);

}  // namespace nkpower
