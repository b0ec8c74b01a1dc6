#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nkpower {

// A probability vector over M >= 2 categories.
class CategoryDistribution {
public:
    static constexpr double kSumTolerance = 1e-9;

    // Throws InvalidParameter if the invariants (M >= 2, non-negative, sums to 1) do not hold.
    explicit CategoryDistribution(std::vector<double> probs);

    std::span<const double> probs() const noexcept { return probs_; }
    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t m) const { return probs_[m]; }

    friend bool operator==(const CategoryDistribution&, const CategoryDistribution&) = default;

private:
    std::vector<double> probs_;
};

// Dirichlet concentration vector, every entry strictly positive.
class DirichletParams {
public:
    explicit DirichletParams(std::vector<double> alpha);

    static DirichletParams uniform(std::size_t m, double value);

    std::span<const double> alpha() const noexcept { return alpha_; }
    std::size_t size() const noexcept { return alpha_.size(); }
    double operator[](std::size_t m) const { return alpha_[m]; }
    double concentration() const noexcept;
    // alpha / sum(alpha)
    std::vector<double> mean() const;

    friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

private:
    std::vector<double> alpha_;
};

// Identifies a substream: the master seed plus a labelled path such as
// (cell, 3) / (hyp, 0) / (rep, 17).
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::vector<std::pair<std::string, std::uint64_t>> path;

    SeedSpec child(std::string label, std::uint64_t index) const;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// A single-owner random stream. Backed by mt19937_64 (19937-bit state),
// seeded from a hash of the SeedSpec so any stream can be rebuilt
// independently of how many others were created before it.
class Stream {
public:
    explicit Stream(std::seed_seq& seq) : engine_(seq) {}

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal() { return normal_(engine_); }
    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

Stream derive_stream(const SeedSpec& spec);

// log of a Gamma(shape, 1) draw. Works in log space so tiny shapes do not
// underflow: for shape < 1 uses G(shape) = G(shape + 1) * U^(1/shape).
double sample_log_gamma(double shape, Stream& stream);

CategoryDistribution sample_dirichlet(const DirichletParams& params, Stream& stream);

std::size_t sample_categorical(const CategoryDistribution& dist, Stream& stream);

// Unchecked inverse-CDF draw on a probability vector; used by the generator
// hot loop after the distribution has been validated once.
std::size_t sample_categorical(std::span<const double> probs, Stream& stream);

}  // namespace nkpower
