#include "nkpower/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nkpower/error.hpp"

namespace nkpower {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr double kMinCoordinate = 1e-12;

}  // namespace

CategoryDistribution::CategoryDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.size() < 2) {
        throw InvalidParameter("category distribution needs at least 2 categories");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InvalidParameter("category probabilities must be finite and non-negative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw InvalidParameter("category probabilities must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.size() < 2) {
        throw InvalidParameter("Dirichlet parameters need at least 2 categories");
    }
    for (double a : alpha_) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw InvalidParameter("non-positive concentration in Dirichlet parameters");
        }
    }
}

DirichletParams DirichletParams::uniform(std::size_t m, double value) {
    return DirichletParams(std::vector<double>(m, value));
}

double DirichletParams::concentration() const noexcept {
    return std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

std::vector<double> DirichletParams::mean() const {
    const double total = concentration();
    std::vector<double> out(alpha_.size());
    std::transform(alpha_.begin(), alpha_.end(), out.begin(), [total](double a) { return a / total; });
    return out;
}

SeedSpec SeedSpec::child(std::string label, std::uint64_t index) const {
    SeedSpec out = *this;
    out.path.emplace_back(std::move(label), index);
    return out;
}

Stream derive_stream(const SeedSpec& spec) {
    std::uint64_t h = splitmix64(spec.master_seed);
    for (const auto& [label, index] : spec.path) {
        h = splitmix64(h ^ fnv1a(label));
        h = splitmix64(h ^ index);
    }
    // 256 bits of seed material for the seed_seq.
    std::uint32_t words[8];
    std::uint64_t s = h;
    for (int i = 0; i < 8; i += 2) {
        s = splitmix64(s);
        words[i] = static_cast<std::uint32_t>(s);
        words[i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(std::begin(words), std::end(words));
    return Stream(seq);
}

double sample_log_gamma(double shape, Stream& stream) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw InvalidParameter("gamma shape must be positive");
    }
    if (shape < 1.0) {
        // U in (0, 1]
        const double u = 1.0 - stream.uniform();
        return sample_log_gamma(shape + 1.0, stream) + std::log(u) / shape;
    }
    // Marsaglia & Tsang
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = stream.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - stream.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return std::log(d) + std::log(v);
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return std::log(d) + std::log(v);
        }
    }
}

CategoryDistribution sample_dirichlet(const DirichletParams& params, Stream& stream) {
    const std::size_t m = params.size();
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = sample_log_gamma(params[i], stream);
    }
    const double top = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        sum += v;
    }
    bool clamped = false;
    for (double& v : out) {
        v /= sum;
        if (v < kMinCoordinate) {
            v = kMinCoordinate;
            clamped = true;
        }
    }
    if (clamped) {
        sum = std::accumulate(out.begin(), out.end(), 0.0);
        for (double& v : out) v /= sum;
    }
    return CategoryDistribution(std::move(out));
}

std::size_t sample_categorical(std::span<const double> probs, Stream& stream) {
    const double u = stream.uniform();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t m = 0; m < probs.size(); ++m) {
        if (probs[m] <= 0.0) continue;
        last_positive = m;
        cumulative += probs[m];
        if (u < cumulative) return m;
    }
    // Rounding left u above the final cumulative sum.
    return last_positive;
}

std::size_t sample_categorical(const CategoryDistribution& dist, Stream& stream) {
    return sample_categorical(dist.probs(), stream);
}

}  // namespace nkpower
