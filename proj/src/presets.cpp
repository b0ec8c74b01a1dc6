#include "nkpower/presets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "nkpower/error.hpp"

namespace nkpower {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::optional<std::size_t> parse_synthetic(std::string_view name, std::string_view prefix) {
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    std::string_view rest = name.substr(prefix.size());
    if (!rest.empty() && (rest.front() == ':' || rest.front() == '-' || rest.front() == '(')) {
        const bool paren = rest.front() == '(';
        rest.remove_prefix(1);
        if (paren) {
            if (rest.empty() || rest.back() != ')') return std::nullopt;
            rest.remove_suffix(1);
        }
    }
    std::size_t m = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), m);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) return std::nullopt;
    return m;
}

}  // namespace

const std::vector<Preset>& dataset_presets() {
    static const std::vector<Preset> presets = {
        {"Toxicity", {1.37, 1.33}},
        {"DICES", {5.22, 0.86, 2.75}},
        {"D3code", {6.08, 2.88}},
        {"JobsQ1", {1039.76, 38.24, 35.57, 310.29, 46.02}},
        {"JobsQ3",
         {133.79, 834.51, 105.27, 3669.04, 206.80, 293.44, 585.58, 1278.56, 1874.82, 1838.49, 1576.10, 989.23}},
    };
    return presets;
}

std::vector<double> balanced_alpha(std::size_t m) {
    if (m < 2) throw InvalidSpec("balanced preset needs M >= 2");
    return std::vector<double>(m, 3.0);
}

std::vector<double> unbalanced_alpha(std::size_t m) {
    if (m < 2) throw InvalidSpec("unbalanced preset needs M >= 2");
    std::vector<double> out(m, 3.0);
    out.front() = 10.0;
    return out;
}

std::vector<double> resolve_preset(std::string_view name) {
    const std::string key = lowercase(name);
    for (const auto& p : dataset_presets()) {
        if (lowercase(p.name) == key) return p.alpha;
    }
    if (auto m = parse_synthetic(key, "balanced")) return balanced_alpha(*m);
    if (auto m = parse_synthetic(key, "unbalanced")) return unbalanced_alpha(*m);
    throw InvalidSpec("unknown preset '" + std::string(name) +
                      "' (expected Toxicity, DICES, D3code, JobsQ1, JobsQ3, balanced:M or unbalanced:M)");
}

}  // namespace nkpower
