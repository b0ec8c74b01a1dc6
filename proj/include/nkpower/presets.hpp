#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nkpower {

struct Preset {
    std::string name;
    std::vector<double> alpha;
};

// Dataset-fitted concentration vectors shipped with the toolkit.
const std::vector<Preset>& dataset_presets();

// [3] * M
std::vector<double> balanced_alpha(std::size_t m);
// [10, 3, ..., 3], M entries
std::vector<double> unbalanced_alpha(std::size_t m);

// Case-insensitive lookup of a dataset preset, or "balanced:M" /
// "unbalanced:M" (also "balanced-M", "balanced(M)"). Throws InvalidSpec on
// an unknown name.
std::vector<double> resolve_preset(std::string_view name);

}  // namespace nkpower
