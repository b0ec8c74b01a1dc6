#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "nkpower/sampling.hpp"

namespace nkpower {

// Per-item label counts of a disaggregated dataset. Items may have
// different numbers of responses.
struct DatasetCounts {
    std::vector<std::vector<std::uint32_t>> items;
    std::vector<std::string> label_names;
    std::uint64_t total_responses = 0;

    std::size_t n_categories() const { return label_names.size(); }
    // Checks lengths, non-empty items, M >= 2 and the response total.
    void validate() const;
};

struct FitOptions {
    double tol = 1e-7;
    std::size_t max_iters = 2000;
    // Rate of an independent Exponential prior on each alpha_m; 0 is a flat prior (MAP = MLE).
    double prior_rate = 0.0;
};

struct FitResult {
    DirichletParams alpha_hat;
    CategoryDistribution theta_pooled;
    CategoryDistribution expected_theta;
    double mab = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    // Log-posterior (up to a constant) before the first update and after each one.
    std::vector<double> objective_trace;
};

// Long format: header with item_id and label columns (rater_id and any other
// columns are ignored). Labels are indexed in lexicographic order, items in
// order of first appearance.
DatasetCounts ingest_long_csv(std::istream& source);

// Digamma via upward recurrence to x >= 6 and the asymptotic series.
double digamma(double x);

// Dirichlet-multinomial log-likelihood sum_i log DirMult(c_i | alpha), without
// the multinomial coefficients (which do not depend on alpha).
double dirichlet_multinomial_loglik(const DatasetCounts& data, const DirichletParams& alpha);

FitResult map_fit(const DatasetCounts& data, const FitOptions& options = {});

double mab(const CategoryDistribution& theta, const DirichletParams& alpha_hat);
CategoryDistribution pooled_theta(const DatasetCounts& data);

}  // namespace nkpower
