#include "nkpower/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "nkpower/csv.hpp"
#include "nkpower/error.hpp"

namespace nkpower {

namespace {

// hist[c] = number of items whose count equals c, for c >= 1.
using CountHistogram = std::vector<std::uint64_t>;

CountHistogram histogram(const std::vector<std::uint64_t>& values) {
    const std::uint64_t top = values.empty() ? 0 : *std::max_element(values.begin(), values.end());
    CountHistogram h(top + 1, 0);
    for (auto v : values) ++h[v];
    return h;
}

// sum_i [psi(c_i + a) - psi(a)] using the histogram of c_i.
double digamma_sum(const CountHistogram& h, double a) {
    const double base = digamma(a);
    double s = 0.0;
    for (std::size_t c = 1; c < h.size(); ++c) {
        if (h[c] == 0) continue;
        s += static_cast<double>(h[c]) * (digamma(static_cast<double>(c) + a) - base);
    }
    return s;
}

double lgamma_sum(const CountHistogram& h, double a) {
    const double base = std::lgamma(a);
    double s = 0.0;
    for (std::size_t c = 1; c < h.size(); ++c) {
        if (h[c] == 0) continue;
        s += static_cast<double>(h[c]) * (std::lgamma(static_cast<double>(c) + a) - base);
    }
    return s;
}

struct Histograms {
    std::vector<CountHistogram> per_category;
    CountHistogram totals;
};

Histograms build_histograms(const DatasetCounts& data) {
    const std::size_t m = data.n_categories();
    Histograms out;
    std::vector<std::uint64_t> values(data.items.size());
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < data.items.size(); ++i) values[i] = data.items[i][j];
        out.per_category.push_back(histogram(values));
    }
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        values[i] = std::accumulate(data.items[i].begin(), data.items[i].end(), std::uint64_t{0});
    }
    out.totals = histogram(values);
    return out;
}

double loglik(const Histograms& h, std::span<const double> alpha) {
    const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    double ll = -lgamma_sum(h.totals, a0);
    for (std::size_t j = 0; j < alpha.size(); ++j) ll += lgamma_sum(h.per_category[j], alpha[j]);
    return ll;
}

}  // namespace

void DatasetCounts::validate() const {
    const std::size_t m = n_categories();
    if (m < 2) throw FormatError("dataset needs at least 2 distinct labels");
    std::uint64_t total = 0;
    for (const auto& c : items) {
        if (c.size() != m) throw ShapeError("item count vector length differs from the number of labels");
        const auto s = std::accumulate(c.begin(), c.end(), std::uint64_t{0});
        if (s == 0) throw InvalidInput("item with no responses");
        total += s;
    }
    if (total != total_responses) throw InvalidInput("total_responses does not match the item counts");
}

DatasetCounts ingest_long_csv(std::istream& source) {
    CsvReader reader(source);
    auto header = reader.next();
    if (!header || (header->size() == 1 && header->front().empty())) {
        throw FormatError("empty input: expected a header with item_id and label", 1);
    }
    std::ptrdiff_t item_col = -1;
    std::ptrdiff_t label_col = -1;
    for (std::size_t c = 0; c < header->size(); ++c) {
        if ((*header)[c] == "item_id") item_col = static_cast<std::ptrdiff_t>(c);
        if ((*header)[c] == "label") label_col = static_cast<std::ptrdiff_t>(c);
    }
    if (item_col < 0) throw FormatError("missing required column item_id", reader.line());
    if (label_col < 0) throw FormatError("missing required column label", reader.line());
    const auto needed = static_cast<std::size_t>(std::max(item_col, label_col));

    std::vector<std::string> item_order;
    std::unordered_map<std::string, std::size_t> item_index;
    std::vector<std::pair<std::size_t, std::string>> rows;
    std::map<std::string, std::size_t> labels;
    while (auto record = reader.next()) {
        if (record->size() == 1 && record->front().empty()) continue;  // blank line
        if (record->size() <= needed) throw FormatError("row has too few columns", reader.line());
        const std::string& item = (*record)[static_cast<std::size_t>(item_col)];
        const std::string& label = (*record)[static_cast<std::size_t>(label_col)];
        auto [it, inserted] = item_index.try_emplace(item, item_order.size());
        if (inserted) item_order.push_back(item);
        labels.try_emplace(label, 0);
        rows.emplace_back(it->second, label);
    }
    if (rows.empty()) throw FormatError("no data rows", reader.line() + 1);

    DatasetCounts out;
    for (auto& [name, index] : labels) {
        index = out.label_names.size();
        out.label_names.push_back(name);
    }
    if (out.label_names.size() < 2) {
        throw FormatError("dataset has a single distinct label; at least 2 are required");
    }
    out.items.assign(item_order.size(), std::vector<std::uint32_t>(out.label_names.size(), 0));
    for (const auto& [item, label] : rows) ++out.items[item][labels.at(label)];
    out.total_responses = rows.size();
    return out;
}

double digamma(double x) {
    if (!(x > 0.0)) throw InvalidParameter("digamma is only implemented for x > 0");
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double f = 1.0 / (x * x);
    // Bernoulli-number series: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760, 1/12
    const double series =
        f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132 - f * (691.0 / 32760 - f / 12))))));
    return result + std::log(x) - 0.5 / x - series;
}

double dirichlet_multinomial_loglik(const DatasetCounts& data, const DirichletParams& alpha) {
    if (alpha.size() != data.n_categories()) throw ShapeError("alpha length differs from the number of labels");
    return loglik(build_histograms(data), alpha.alpha());
}

CategoryDistribution pooled_theta(const DatasetCounts& data) {
    if (data.total_responses == 0) throw InvalidInput("dataset has no responses");
    std::vector<double> theta(data.n_categories(), 0.0);
    for (const auto& c : data.items) {
        for (std::size_t j = 0; j < c.size(); ++j) theta[j] += c[j];
    }
    for (double& t : theta) t /= static_cast<double>(data.total_responses);
    return CategoryDistribution(std::move(theta));
}

double mab(const CategoryDistribution& theta, const DirichletParams& alpha_hat) {
    if (theta.size() != alpha_hat.size()) throw ShapeError("theta and alpha lengths differ");
    const auto expected = alpha_hat.mean();
    double s = 0.0;
    for (std::size_t m = 0; m < expected.size(); ++m) s += std::abs(theta[m] - expected[m]);
    return s / static_cast<double>(expected.size());
}

FitResult map_fit(const DatasetCounts& data, const FitOptions& options) {
    data.validate();
    if (data.items.size() < 2) throw InvalidInput("fitting needs at least 2 items");
    if (!(options.tol > 0.0)) throw InvalidParameter("tol must be positive");
    if (!(options.prior_rate >= 0.0)) throw InvalidParameter("prior_rate must be >= 0");

    const std::size_t m = data.n_categories();
    CategoryDistribution theta = pooled_theta(data);
    for (std::size_t j = 0; j < m; ++j) {
        if (theta[j] == 0.0) {
            throw DegenerateCategory("category '" + data.label_names[j] +
                                         "' never occurs; drop it before fitting",
                                     j);
        }
    }

    const Histograms h = build_histograms(data);
    std::vector<double> alpha(m);
    for (std::size_t j = 0; j < m; ++j) alpha[j] = 10.0 * theta[j];
    if (std::any_of(alpha.begin(), alpha.end(), [](double a) { return !(a > 0.0); })) {
        std::fill(alpha.begin(), alpha.end(), 1.0);
    }

    auto objective = [&](std::span<const double> a) {
        return loglik(h, a) - options.prior_rate * std::accumulate(a.begin(), a.end(), 0.0);
    };

    FitResult out{DirichletParams(alpha), theta, theta, 0.0, 0, false, {}};
    out.objective_trace.push_back(objective(alpha));
    std::vector<double> next(m);
    while (out.iterations < options.max_iters) {
        const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
        const double denom = digamma_sum(h.totals, a0) + options.prior_rate;
        double max_rel = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            next[j] = alpha[j] * digamma_sum(h.per_category[j], alpha[j]) / denom;
            if (!(next[j] > 0.0) || !std::isfinite(next[j])) {
                throw RuntimeError("fixed-point update left the positive orthant");
            }
            max_rel = std::max(max_rel, std::abs(next[j] - alpha[j]) / alpha[j]);
        }
        alpha.swap(next);
        ++out.iterations;
        out.objective_trace.push_back(objective(alpha));
        if (max_rel < options.tol) {
            out.converged = true;
            break;
        }
    }

    out.alpha_hat = DirichletParams(alpha);
    out.expected_theta = CategoryDistribution(out.alpha_hat.mean());
    out.mab = mab(theta, out.alpha_hat);
    return out;
}

}  // namespace nkpower
