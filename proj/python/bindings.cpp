#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "nkpower/error.hpp"
#include "nkpower/fitting.hpp"
#include "nkpower/inference.hpp"
#include "nkpower/io.hpp"
#include "nkpower/presets.hpp"
#include "nkpower/sweep.hpp"

namespace py = pybind11;
using namespace nkpower;

namespace {

using TableArray = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

MetricKind metric_arg(const std::string& name) {
    auto m = parse_metric(name);
    if (!m) throw InvalidParameter("unknown metric '" + name + "'");
    return *m;
}

ResponseTable table_from(const TableArray& a, std::size_t m) {
    if (a.ndim() != 2) throw ShapeError("response table must be a 2-D array");
    ResponseTable t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)), m);
    auto view = a.unchecked<2>();
    for (std::size_t i = 0; i < t.n_items(); ++i) {
        auto row = t.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const auto v = view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j));
            if (v >= m) throw InvalidInput("category index out of range");
            row[j] = v;
        }
    }
    return t;
}

TableArray table_to(const ResponseTable& t) {
    TableArray out({t.n_items(), t.k_responses()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < t.n_items(); ++i) {
        for (std::size_t j = 0; j < t.k_responses(); ++j) {
            view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = t.at(i, j);
        }
    }
    return out;
}

GenerationConfig make_config(const std::vector<double>& alpha, std::size_t n, std::size_t k, double epsilon,
                             const std::optional<std::vector<double>>& rho) {
    const std::size_t m = alpha.size();
    return GenerationConfig{
        .n_items = n,
        .k_responses = k,
        .n_categories = m,
        .alpha = DirichletParams(alpha),
        .rho = rho ? DirichletParams(*rho) : DirichletParams::uniform(m, 1.0 / static_cast<double>(m)),
        .epsilon = epsilon,
    };
}

ScoreDistribution dist(std::vector<double> scores, Hypothesis h) {
    return ScoreDistribution{std::move(scores), h, MetricKind::Accuracy};
}

py::dict fit_dict(const FitResult& fit, const std::vector<std::string>& labels) {
    py::dict d;
    d["label_names"] = labels;
    d["alpha_hat"] = std::vector<double>(fit.alpha_hat.alpha().begin(), fit.alpha_hat.alpha().end());
    d["theta_pooled"] = std::vector<double>(fit.theta_pooled.probs().begin(), fit.theta_pooled.probs().end());
    d["expected_theta"] = std::vector<double>(fit.expected_theta.probs().begin(), fit.expected_theta.probs().end());
    d["mab"] = fit.mab;
    d["iterations"] = fit.iterations;
    d["converged"] = fit.converged;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Annotation-budget power analysis core";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<RuntimeError>(m, "NkpowerError", PyExc_RuntimeError);

    m.def("presets", [] {
        py::dict d;
        for (const auto& p : dataset_presets()) d[py::str(p.name)] = p.alpha;
        return d;
    });
    m.def("resolve_preset", [](const std::string& name) { return resolve_preset(name); }, py::arg("name"));
    m.def("default_k_schedule", &default_k_schedule);
    m.def("default_nk_budgets", &default_nk_budgets);

    m.def(
        "generate",
        [](const std::vector<double>& alpha, std::size_t n, std::size_t k, double epsilon,
           const std::string& hypothesis, std::uint64_t seed, std::optional<std::vector<double>> rho) {
            if (hypothesis != "alt" && hypothesis != "null") throw InvalidParameter("hypothesis must be alt or null");
            const GenerationConfig config = make_config(alpha, n, k, epsilon, rho);
            Stream stream = derive_stream(SeedSpec{seed, {}});
            const TripleSample t = generate(config, hypothesis == "alt" ? Hypothesis::Alt : Hypothesis::Null, stream);
            return py::make_tuple(table_to(t.gold), table_to(t.model_a), table_to(t.model_b));
        },
        py::arg("alpha"), py::arg("n"), py::arg("k"), py::arg("epsilon"), py::arg("hypothesis") = "alt",
        py::arg("seed") = 0, py::arg("rho") = py::none(),
        "Draw (gold, model_a, model_b) response tables as uint16 arrays of shape (n, k).");

    m.def(
        "accuracy",
        [](const TableArray& x, const TableArray& g, std::size_t m) { return accuracy(table_from(x, m), table_from(g, m)); },
        py::arg("x"), py::arg("gold"), py::arg("n_categories"));
    m.def(
        "total_variation",
        [](const TableArray& x, const TableArray& g, std::size_t m) {
            return total_variation(table_from(x, m), table_from(g, m));
        },
        py::arg("x"), py::arg("gold"), py::arg("n_categories"));
    m.def(
        "kl_divergence",
        [](const TableArray& x, const TableArray& g, std::size_t m, double smoothing) {
            return kl_divergence(table_from(x, m), table_from(g, m), smoothing);
        },
        py::arg("x"), py::arg("gold"), py::arg("n_categories"), py::arg("smoothing") = kDefaultSmoothing);
    m.def(
        "wins",
        [](const TableArray& a, const TableArray& b, const TableArray& g, std::size_t m) {
            const WinCounts w = wins(table_from(a, m), table_from(b, m), table_from(g, m));
            return py::make_tuple(w.wins_a, w.wins_b, w.ties);
        },
        py::arg("a"), py::arg("b"), py::arg("gold"), py::arg("n_categories"));
    m.def(
        "comparison_statistic",
        [](const std::string& metric, const TableArray& a, const TableArray& b, const TableArray& g, std::size_t m,
           double smoothing) {
            return comparison_statistic(metric_arg(metric), table_from(a, m), table_from(b, m), table_from(g, m),
                                        smoothing)
                .value;
        },
        py::arg("metric"), py::arg("a"), py::arg("b"), py::arg("gold"), py::arg("n_categories"),
        py::arg("smoothing") = kDefaultSmoothing);

    m.def(
        "score_distributions",
        [](const std::vector<double>& alpha, std::size_t nk, std::size_t k, double epsilon, const std::string& metric,
           std::size_t replicates, std::uint64_t seed, std::optional<std::vector<double>> rho, double smoothing,
           bool paired, std::size_t threads) {
            if (k == 0 || nk < k) throw InvalidParameter("need 1 <= k <= nk");
            const GenerationConfig config = make_config(alpha, nk / k, k, epsilon, rho);
            ScorePair s;
            {
                py::gil_scoped_release release;
                s = score_distributions(config, metric_arg(metric), ScoreOptions{replicates, smoothing, paired, threads},
                                        cell_seed(seed, nk, k));
            }
            return py::make_tuple(s.alt.scores, s.null.scores);
        },
        py::arg("alpha"), py::arg("nk"), py::arg("k"), py::arg("epsilon"), py::arg("metric"),
        py::arg("replicates") = 1000, py::arg("seed") = 0, py::arg("rho") = py::none(),
        py::arg("smoothing") = kDefaultSmoothing, py::arg("paired") = false, py::arg("threads") = 1,
        "Replicate scores (alt, null) for one (nk, k) cell; seeds match the CLI and sweep.");

    m.def(
        "p_value",
        [](std::vector<double> alt, std::vector<double> null) {
            return p_value(dist(std::move(alt), Hypothesis::Alt), dist(std::move(null), Hypothesis::Null));
        },
        py::arg("alt"), py::arg("null"));
    m.def(
        "p_value_against_mean",
        [](std::vector<double> alt, std::vector<double> null) {
            return p_value_against_mean(dist(std::move(alt), Hypothesis::Alt), dist(std::move(null), Hypothesis::Null));
        },
        py::arg("alt"), py::arg("null"));
    m.def(
        "confidence_interval",
        [](std::vector<double> alt) {
            const auto ci = confidence_interval(dist(std::move(alt), Hypothesis::Alt));
            return py::make_tuple(ci.lower, ci.upper);
        },
        py::arg("alt"));
    m.def(
        "effect_size", [](std::vector<double> alt) { return effect_size(dist(std::move(alt), Hypothesis::Alt)); },
        py::arg("alt"));
    m.def(
        "within_item_variance",
        [](const std::vector<double>& alpha, std::size_t n, std::size_t k, std::size_t replicates, std::uint64_t seed) {
            return within_item_variance(make_config(alpha, n, k, 0.0, std::nullopt), replicates, SeedSpec{seed, {}});
        },
        py::arg("alpha"), py::arg("n"), py::arg("k"), py::arg("replicates") = 100, py::arg("seed") = 0);

    m.def(
        "fit_counts",
        [](const std::vector<std::vector<std::uint32_t>>& counts, std::optional<std::vector<std::string>> labels,
           double tol, std::size_t max_iters) {
            DatasetCounts data;
            data.items = counts;
            const std::size_t m = counts.empty() ? 0 : counts.front().size();
            if (labels) {
                data.label_names = *labels;
            } else {
                for (std::size_t j = 0; j < m; ++j) data.label_names.push_back(std::to_string(j));
            }
            for (const auto& c : counts) {
                for (auto v : c) data.total_responses += v;
            }
            return fit_dict(map_fit(data, FitOptions{tol, max_iters, 0.0}), data.label_names);
        },
        py::arg("counts"), py::arg("labels") = py::none(), py::arg("tol") = 1e-7, py::arg("max_iters") = 2000);
    m.def(
        "fit_csv",
        [](const std::string& path, double tol, std::size_t max_iters) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw RuntimeError("cannot open '" + path + "'");
            const DatasetCounts data = ingest_long_csv(in);
            return fit_dict(map_fit(data, FitOptions{tol, max_iters, 0.0}), data.label_names);
        },
        py::arg("path"), py::arg("tol") = 1e-7, py::arg("max_iters") = 2000);

    m.def(
        "run_sweep",
        [](const std::string& config_json, std::size_t threads, bool keep_going) {
            std::istringstream in(config_json);
            const SweepSpec spec = parse_config(in);
            SweepReport report;
            {
                py::gil_scoped_release release;
                report = run_sweep(spec, threads, keep_going);
            }
            std::ostringstream csv;
            write_results_csv(report, csv);
            return py::make_tuple(csv.str(), summary_json(report, spec.p_threshold).dump());
        },
        py::arg("config_json"), py::arg("threads") = 1, py::arg("keep_going") = false,
        "Run a sweep from a JSON config; returns (results_csv, summary_json).");

    m.def(
        "calibrate_null",
        [](const std::vector<double>& alpha, std::size_t nk, std::size_t k, const std::string& metric,
           std::size_t repeats, std::size_t replicates, std::uint64_t seed, double threshold) {
            if (k == 0 || nk < k) throw InvalidParameter("need 1 <= k <= nk");
            CalibrationResult r;
            {
                py::gil_scoped_release release;
                r = calibrate_null(make_config(alpha, nk / k, k, 0.0, std::nullopt), metric_arg(metric),
                                   ScoreOptions{replicates, kDefaultSmoothing, false, 1}, repeats, threshold, seed, nk);
            }
            py::dict d;
            d["rejection_rate"] = r.rejection_rate;
            d["mean_p_value"] = r.mean_p_value;
            d["replicate_rejection_rate"] = r.replicate_rejection_rate;
            d["p_values"] = r.p_values;
            return d;
        },
        py::arg("alpha"), py::arg("nk"), py::arg("k"), py::arg("metric"), py::arg("repeats") = 100,
        py::arg("replicates") = 1000, py::arg("seed") = 0, py::arg("threshold") = 0.05);
}
