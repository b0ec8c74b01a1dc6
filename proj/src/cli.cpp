#include "nkpower/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "nkpower/error.hpp"
#include "nkpower/fitting.hpp"
#include "nkpower/io.hpp"
#include "nkpower/presets.hpp"
#include "nkpower/sweep.hpp"

namespace nkpower {

namespace {

struct ModelArgs {
    std::string preset;
    std::vector<double> alpha;
    std::size_t nk = 0;
    std::size_t k = 0;
    std::string metric;
    std::size_t replicates = 1000;
    std::uint64_t seed = 0;
    double lambda = kDefaultSmoothing;
    std::size_t threads = 1;
};

void add_model_options(CLI::App* cmd, ModelArgs& a) {
    auto* preset = cmd->add_option("--preset", a.preset, "Toxicity | DICES | D3code | JobsQ1 | JobsQ3 | balanced:M | unbalanced:M");
    auto* alpha = cmd->add_option("--alpha", a.alpha, "Dirichlet concentration, comma separated")->delimiter(',');
    preset->excludes(alpha);
    alpha->excludes(preset);
    cmd->add_option("--nk", a.nk, "annotation budget N x K")->required();
    cmd->add_option("--k", a.k, "responses per item")->required();
    cmd->add_option("--metric", a.metric, "accuracy | tv | wins | kl")->required();
    cmd->add_option("--replicates", a.replicates, "replicates per hypothesis");
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("--lambda", a.lambda, "KL smoothing");
    cmd->add_option("--threads", a.threads, "worker threads");
}

MetricKind require_metric(const std::string& name) {
    auto m = parse_metric(name);
    if (!m) throw UsageError("unknown metric '" + name + "' (expected accuracy, tv, wins or kl)");
    return *m;
}

GenerationConfig model_config(const ModelArgs& a, double epsilon) {
    if (a.preset.empty() && a.alpha.empty()) throw UsageError("one of --preset or --alpha is required");
    std::vector<double> alpha = a.preset.empty() ? a.alpha : resolve_preset(a.preset);
    if (a.k == 0) throw UsageError("--k must be positive");
    const std::size_t n = a.nk / a.k;
    if (n == 0) throw UsageError("--nk must be at least --k");
    const std::size_t m = alpha.size();
    return GenerationConfig{
        .n_items = n,
        .k_responses = a.k,
        .n_categories = m,
        .alpha = DirichletParams(std::move(alpha)),
        .rho = DirichletParams::uniform(m, 1.0 / static_cast<double>(m)),
        .epsilon = epsilon,
    };
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write '" + path + "'");
    return out;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Annotation-budget power analysis: items (N) versus responses per item (K)", "nkpower"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a Dirichlet prior to a long-format label CSV");
    std::string fit_input, fit_output;
    FitOptions fit_options;
    fit->add_option("--input", fit_input, "CSV with item_id,label[,rater_id]")->required();
    fit->add_option("--output", fit_output, "fit result document")->required();
    fit->add_option("--tol", fit_options.tol, "max relative parameter change");
    fit->add_option("--max-iters", fit_options.max_iters, "iteration cap");
    fit->add_option("--prior-rate", fit_options.prior_rate, "exponential prior rate on alpha (0 = flat)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run one grid cell and print its test result");
    ModelArgs sim;
    double sim_epsilon = 0.0;
    std::string emit_scores, emit_null_scores, p_mode = "all_pairs";
    bool paired = false;
    add_model_options(simulate, sim);
    simulate->add_option("--epsilon", sim_epsilon, "perturbation level of model B")->required();
    simulate->add_option("--emit-scores", emit_scores, "write alt-hypothesis scores, one per line");
    simulate->add_option("--emit-null-scores", emit_null_scores, "write null-hypothesis scores, one per line");
    simulate->add_option("--p-mode", p_mode, "all_pairs | against_mean");
    simulate->add_flag("--paired", paired, "share item parameters and gold between hypotheses");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run an experiment grid from a config file");
    std::string sweep_config, sweep_output;
    std::optional<std::uint64_t> sweep_seed;
    std::size_t sweep_threads = 1;
    bool keep_going = false;
    sweep->add_option("--config", sweep_config, "JSON config")->required();
    sweep->add_option("--output", sweep_output, "results CSV")->required();
    sweep->add_option("--seed", sweep_seed, "override master_seed");
    sweep->add_option("--threads", sweep_threads, "worker threads");
    sweep->add_flag("--keep-going", keep_going, "record per-cell errors instead of stopping");

    // report
    auto* report = app.add_subcommand("report", "summarize a results CSV");
    std::string report_input;
    double p_threshold = 0.05;
    report->add_option("--input", report_input, "results CSV")->required();
    report->add_option("--p-threshold", p_threshold, "significance threshold");

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "rejection rate with epsilon = 0");
    ModelArgs cal;
    std::size_t repeats = 100;
    double cal_threshold = 0.05;
    add_model_options(calibrate, cal);
    calibrate->add_option("--repeats", repeats, "independent repetitions");
    calibrate->add_option("--threshold", cal_threshold, "rejection threshold");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (fit->parsed()) {
            auto in = open_input(fit_input);
            const DatasetCounts data = ingest_long_csv(in);
            const FitResult result = map_fit(data, fit_options);
            auto dest = open_output(fit_output);
            dest << format_fit_result(result, data.label_names);
            if (!dest) throw RuntimeError("failed writing '" + fit_output + "'");
            out << "MAB: " << format_double(result.mab) << (result.converged ? "" : " (not converged)") << '\n';
        } else if (simulate->parsed()) {
            const MetricKind metric = require_metric(sim.metric);
            if (p_mode != "all_pairs" && p_mode != "against_mean") throw UsageError("--p-mode must be all_pairs or against_mean");
            const GenerationConfig config = model_config(sim, sim_epsilon);
            const ScoreOptions options{sim.replicates, sim.lambda, paired, sim.threads};
            const ScorePair scores = score_distributions(config, metric, options, cell_seed(sim.seed, sim.nk, sim.k));
            const TestResult result = summarize(scores, config, sim.nk, sim.seed,
                                                p_mode == "all_pairs" ? PValueMode::AllPairs : PValueMode::AgainstMean);
            if (!emit_scores.empty()) {
                auto dest = open_output(emit_scores);
                write_scores(export_score_histogram(scores.alt), dest);
            }
            if (!emit_null_scores.empty()) {
                auto dest = open_output(emit_null_scores);
                write_scores(export_score_histogram(scores.null), dest);
            }
            out << test_result_json(result).dump(2) << '\n';
        } else if (sweep->parsed()) {
            std::ifstream in(sweep_config, std::ios::binary);
            if (!in) throw UsageError("cannot open config '" + sweep_config + "'");
            SweepSpec spec = parse_config(in);
            if (sweep_seed) spec.master_seed = *sweep_seed;
            if (sweep_threads == 0) throw UsageError("--threads must be >= 1");
            const SweepReport result = run_sweep(spec, sweep_threads, keep_going);
            {
                auto dest = open_output(sweep_output);
                write_results_csv(result, dest);
            }
            const auto summary_path = std::filesystem::path(sweep_output).replace_extension(".summary.json");
            auto dest = open_output(summary_path.string());
            dest << summary_json(result, spec.p_threshold).dump(2) << '\n';
            out << "wrote " << result.rows.size() << " rows to " << sweep_output << " and summary to "
                << summary_path.string() << '\n';
        } else if (report->parsed()) {
            auto in = open_input(report_input);
            const SweepReport result = read_results_csv(in);
            out << summary_json(result, p_threshold).dump(2) << '\n';
        } else if (calibrate->parsed()) {
            const MetricKind metric = require_metric(cal.metric);
            const GenerationConfig config = model_config(cal, 0.0);
            const ScoreOptions options{cal.replicates, cal.lambda, false, cal.threads};
            const CalibrationResult r = calibrate_null(config, metric, options, repeats, cal_threshold, cal.seed, cal.nk);
            const nlohmann::json doc{
                {"metric", std::string(metric_name(metric))},
                {"nk", cal.nk},
                {"k", cal.k},
                {"repeats", repeats},
                {"replicates", cal.replicates},
                {"threshold", r.threshold},
                {"rejection_rate", r.rejection_rate},
                {"mean_p_value", r.mean_p_value},
                {"replicate_rejection_rate", r.replicate_rejection_rate},
                {"p_values", r.p_values},
            };
            out << doc.dump(2) << '\n';
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace nkpower
