#include "nkpower/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "nkpower/csv.hpp"
#include "nkpower/error.hpp"
#include "nkpower/presets.hpp"

namespace nkpower {

using nlohmann::json;

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string format_double17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

const std::set<std::string>& config_fields() {
    static const std::set<std::string> fields = {
        "preset", "alpha", "rho", "nk_budgets", "k_schedule", "epsilons", "metrics", "replicates",
        "smoothing", "master_seed", "min_items", "p_threshold", "paired", "p_mode"};
    return fields;
}

[[noreturn]] void type_error(const std::string& path, const char* expected) {
    throw InvalidSpec(path + ": expected " + expected);
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) type_error(path, "a number");
    return v.get<double>();
}

std::uint64_t get_unsigned(const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) type_error(path, "a non-negative integer");
    return v.get<std::uint64_t>();
}

template <typename T, typename Get>
std::vector<T> get_list(const json& v, const std::string& path, Get get) {
    if (!v.is_array()) type_error(path, "an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get(v[i], path + "/" + std::to_string(i)));
    return out;
}

std::string cell_text(const std::optional<TestResult>& r, double TestResult::*field) {
    return r ? format_double((*r).*field) : std::string();
}

double parse_double_field(const std::string& s, std::size_t line, const char* column) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError(std::string("bad number in column ") + column, line);
    }
    return v;
}

std::uint64_t parse_unsigned_field(const std::string& s, std::size_t line, const char* column) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError(std::string("bad integer in column ") + column, line);
    }
    return v;
}

}  // namespace

SweepSpec parse_config(const json& doc) {
    if (!doc.is_object()) throw InvalidSpec("config must be a single object");
    for (const auto& [key, value] : doc.items()) {
        if (!config_fields().contains(key)) throw InvalidSpec("unknown field '" + key + "'");
    }
    SweepSpec spec;
    if (doc.contains("preset")) {
        if (!doc["preset"].is_string()) type_error("/preset", "a string");
        spec.preset = doc["preset"].get<std::string>();
        spec.alpha = resolve_preset(*spec.preset);
    }
    if (doc.contains("alpha")) {
        if (spec.preset) throw InvalidSpec("give either preset or alpha, not both");
        spec.alpha = get_list<double>(doc["alpha"], "/alpha", get_number);
        if (spec.alpha.size() < 2) throw InvalidSpec("/alpha: needs at least 2 entries");
        for (double a : spec.alpha) {
            if (!(a > 0.0)) throw InvalidSpec("/alpha: non-positive concentration");
        }
    }
    if (!spec.preset && spec.alpha.empty()) throw InvalidSpec("config needs alpha or preset");
    if (doc.contains("rho")) {
        const json& rho = doc["rho"];
        if (rho.is_string()) {
            if (rho.get<std::string>() != "uniform") type_error("/rho", "\"uniform\" or an array");
        } else {
            spec.rho = get_list<double>(rho, "/rho", get_number);
        }
    }
    auto get_size = [](const json& v, const std::string& path) { return static_cast<std::size_t>(get_unsigned(v, path)); };
    if (doc.contains("nk_budgets")) spec.nk_budgets = get_list<std::size_t>(doc["nk_budgets"], "/nk_budgets", get_size);
    if (doc.contains("k_schedule")) spec.k_schedule = get_list<std::size_t>(doc["k_schedule"], "/k_schedule", get_size);
    if (doc.contains("epsilons")) spec.epsilons = get_list<double>(doc["epsilons"], "/epsilons", get_number);
    if (doc.contains("metrics")) {
        spec.metrics = get_list<MetricKind>(doc["metrics"], "/metrics", [](const json& v, const std::string& path) {
            if (!v.is_string()) type_error(path, "a metric name");
            auto m = parse_metric(v.get<std::string>());
            if (!m) throw InvalidSpec(path + ": unknown metric '" + v.get<std::string>() + "'");
            return *m;
        });
    }
    if (doc.contains("replicates")) spec.replicates = get_size(doc["replicates"], "/replicates");
    if (doc.contains("smoothing")) spec.smoothing = get_number(doc["smoothing"], "/smoothing");
    if (doc.contains("master_seed")) spec.master_seed = get_unsigned(doc["master_seed"], "/master_seed");
    if (doc.contains("min_items")) spec.min_items = get_size(doc["min_items"], "/min_items");
    if (doc.contains("p_threshold")) spec.p_threshold = get_number(doc["p_threshold"], "/p_threshold");
    if (doc.contains("paired")) {
        if (!doc["paired"].is_boolean()) type_error("/paired", "a boolean");
        spec.paired = doc["paired"].get<bool>();
    }
    if (doc.contains("p_mode")) {
        const json& mode = doc["p_mode"];
        if (mode == "all_pairs") {
            spec.p_mode = PValueMode::AllPairs;
        } else if (mode == "against_mean") {
            spec.p_mode = PValueMode::AgainstMean;
        } else {
            type_error("/p_mode", "\"all_pairs\" or \"against_mean\"");
        }
    }
    spec.validate();
    return spec;
}

SweepSpec parse_config(std::istream& source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw InvalidSpec(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json config_to_json(const SweepSpec& spec) {
    json doc;
    if (spec.preset) {
        doc["preset"] = *spec.preset;
    } else {
        doc["alpha"] = spec.alpha;
    }
    if (spec.rho.empty()) {
        doc["rho"] = "uniform";
    } else {
        doc["rho"] = spec.rho;
    }
    doc["nk_budgets"] = spec.nk_budgets;
    doc["k_schedule"] = spec.k_schedule;
    doc["epsilons"] = spec.epsilons;
    json metrics = json::array();
    for (auto m : spec.metrics) metrics.push_back(std::string(metric_name(m)));
    doc["metrics"] = metrics;
    doc["replicates"] = spec.replicates;
    doc["smoothing"] = spec.smoothing;
    doc["master_seed"] = spec.master_seed;
    doc["min_items"] = spec.min_items;
    doc["p_threshold"] = spec.p_threshold;
    doc["paired"] = spec.paired;
    doc["p_mode"] = spec.p_mode == PValueMode::AllPairs ? "all_pairs" : "against_mean";
    return doc;
}

json test_result_json(const TestResult& r) {
    return json{
        {"p_value", r.p_value},
        {"ci_lower", r.ci_lower},
        {"ci_upper", r.ci_upper},
        {"ci_width", r.ci_width},
        {"effect_size", r.effect_size},
        {"replicates", r.r_replicates},
        {"n", r.n},
        {"k", r.k},
        {"nk", r.nk},
        {"m", r.m},
        {"epsilon", r.epsilon},
        {"metric", std::string(metric_name(r.metric))},
        {"seed", r.seed},
    };
}

json minimum_json(const BudgetMinimum& b) {
    json out{{"metric", std::string(metric_name(b.metric))}, {"epsilon", b.epsilon}, {"achieved", b.achieved}};
    if (b.achieved) {
        out["nk"] = b.nk;
        out["k"] = b.k;
        out["p_value"] = b.p_value;
        out["delta"] = b.effect_size;
        out["ci_width"] = b.ci_width;
    }
    return out;
}

json summary_json(const SweepReport& report, double p_threshold) {
    const auto budget = find_min_budget(report, p_threshold);
    json min_budget = json::array();
    json min_ci = json::array();
    for (const auto& b : budget) {
        min_budget.push_back(minimum_json(b));
        if (!b.achieved) continue;
        for (const auto& c : find_min_ci(report, b.nk)) {
            if (c.metric == b.metric && c.epsilon == b.epsilon) min_ci.push_back(minimum_json(c));
        }
    }
    std::size_t skipped = 0;
    std::size_t failed = 0;
    for (const auto& row : report.rows) {
        skipped += row.cell.skipped;
        failed += !row.error.empty();
    }
    return json{
        {"preset_or_alpha", report.alpha_label},
        {"seed", report.master_seed},
        {"replicates", report.replicates},
        {"p_threshold", p_threshold},
        {"cells", report.rows.size()},
        {"skipped_cells", skipped},
        {"failed_cells", failed},
        {"min_budget", min_budget},
        {"min_ci_width", min_ci},
    };
}

void write_results_csv(const SweepReport& report, std::ostream& sink) {
    for (std::size_t c = 0; c < std::size(kResultColumns); ++c) {
        if (c) sink << ',';
        sink << kResultColumns[c];
    }
    sink << '\n';
    if (!sink) throw RuntimeError("failed writing results header");
    const std::string label = csv_escape(report.alpha_label);
    for (const auto& row : report.rows) {
        const auto& cell = row.cell;
        const auto& r = row.result;
        sink << label << ',' << metric_name(cell.metric) << ',' << format_double(cell.epsilon) << ',' << cell.nk
             << ',' << cell.k << ',' << cell.n << ',' << (cell.skipped ? "true" : "false") << ','
             << cell_text(r, &TestResult::p_value) << ',' << cell_text(r, &TestResult::ci_lower) << ','
             << cell_text(r, &TestResult::ci_upper) << ',' << cell_text(r, &TestResult::ci_width) << ','
             << cell_text(r, &TestResult::effect_size) << ',' << report.replicates << ',' << report.master_seed << ','
             << csv_escape(cell.skipped ? cell.skip_reason : row.error) << '\n';
        if (!sink) throw RuntimeError("failed writing results row for cell " + std::to_string(cell.ordinal));
    }
    sink.flush();
    if (!sink) throw RuntimeError("failed flushing results");
}

SweepReport read_results_csv(std::istream& source) {
    CsvReader reader(source);
    auto header = reader.next();
    if (!header) throw FormatError("empty results file", 1);
    const std::size_t width = std::size(kResultColumns);
    if (header->size() != width) throw FormatError("unexpected results header", reader.line());
    for (std::size_t c = 0; c < width; ++c) {
        if ((*header)[c] != kResultColumns[c]) {
            throw FormatError(std::string("expected column ") + kResultColumns[c], reader.line());
        }
    }
    SweepReport report;
    while (auto rec = reader.next()) {
        if (rec->size() == 1 && rec->front().empty()) continue;
        const std::size_t line = reader.line();
        if (rec->size() != width) throw FormatError("wrong number of columns", line);
        const auto& f = *rec;
        SweepRow row;
        GridCell& cell = row.cell;
        cell.ordinal = report.rows.size();
        auto metric = parse_metric(f[1]);
        if (!metric) throw FormatError("unknown metric '" + f[1] + "'", line);
        cell.metric = *metric;
        cell.epsilon = parse_double_field(f[2], line, "epsilon");
        cell.nk = parse_unsigned_field(f[3], line, "nk");
        cell.k = parse_unsigned_field(f[4], line, "k");
        cell.n = parse_unsigned_field(f[5], line, "n");
        if (f[6] != "true" && f[6] != "false") throw FormatError("bad value in column skipped", line);
        cell.skipped = f[6] == "true";
        report.alpha_label = f[0];
        report.replicates = parse_unsigned_field(f[12], line, "replicates");
        report.master_seed = parse_unsigned_field(f[13], line, "seed");
        if (cell.skipped) {
            cell.skip_reason = f[14];
        } else if (f[7].empty()) {
            row.error = f[14];
        } else {
            TestResult r;
            r.p_value = parse_double_field(f[7], line, "p_value");
            r.ci_lower = parse_double_field(f[8], line, "ci_lower");
            r.ci_upper = parse_double_field(f[9], line, "ci_upper");
            r.ci_width = parse_double_field(f[10], line, "ci_width");
            r.effect_size = parse_double_field(f[11], line, "delta");
            r.r_replicates = report.replicates;
            r.n = cell.n;
            r.k = cell.k;
            r.nk = cell.nk;
            r.epsilon = cell.epsilon;
            r.metric = cell.metric;
            r.seed = report.master_seed;
            row.result = r;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string format_fit_result(const FitResult& fit, std::span<const std::string> label_names) {
    auto number_list = [](std::span<const double> v) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += format_double17(v[i]);
        }
        return out + "]";
    };
    std::ostringstream os;
    os << "{\n";
    os << "  \"label_names\": [";
    for (std::size_t i = 0; i < label_names.size(); ++i) {
        if (i) os << ", ";
        os << json(label_names[i]).dump();
    }
    os << "],\n";
    os << "  \"alpha_hat\": " << number_list(fit.alpha_hat.alpha()) << ",\n";
    os << "  \"theta_pooled\": " << number_list(fit.theta_pooled.probs()) << ",\n";
    os << "  \"expected_theta\": " << number_list(fit.expected_theta.probs()) << ",\n";
    os << "  \"mab\": " << format_double17(fit.mab) << ",\n";
    os << "  \"iterations\": " << fit.iterations << ",\n";
    os << "  \"converged\": " << (fit.converged ? "true" : "false") << "\n";
    os << "}\n";
    return os.str();
}

void write_scores(std::span<const double> scores, std::ostream& sink) {
    for (double s : scores) sink << format_double17(s) << '\n';
    if (!sink) throw RuntimeError("failed writing scores");
}

std::vector<double> read_scores(std::istream& source) {
    std::vector<double> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(source, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        out.push_back(parse_double_field(line, n, "score"));
    }
    return out;
}

}  // namespace nkpower
