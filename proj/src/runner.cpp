#include "ihomer/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ihomer {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kReportSchema = "mlstream-report-v1";

std::unique_ptr<io::InstanceStream> open_stream(const RunConfig& config, std::string& name) {
    const bool has_dataset = !config.dataset_path.empty();
    const bool has_synth = !config.synthetic_spec_path.empty();
    if (has_dataset == has_synth)
        throw std::invalid_argument("exactly one of dataset path and synthetic spec required");
    if (has_synth) {
        auto spec = io::SyntheticSpec::from_json_file(config.synthetic_spec_path);
        spec.seed = config.seed;
        name = std::filesystem::path(config.synthetic_spec_path).stem().string();
        return std::make_unique<io::SyntheticStream>(spec);
    }
    name = std::filesystem::path(config.dataset_path).stem().string();
    if (config.csv_trailing_labels > 0)
        return std::make_unique<io::MemoryStream>(
            io::load_csv(config.dataset_path, config.csv_trailing_labels));
    return std::make_unique<io::MemoryStream>(
        io::load_arff(config.dataset_path, config.label_spec, config.nominal_encoding));
}

ordered_json config_json(const RunConfig& config, const std::string& dataset_name) {
    ordered_json j;
    j["dataset"] = dataset_name;
    j["dataset_path"] = config.dataset_path;
    j["synthetic_spec_path"] = config.synthetic_spec_path;
    j["learner"] = config.learner;
    j["seed"] = config.seed;
    j["rolling_window"] = config.rolling_window;
    j["max_instances"] = config.max_instances;
    ordered_json p;
    p["n_min_cluster"] = config.params.cluster.n_min;
    p["delta_cluster"] = config.params.cluster.delta;
    p["tau_cluster"] = config.params.cluster.tau;
    p["n_min_tree"] = config.params.tree.n_min;
    p["delta_tree"] = config.params.tree.delta;
    p["tau_tree"] = config.params.tree.tau;
    p["delta_alt_tree"] = config.params.tree.delta_alt;
    p["adwin_delta"] = config.params.tree.adwin_delta;
    p["delta_alt_cluster"] = config.params.delta_alt_cluster;
    p["ensemble_adwin_delta"] = config.params.ensemble_adwin_delta;
    p["swap_grace"] = config.params.swap_grace;
    p["drift_signal_threshold"] = config.params.drift_signal_threshold;
    p["single_cluster"] = config.params.single_cluster;
    p["freeze_partition_at"] = config.params.freeze_partition_at;
    p["threads"] = config.params.threads;
    j["params"] = p;
    return j;
}

}  // namespace

RunResult run_benchmark(const RunConfig& config) {
    if (!config.seed_set) throw std::invalid_argument("seed is mandatory");

    std::string dataset_name;
    auto stream = open_stream(config, dataset_name);
    const StreamConfig& sc = stream->config();

    auto learner =
        make_learner(config.learner, sc.label_count, sc.feature_count, config.params);
    PrequentialState metrics(sc.label_count, config.rolling_window);

    RunResult result;
    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t n = 0;
    std::size_t peak = 0;
    while (auto inst = stream->next()) {
        if (config.max_instances > 0 && n >= config.max_instances) break;
        if (!inst->labels) throw std::runtime_error("prequential run requires labeled stream");
        const LabelSet& truth = *inst->labels;
        if (!truth.empty() && truth.max_index() >= metrics.label_count())
            metrics.ensure_label_count(truth.max_index() + 1);

        const LabelSet pred = learner->predict_one(inst->features);
        metrics.update(truth, pred);
        learner->learn_one(inst->features, truth);
        ++n;
        if (n % 100 == 0) peak = std::max(peak, learner->structure_size());
    }
    if (n == 0) throw std::runtime_error("empty stream: nothing to evaluate");
    const auto t1 = std::chrono::steady_clock::now();

    result.instances = n;
    result.metrics = metrics.report();
    result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.final_structure_size = learner->structure_size();
    result.peak_structure_size = std::max(peak, result.final_structure_size);

    std::filesystem::create_directories(config.out_dir);
    const auto out = [&](const std::string& file) {
        return (std::filesystem::path(config.out_dir) / file).string();
    };
    result.report_path = out("report.json");
    result.rolling_path = out("rolling.csv");
    result.config_path = out("config.json");
    result.timing_path = out("timing.json");

    ordered_json report;
    report["schema"] = kReportSchema;
    report["learner"] = config.learner;
    report["dataset"] = dataset_name;
    report["seed"] = config.seed;
    report["instances"] = n;
    report["label_count"] = metrics.label_count();
    report["feature_count"] = sc.feature_count;
    report["rolling_window"] = config.rolling_window;
    report["metrics"] = {{"subset_accuracy", result.metrics.subset_accuracy},
                         {"sample_accuracy", result.metrics.sample_accuracy},
                         {"hamming_loss", result.metrics.hamming_loss},
                         {"micro_f1", result.metrics.micro_f1},
                         {"macro_f1", result.metrics.macro_f1}};
    report["structure"] = {{"final_size", result.final_structure_size},
                           {"peak_size", result.peak_structure_size}};
    std::ofstream(result.report_path) << report.dump(2) << "\n";

    write_rolling_csv(result.rolling_path, metrics, config.rolling_window);
    std::ofstream(result.config_path) << config_json(config, dataset_name).dump(2) << "\n";

    if (!config.dump_state_path.empty())
        std::ofstream(config.dump_state_path) << learner->structure_json() << "\n";

    ordered_json timing;
    timing["wall_seconds"] = result.wall_seconds;
    timing["instances_per_second"] =
        result.wall_seconds > 0 ? static_cast<double>(n) / result.wall_seconds : 0.0;
    std::ofstream(result.timing_path) << timing.dump(2) << "\n";

    return result;
}

const std::vector<std::string>& CompareSummary::metric_names() {
    static const std::vector<std::string> names = {
        "subset_accuracy", "sample_accuracy", "hamming_loss", "micro_f1", "macro_f1"};
    return names;
}

CompareSummary compare_runs(const std::vector<std::string>& report_paths) {
    if (report_paths.size() < 2)
        throw std::invalid_argument("compare needs at least two reports");

    struct Entry {
        std::string learner, dataset;
        std::map<std::string, double> metrics;
    };
    std::vector<Entry> entries;
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open report " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("malformed report " + path + ": " + e.what());
        }
        if (j.value("schema", "") != kReportSchema)
            throw std::runtime_error("report schema mismatch in " + path);
        Entry e;
        e.learner = j.at("learner").get<std::string>();
        e.dataset = j.at("dataset").get<std::string>();
        for (const auto& m : CompareSummary::metric_names())
            e.metrics[m] = j.at("metrics").at(m).get<double>();
        entries.push_back(std::move(e));
    }

    CompareSummary summary;
    for (const auto& e : entries) {
        if (std::find(summary.learners.begin(), summary.learners.end(), e.learner) ==
            summary.learners.end())
            summary.learners.push_back(e.learner);
        if (std::find(summary.datasets.begin(), summary.datasets.end(), e.dataset) ==
            summary.datasets.end())
            summary.datasets.push_back(e.dataset);
    }
    const auto& metrics = CompareSummary::metric_names();
    const std::size_t n_learners = summary.learners.size();
    summary.means.assign(metrics.size(), std::vector<double>(n_learners, 0.0));
    summary.avg_ranks.assign(metrics.size(), std::vector<double>(n_learners, 0.0));

    std::vector<std::vector<std::uint64_t>> counts(metrics.size(),
                                                   std::vector<std::uint64_t>(n_learners, 0));
    auto learner_index = [&](const std::string& l) {
        return static_cast<std::size_t>(
            std::find(summary.learners.begin(), summary.learners.end(), l) -
            summary.learners.begin());
    };

    for (const auto& e : entries) {
        const std::size_t li = learner_index(e.learner);
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            summary.means[m][li] += e.metrics.at(metrics[m]);
            counts[m][li] += 1;
        }
    }
    for (std::size_t m = 0; m < metrics.size(); ++m)
        for (std::size_t l = 0; l < n_learners; ++l)
            if (counts[m][l] > 0) summary.means[m][l] /= static_cast<double>(counts[m][l]);

    // Average ranks per dataset; ties share the mean of their positions.
    std::vector<std::vector<std::uint64_t>> rank_counts(
        metrics.size(), std::vector<std::uint64_t>(n_learners, 0));
    for (const auto& dataset : summary.datasets) {
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            const bool ascending = metrics[m] == "hamming_loss";
            std::vector<std::pair<double, std::size_t>> scored;
            for (const auto& e : entries)
                if (e.dataset == dataset)
                    scored.emplace_back(e.metrics.at(metrics[m]), learner_index(e.learner));
            if (scored.size() < 2) continue;
            std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
                return ascending ? a.first < b.first : a.first > b.first;
            });
            std::size_t i = 0;
            while (i < scored.size()) {
                std::size_t j = i;
                while (j + 1 < scored.size() && scored[j + 1].first == scored[i].first) ++j;
                const double shared_rank = (static_cast<double>(i) + 1.0 +
                                            static_cast<double>(j) + 1.0) /
                                           2.0;
                for (std::size_t k = i; k <= j; ++k) {
                    summary.avg_ranks[m][scored[k].second] += shared_rank;
                    rank_counts[m][scored[k].second] += 1;
                }
                i = j + 1;
            }
        }
    }
    for (std::size_t m = 0; m < metrics.size(); ++m)
        for (std::size_t l = 0; l < n_learners; ++l)
            if (rank_counts[m][l] > 0)
                summary.avg_ranks[m][l] /= static_cast<double>(rank_counts[m][l]);

    return summary;
}

void print_compare(const CompareSummary& summary, std::ostream& out) {
    const auto& metrics = CompareSummary::metric_names();
    out << std::left << std::setw(18) << "metric";
    for (const auto& l : summary.learners) out << std::setw(24) << l;
    out << "\n";
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        out << std::left << std::setw(18) << metrics[m];
        for (std::size_t l = 0; l < summary.learners.size(); ++l) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << summary.means[m][l] << " (rank "
                 << std::setprecision(2) << summary.avg_ranks[m][l] << ")";
            out << std::setw(24) << cell.str();
        }
        out << "\n";
    }
    out << "datasets:";
    for (const auto& d : summary.datasets) out << " " << d;
    out << "\n";
}

}  // namespace ihomer
