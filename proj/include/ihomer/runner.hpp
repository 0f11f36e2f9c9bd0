#pragma once

// Prequential benchmark runner: wires a dataset or synthetic stream to a
// learner, evaluates test-then-train, and writes the report/rolling/config
// artifacts. Also the cross-run comparison table.

#include <iosfwd>
#include <string>
#include <vector>

#include "ihomer/baselines.hpp"
#include "ihomer/io.hpp"
#include "ihomer/metrics.hpp"

namespace ihomer {

struct RunConfig {
    // exactly one dataset source
    std::string dataset_path;         // .arff or .csv
    std::string synthetic_spec_path;  // generator spec document
    io::LabelSpec label_spec;         // for ARFF datasets
    std::size_t csv_trailing_labels = 0;  // >0 routes dataset_path to the CSV loader
    io::NominalEncoding nominal_encoding = io::NominalEncoding::kOneHot;

    std::string learner = "ihomer";
    IhomerConfig params;
    std::size_t rolling_window = 500;
    std::uint64_t seed = 0;  // mandatory; overrides a synthetic spec's seed
    bool seed_set = false;
    std::uint64_t max_instances = 0;  // 0 = whole stream
    std::string out_dir = "out";
    std::string dump_state_path;  // optional model-structure JSON dump
};

struct RunResult {
    MetricsReport metrics;
    std::uint64_t instances = 0;
    double wall_seconds = 0.0;
    std::size_t final_structure_size = 0;
    std::size_t peak_structure_size = 0;
    std::string report_path, rolling_path, config_path, timing_path;
};

/// Executes one prequential run and writes report.json, rolling.csv,
/// config.json and timing.json under the output directory. report.json is
/// fully deterministic for a fixed config and seed; wall-clock numbers go
/// to timing.json only.
RunResult run_benchmark(const RunConfig& config);

/// Aggregated view over several report files grouped by learner.
struct CompareSummary {
    std::vector<std::string> learners;
    std::vector<std::string> datasets;
    static const std::vector<std::string>& metric_names();
    // means[metric][learner]; average ranks computed per dataset (rank 1 is
    // best; hamming_loss ranks ascending, everything else descending).
    std::vector<std::vector<double>> means;
    std::vector<std::vector<double>> avg_ranks;
};

/// Loads and validates report files (schema-mismatched inputs are rejected)
/// and builds the per-metric comparison. Requires at least two reports.
CompareSummary compare_runs(const std::vector<std::string>& report_paths);

void print_compare(const CompareSummary& summary, std::ostream& out);

}  // namespace ihomer
