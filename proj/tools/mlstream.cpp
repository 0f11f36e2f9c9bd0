// Benchmark CLI: `mlstream run` executes one prequential evaluation and
// writes report/rolling/config files; `mlstream compare` tabulates several
// reports side by side.

#include <iostream>

#include <CLI11.hpp>

#include "ihomer/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Online multi-label stream benchmark"};
    app.require_subcommand(1);
    app.set_config("--config-file", "", "read options from a key=value file");

    ihomer::RunConfig config;
    std::string label_xml;
    std::size_t trailing = 0, leading = 0;
    std::string prefix;
    std::string encoding = "one-hot";
    std::size_t csv_labels = 0;

    auto* run = app.add_subcommand("run", "run one prequential benchmark");
    run->configurable();
    run->add_option("--dataset", config.dataset_path, "ARFF or CSV dataset path");
    run->add_option("--synthetic-spec", config.synthetic_spec_path,
                    "synthetic stream spec (JSON)");
    run->add_option("--labels-xml", label_xml, "companion label XML (ARFF)");
    run->add_option("--trailing-labels", trailing, "label attributes at the end (ARFF)");
    run->add_option("--leading-labels", leading, "label attributes at the start (ARFF)");
    run->add_option("--label-prefix", prefix, "label attributes by name prefix (ARFF)");
    run->add_option("--csv-labels", csv_labels, "trailing binary label columns (CSV)");
    run->add_option("--nominal-encoding", encoding, "one-hot|integer (default one-hot)");
    run->add_option("--learner", config.learner,
                    "ihomer|mlhat-single|br-hoeffding|majority-labelset");
    run->add_option("--seed", config.seed, "run seed (mandatory)")->required();
    run->add_option("--rolling-window", config.rolling_window, "rolling series window");
    run->add_option("--max-instances", config.max_instances, "stop after this many instances");
    run->add_option("--out", config.out_dir, "output directory");
    std::string dump_state;
    run->add_option("--dump-state", dump_state,
                    "write the final model structure (partition + trees) as JSON");

    std::uint64_t n_min = 0;
    run->add_option("--n-min", n_min, "grace period for clusters, trees and swaps");
    run->add_option("--delta-cluster", config.params.cluster.delta, "cluster split confidence");
    run->add_option("--tau-cluster", config.params.cluster.tau, "cluster tie threshold");
    run->add_option("--delta-tree", config.params.tree.delta, "tree split confidence");
    run->add_option("--tau-tree", config.params.tree.tau, "tree tie threshold");
    run->add_option("--delta-alt-tree", config.params.tree.delta_alt,
                    "alternate subtree replacement margin");
    run->add_option("--delta-alt-cluster", config.params.delta_alt_cluster,
                    "hierarchy swap confidence");
    run->add_option("--adwin-delta", config.params.tree.adwin_delta,
                    "per-node drift detector confidence");
    run->add_option("--drift-signals", config.params.drift_signal_threshold,
                    "consecutive signals that spawn an alternate hierarchy");
    run->add_option("--threads", config.params.threads, "cluster-tree fan-out (1 = serial)");
    run->add_flag("--single-cluster", config.params.single_cluster,
                  "disable label clustering (one global cluster)");
    run->add_option("--freeze-partition-at", config.params.freeze_partition_at,
                    "stop partition restructuring after this instance");

    std::vector<std::string> report_paths;
    auto* compare = app.add_subcommand("compare", "tabulate several report.json files");
    compare->add_option("reports", report_paths, "report.json paths")->expected(-2);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            config.seed_set = true;
            config.dump_state_path = dump_state;
            if (n_min > 0) {
                config.params.cluster.n_min = n_min;
                config.params.tree.n_min = n_min;
                config.params.swap_grace = n_min;
            }
            config.params.ensemble_adwin_delta = config.params.tree.adwin_delta;
            if (!label_xml.empty()) {
                config.label_spec.kind = ihomer::io::LabelSpec::Kind::kXml;
                config.label_spec.xml_path = label_xml;
            } else if (leading > 0) {
                config.label_spec.kind = ihomer::io::LabelSpec::Kind::kLeading;
                config.label_spec.count = leading;
            } else if (!prefix.empty()) {
                config.label_spec.kind = ihomer::io::LabelSpec::Kind::kPrefix;
                config.label_spec.prefix = prefix;
            } else if (trailing > 0) {
                config.label_spec.kind = ihomer::io::LabelSpec::Kind::kTrailing;
                config.label_spec.count = trailing;
            }
            config.csv_trailing_labels = csv_labels;
            config.nominal_encoding = encoding == "integer"
                                          ? ihomer::io::NominalEncoding::kInteger
                                          : ihomer::io::NominalEncoding::kOneHot;

            const auto result = ihomer::run_benchmark(config);
            std::cout << "instances: " << result.instances << "\n"
                      << "subset_accuracy: " << result.metrics.subset_accuracy << "\n"
                      << "sample_accuracy: " << result.metrics.sample_accuracy << "\n"
                      << "hamming_loss: " << result.metrics.hamming_loss << "\n"
                      << "micro_f1: " << result.metrics.micro_f1 << "\n"
                      << "macro_f1: " << result.metrics.macro_f1 << "\n"
                      << "report: " << result.report_path << "\n";
        } else if (compare->parsed()) {
            const auto summary = ihomer::compare_runs(report_paths);
            ihomer::print_compare(summary, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
