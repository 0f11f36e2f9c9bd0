#include "ihomer/ihomer.hpp"

#include <algorithm>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ihomer {

HierarchyEnsemble::HierarchyEnsemble(std::size_t label_count, std::size_t feature_count,
                                     const IhomerConfig& config)
    : config_(config),
      feature_count_(feature_count),
      hierarchy_(label_count, config.cluster),
      error_adwin_(config.ensemble_adwin_delta) {
    partition_dirty_ = true;
}

std::vector<std::vector<std::uint32_t>> HierarchyEnsemble::partition() const {
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(models_.size());
    for (const auto& [cluster, tree] : models_) out.push_back(cluster);
    return out;
}

void HierarchyEnsemble::rebuild_partition(const CooccurrenceStats& stats) {
    const auto clusters = config_.single_cluster
                              ? std::vector<std::vector<std::uint32_t>>{hierarchy_.root().labels}
                              : hierarchy_.balanced_partition(stats.labelset_size_histogram());
    std::map<std::vector<std::uint32_t>, std::unique_ptr<MlhatTree>> next;
    for (const auto& cluster : clusters) {
        auto it = models_.find(cluster);
        if (it != models_.end()) {
            next.emplace(cluster, std::move(it->second));  // unchanged cluster keeps its tree
        } else {
            next.emplace(cluster, std::make_unique<MlhatTree>(cluster.size(), feature_count_,
                                                               config_.tree));
        }
    }
    models_ = std::move(next);
    partition_dirty_ = false;
}

LabelSet HierarchyEnsemble::predict_one(std::span<const double> x) const {
    std::vector<std::uint32_t> global;
    for (const auto& [cluster, tree] : models_) {
        const auto pred = tree->predict_one(x);
        for (auto local : pred.labels.indices()) global.push_back(cluster[local]);
    }
    return LabelSet(std::move(global));
}

bool HierarchyEnsemble::record_error(bool subset_error) {
    const auto signal = error_adwin_.update(subset_error ? 1.0 : 0.0);
    if (signal.drift && signal.degrading) {
        // Signals separated by more than one grace period start a new run.
        if (n_seen_ - last_drift_n_ > config_.cluster.n_min) consecutive_drift_ = 0;
        consecutive_drift_ += 1;
        last_drift_n_ = n_seen_;
    }
    return signal.drift && signal.degrading;
}

void HierarchyEnsemble::register_label(std::uint32_t label, const CooccurrenceStats& stats) {
    if (label < hierarchy_.label_count()) return;
    hierarchy_.add_label(label, stats);
    partition_dirty_ = true;
}

void HierarchyEnsemble::train_models(std::span<const double> x, const LabelSet& y) {
    // Cluster trees share nothing mutable, so the fan-out is safe and the
    // result is identical to the serial loop. Label restriction stays on the
    // coordinator; the region only runs the per-tree updates.
    std::vector<MlhatTree*> trees;
    std::vector<LabelSet> locals;
    trees.reserve(models_.size());
    locals.reserve(models_.size());
    for (auto& [cluster, tree] : models_) {
        trees.push_back(tree.get());
        locals.push_back(ClusterView(cluster).restrict(y));
    }

#ifdef _OPENMP
    if (config_.threads > 1 && trees.size() > 1) {
#pragma omp parallel for schedule(static) num_threads(config_.threads)
        for (std::size_t i = 0; i < trees.size(); ++i) trees[i]->learn_one(x, locals[i]);
        return;
    }
#endif
    for (std::size_t i = 0; i < trees.size(); ++i) trees[i]->learn_one(x, locals[i]);
}

void HierarchyEnsemble::learn_one(std::span<const double> x, const LabelSet& y,
                                  const CooccurrenceStats& stats, bool allow_restructure) {
    n_seen_ += 1;
    hierarchy_.observe(y);
    if (allow_restructure && !config_.single_cluster) {
        if (hierarchy_.run_structure_tests()) partition_dirty_ = true;
    }
    if (partition_dirty_) rebuild_partition(stats);
    train_models(x, y);
}

std::size_t HierarchyEnsemble::total_tree_nodes() const {
    std::size_t total = 0;
    for (const auto& [cluster, tree] : models_) total += tree->node_count();
    return total;
}

std::string HierarchyEnsemble::to_json() const {
    std::ostringstream os;
    os << "{\"hierarchy\":" << hierarchy_.to_json() << ",\"models\":[";
    bool first = true;
    for (const auto& [cluster, tree] : models_) {
        if (!first) os << ",";
        first = false;
        os << "{\"cluster\":[";
        for (std::size_t i = 0; i < cluster.size(); ++i) os << (i ? "," : "") << cluster[i];
        os << "],\"tree\":" << tree->to_json() << "}";
    }
    os << "]}";
    return os.str();
}

IhomerModel::IhomerModel(std::size_t label_count, std::size_t feature_count,
                         IhomerConfig config)
    : config_(std::move(config)),
      label_count_(label_count),
      feature_count_(feature_count),
      stats_(label_count),
      main_(label_count, feature_count, config_) {}

LabelSet IhomerModel::predict_one(std::span<const double> x) const {
    return main_.predict_one(x);
}

void IhomerModel::register_labels(const LabelSet& y) {
    if (y.empty() || y.max_index() < label_count_) return;
    for (auto l : y.indices()) {
        if (l < label_count_) continue;
        for (std::uint32_t idx = static_cast<std::uint32_t>(label_count_); idx <= l; ++idx) {
            stats_.ensure_label_count(idx + 1);
            main_.register_label(idx, stats_);
            if (alt_) alt_->register_label(idx, stats_);
        }
        label_count_ = l + 1;
    }
}

bool IhomerModel::restructuring_allowed() const {
    return config_.freeze_partition_at < 0 ||
           n_seen_ <= static_cast<std::uint64_t>(config_.freeze_partition_at);
}

void IhomerModel::learn_one(std::span<const double> x, const LabelSet& y) {
    n_seen_ += 1;
    register_labels(y);

    // Prequential error tracking for both hierarchies before any training.
    const LabelSet pred_main = main_.predict_one(x);
    main_.record_error(!(pred_main == y));
    if (alt_) {
        const LabelSet pred_alt = alt_->predict_one(x);
        alt_->record_error(!(pred_alt == y));
    }

    stats_.observe(y);  // once per instance, shared by both hierarchies

    const bool restructure = restructuring_allowed();
    main_.learn_one(x, y, stats_, restructure);
    if (alt_) alt_->learn_one(x, y, stats_, restructure);

    last_action_ = restructure && !config_.single_cluster ? maybe_swap_hierarchy()
                                                          : SwapAction::kKeep;
}

IhomerModel::SwapAction IhomerModel::decide_swap(const ErrorSummary& main_errors,
                                                 const ErrorSummary& alt_errors,
                                                 double delta_alt_cluster,
                                                 std::uint64_t grace) {
    const std::uint64_t need = std::max<std::uint64_t>(grace, 2);
    if (main_errors.count < need || alt_errors.count < need) return SwapAction::kKeep;
    const auto [t, dof] = welch_t(main_errors, alt_errors);
    // t > 0 means the main ensemble errs more; swap only on significance.
    if (t > 0.0 && welch_significant(t, dof, delta_alt_cluster)) return SwapAction::kSwap;
    return SwapAction::kKeep;
}

IhomerModel::SwapAction IhomerModel::maybe_swap_hierarchy() {
    if (alt_) {
        if (decide_swap(main_.error_summary(), alt_->error_summary(), config_.delta_alt_cluster,
                        config_.swap_grace) == SwapAction::kSwap) {
            main_ = std::move(*alt_);
            alt_.reset();
            main_.consume_drift_signals();
            return SwapAction::kSwap;
        }
        // Main still drifting with a mature alternate: restart the alternate
        // so it tracks the newest regime.
        if (main_.consecutive_drift_signals() >= config_.drift_signal_threshold &&
            alt_->instances() >= config_.swap_grace) {
            alt_.emplace(label_count_, feature_count_, config_);
            main_.consume_drift_signals();
            return SwapAction::kSpawnAlt;
        }
        return SwapAction::kKeep;
    }
    if (main_.consecutive_drift_signals() >= config_.drift_signal_threshold) {
        // Fresh single-cluster hierarchy seeded with the shared statistics.
        alt_.emplace(label_count_, feature_count_, config_);
        main_.consume_drift_signals();
        return SwapAction::kSpawnAlt;
    }
    return SwapAction::kKeep;
}

std::string IhomerModel::to_json() const {
    std::ostringstream os;
    os << "{\"instances\":" << n_seen_ << ",\"label_count\":" << label_count_
       << ",\"main\":" << main_.to_json();
    if (alt_) os << ",\"alternate\":" << alt_->to_json();
    os << "}";
    return os.str();
}

}  // namespace ihomer
