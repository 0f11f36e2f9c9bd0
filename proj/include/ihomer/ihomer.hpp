#pragma once

// Orchestrator: routes instances to per-cluster trees, maintains the main
// and alternate cluster hierarchies, and swaps them when the alternate's
// monitored error is significantly lower under Welch's t-test.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ihomer/core.hpp"
#include "ihomer/drift.hpp"
#include "ihomer/label_clustering.hpp"
#include "ihomer/mlhat.hpp"

namespace ihomer {

struct IhomerConfig {
    ClusterConfig cluster;
    TreeConfig tree;
    double delta_alt_cluster = 0.05;   // confidence for the hierarchy swap test
    double ensemble_adwin_delta = 0.002;
    std::uint64_t swap_grace = 200;    // instances both windows need before a swap
    int drift_signal_threshold = 3;    // consecutive signals that spawn an alternate
    bool single_cluster = false;       // freeze the partition at one global cluster
    std::int64_t freeze_partition_at = -1;  // stop restructuring after this instance
    int threads = 1;                   // >1 fans cluster-tree updates across threads
};

/// One cluster hierarchy plus the tree trained on each cluster of its
/// balanced partition and the monitored subset-error window.
class HierarchyEnsemble {
public:
    HierarchyEnsemble(std::size_t label_count, std::size_t feature_count,
                      const IhomerConfig& config);

    LabelSet predict_one(std::span<const double> x) const;

    /// Structure maintenance + tree training for one instance. The caller
    /// has already updated the shared co-occurrence statistics.
    void learn_one(std::span<const double> x, const LabelSet& y,
                   const CooccurrenceStats& stats, bool allow_restructure);

    /// Feeds the subset-error indicator; returns true on a drift signal.
    bool record_error(bool subset_error);

    void register_label(std::uint32_t label, const CooccurrenceStats& stats);

    ErrorSummary error_summary() const { return error_adwin_.summary(); }
    std::uint64_t instances() const { return n_seen_; }

    int consecutive_drift_signals() const { return consecutive_drift_; }
    void consume_drift_signals() { consecutive_drift_ = 0; }

    const ClusterHierarchy& hierarchy() const { return hierarchy_; }
    std::vector<std::vector<std::uint32_t>> partition() const;
    std::size_t model_count() const { return models_.size(); }
    std::size_t total_tree_nodes() const;

    std::string to_json() const;

private:
    IhomerConfig config_;
    std::size_t feature_count_;
    ClusterHierarchy hierarchy_;
    // Keyed by the cluster's label set: deterministic order, and surviving
    // clusters keep their trees across partition changes.
    std::map<std::vector<std::uint32_t>, std::unique_ptr<MlhatTree>> models_;
    AdwinDetector error_adwin_;
    std::uint64_t n_seen_ = 0;
    int consecutive_drift_ = 0;
    std::uint64_t last_drift_n_ = 0;
    bool partition_dirty_ = false;

    void rebuild_partition(const CooccurrenceStats& stats);
    void train_models(std::span<const double> x, const LabelSet& y);
};

/// The full model: a main ensemble, an optional background alternate, and
/// the conservative replacement policy between them.
class IhomerModel {
public:
    IhomerModel(std::size_t label_count, std::size_t feature_count, IhomerConfig config);

    /// Disjoint union of the per-cluster predictions of the main ensemble.
    LabelSet predict_one(std::span<const double> x) const;

    /// Full per-instance update: prequential error tracking for both
    /// ensembles, one co-occurrence update, structure tests, tree training,
    /// and the swap/spawn decision.
    void learn_one(std::span<const double> x, const LabelSet& y);

    enum class SwapAction { kSwap, kSpawnAlt, kKeep };

    /// Replacement policy, exposed for direct testing: swap when the
    /// alternate's error is significantly lower, spawn (or refresh) the
    /// alternate after enough consecutive drift signals, keep otherwise.
    static SwapAction decide_swap(const ErrorSummary& main_errors,
                                  const ErrorSummary& alt_errors, double delta_alt_cluster,
                                  std::uint64_t grace);

    std::size_t label_count() const { return label_count_; }
    std::size_t feature_count() const { return feature_count_; }
    std::uint64_t instances() const { return n_seen_; }
    bool has_alternate() const { return alt_.has_value(); }
    const HierarchyEnsemble& main() const { return main_; }
    const CooccurrenceStats& stats() const { return stats_; }
    const IhomerConfig& config() const { return config_; }
    SwapAction last_action() const { return last_action_; }

    /// Partition plus per-tree structure snapshot.
    std::string to_json() const;

private:
    IhomerConfig config_;
    std::size_t label_count_;
    std::size_t feature_count_;
    CooccurrenceStats stats_;
    HierarchyEnsemble main_;
    std::optional<HierarchyEnsemble> alt_;
    std::uint64_t n_seen_ = 0;
    SwapAction last_action_ = SwapAction::kKeep;

    void register_labels(const LabelSet& y);
    SwapAction maybe_swap_hierarchy();
    bool restructuring_allowed() const;
};

}  // namespace ihomer
