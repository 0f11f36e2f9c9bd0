#pragma once

// Incremental Jaccard co-occurrence statistics over label pairs and the
// online divisive-agglomerative hierarchy whose leaves partition the label
// space into disjoint correlated clusters.
//
// Two layers of evidence: dataset-level counters (CooccurrenceStats) feed
// the balanced-partition size histogram and never reset, while every
// hierarchy node keeps its own pair window anchored at the node's
// activation, so structure decisions rest on fresh statistical summaries
// and a hierarchy spawned mid-stream sees only the data that follows it.
// The dissimilarity graph is materialized lazily, only when a leaf is
// tested for splitting or aggregation.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ihomer/core.hpp"

namespace ihomer {

/// Incremental counters backing the pairwise Jaccard dissimilarity graph.
/// Only the both-present count is stored per unordered pair; the only-p and
/// only-q counts derive from the per-label presence totals.
class CooccurrenceStats {
public:
    explicit CooccurrenceStats(std::size_t label_count = 0);

    void ensure_label_count(std::size_t label_count);

    /// Advances counters with one instance's label set. Labels absent from
    /// the set count as zero (missing labels are imputed as zero).
    void observe(const LabelSet& y);

    /// Jaccard dissimilarity 1 - a/(a+b+c). Pairs never touched by any
    /// instance (a+b+c = 0) return the prior dissimilarity 1.0: absence of
    /// evidence must not pull labels together.
    double dissimilarity(std::uint32_t p, std::uint32_t q) const;

    std::uint64_t both_count(std::uint32_t p, std::uint32_t q) const;
    std::uint64_t only_first_count(std::uint32_t p, std::uint32_t q) const;
    std::uint64_t presence(std::uint32_t label) const { return presence_.at(label); }
    std::uint64_t instances() const { return n_; }
    std::size_t label_count() const { return label_count_; }

    /// How often label sets of each cardinality occurred (size 0 included).
    const std::map<std::size_t, std::uint64_t>& labelset_size_histogram() const {
        return size_hist_;
    }

private:
    std::size_t label_count_;
    std::uint64_t n_ = 0;
    std::vector<std::uint64_t> presence_;
    std::vector<std::uint64_t> both_;  // triangular, indexed by pair_index
    std::map<std::size_t, std::uint64_t> size_hist_;

    // p < q; layout grows append-only as labels are added.
    static std::size_t pair_index(std::uint32_t p, std::uint32_t q) {
        return static_cast<std::size_t>(q) * (q - 1) / 2 + p;
    }
};

/// Pair evidence over one node's labels, anchored at the node's activation.
class PairWindow {
public:
    void reset(const std::vector<std::uint32_t>& labels);
    void add_label(std::uint32_t label);

    /// Counts one instance; only the labels owned by this window matter.
    void observe(const LabelSet& y);

    /// Jaccard dissimilarity between two owned labels (global indices);
    /// untouched pairs return the prior 1.0.
    double dissimilarity(std::uint32_t p, std::uint32_t q) const;

    /// Maximum pairwise dissimilarity among owned labels (0 for singletons).
    double diameter() const;

    std::uint64_t instances() const { return n_; }

private:
    std::vector<std::uint32_t> labels_;  // sorted global indices
    std::vector<std::uint64_t> presence_;
    std::vector<std::uint64_t> both_;  // triangular over local indices
    std::uint64_t n_ = 0;

    std::size_t local_index(std::uint32_t label) const;
    static std::size_t pair_index(std::size_t p, std::size_t q) {
        return q * (q - 1) / 2 + p;  // p < q
    }
};

struct ClusterConfig {
    std::uint64_t n_min = 200;  // grace period between structure tests
    double delta = 1e-5;        // confidence for the cluster Hoeffding bound
    double tau = 0.05;          // tie threshold arming forced tests
};

/// One node of the cluster hierarchy. Leaves carry the active clusters;
/// internal nodes keep monitoring their diameters for re-aggregation.
struct ClusterNode {
    std::vector<std::uint32_t> labels;  // sorted, non-empty
    std::unique_ptr<ClusterNode> left, right;
    ClusterNode* parent = nullptr;

    PairWindow window;              // evidence since this node activated
    std::uint64_t n_at_split = 0;   // window size frozen when the node split
    std::uint64_t last_test_n = 0;  // window size at the previous test
    bool tested = false;

    // Diameter caches from the most recent evaluation.
    double d1 = 0.0, d0 = 0.0, d_mean = 0.0, epsilon = 0.0;

    bool is_leaf() const { return !left; }
    std::uint64_t n_active() const { return window.instances(); }
};

/// Binary tree over the label space; the set of leaves is a disjoint cover
/// of all known labels at every point in time.
class ClusterHierarchy {
public:
    ClusterHierarchy(std::size_t label_count, ClusterConfig config);

    /// Registers a label discovered mid-stream: the root set grows and the
    /// label is propagated to the nearest leaf so the partition invariant
    /// keeps holding.
    void add_label(std::uint32_t label, const CooccurrenceStats& stats);

    /// Feeds one instance's label set to every node's evidence window.
    void observe(const LabelSet& y);

    /// Runs split and aggregation tests on every leaf whose grace period
    /// elapsed. Returns true when the leaf set changed.
    bool run_structure_tests();

    /// Split test for one leaf (spread-ratio criterion against the node's
    /// Hoeffding bound). Returns true when the leaf was split; the two
    /// labels realizing the maximum dissimilarity seed the children and the
    /// rest join the nearer pivot.
    bool try_split(ClusterNode& leaf);

    /// Aggregation test for one leaf with a leaf sibling: the split is
    /// undone when the children's diameters stopped being meaningfully
    /// smaller than the parent's. The merged node restarts with fresh
    /// summaries; dataset-level co-occurrence counters are untouched.
    bool try_aggregate(ClusterNode& leaf);

    /// Current leaf label sets (disjoint, covering).
    std::vector<std::vector<std::uint32_t>> leaves() const;

    /// Coarser cut of the dendrogram: any leaf smaller than the modal
    /// labelset cardinality is absorbed by its closest ancestor of at least
    /// that size. Sizes of zero never drive the cut; an oversized minimum
    /// collapses everything into a single cluster.
    std::vector<std::vector<std::uint32_t>> balanced_partition(
        const std::map<std::size_t, std::uint64_t>& labelset_size_histogram) const;

    /// Split criterion of the growing stage, exposed for direct testing.
    /// Zero denominator counts as maximal asymmetry: split iff d1 > d0.
    static bool split_criterion(double d1, double d0, double d_mean, double epsilon);

    /// Aggregation criterion of the shrinking stage.
    static bool aggregate_criterion(double parent_diam, double left_diam, double right_diam,
                                    double epsilon);

    ClusterNode& root() { return *root_; }
    const ClusterNode& root() const { return *root_; }
    const ClusterConfig& config() const { return config_; }
    std::size_t label_count() const { return label_count_; }

    /// Nested {labels, children} tree for inspection dumps.
    std::string to_json() const;

private:
    std::unique_ptr<ClusterNode> root_;
    ClusterConfig config_;
    std::size_t label_count_;

    ClusterNode* find_due_leaf(ClusterNode& node);
    void collect_leaves(const ClusterNode& node,
                        std::vector<std::vector<std::uint32_t>>& out) const;
};

}  // namespace ihomer
