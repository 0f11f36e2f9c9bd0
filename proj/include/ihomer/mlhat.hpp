#pragma once

// Multi-label Hoeffding adaptive tree over one label cluster: Bernoulli
// information-gain splits guarded by the Hoeffding bound, per-node ADWIN
// monitoring of the node-local Hamming error, and alternate subtrees grown
// in the background during suspected drift.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "ihomer/core.hpp"
#include "ihomer/drift.hpp"

namespace ihomer {

/// Running Gaussian summary (Welford) with observed range.
class GaussianEstimator {
public:
    void observe(double x);
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_); }
    double min() const { return min_; }
    double max() const { return max_; }
    /// Φ((x - μ)/σ); degenerates to a step at μ when σ = 0.
    double cdf(double x) const;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
    double min_ = 0.0, max_ = 0.0;
};

struct TreeConfig {
    std::uint64_t n_min = 200;     // grace period between split evaluations
    double delta = 1e-5;           // split-bound confidence
    double tau = 0.05;             // tie threshold forcing near-equal splits
    double delta_alt = 0.05;       // alternate-subtree replacement margin
    double adwin_delta = 0.002;    // per-node drift detector confidence
    std::size_t candidate_thresholds = 10;  // numeric cut points per feature
};

struct TreeNode {
    explicit TreeNode(std::size_t cluster_size, std::size_t feature_count,
                      const TreeConfig& config);

    // Split (internal nodes): x[feature] <= threshold routes left.
    int split_feature = -1;
    double split_threshold = 0.0;
    double split_gain = 0.0;  // heuristic gain recorded when the split fired
    std::unique_ptr<TreeNode> left, right;

    // Statistics maintained at every node on the path.
    std::uint64_t n = 0;
    std::vector<std::uint64_t> label_pos;  // per cluster-local label
    AdwinDetector adwin;                   // node-local Hamming error monitor

    // Leaf-only: per-feature observers and the known label-set registry.
    std::vector<GaussianEstimator> feature_global;               // [F]
    std::vector<std::vector<GaussianEstimator>> feature_given;   // [F][label present]
    std::unordered_set<std::uint64_t> labelset_registry;
    std::uint64_t last_split_eval_n = 0;

    // Background subtree competing with this node during suspected drift.
    std::unique_ptr<TreeNode> alternate;
    double last_epsilon_alt = 0.0;

    bool is_leaf() const { return !left; }
};

/// Adaptive Hoeffding tree predicting the labels of one cluster, in
/// cluster-local coordinates.
class MlhatTree {
public:
    MlhatTree(std::size_t cluster_size, std::size_t feature_count, TreeConfig config);

    /// Test-then-train update along the root-to-leaf path. Alternates on the
    /// path receive the instance recursively; every path node's detector is
    /// fed the node-local per-instance Hamming error.
    void learn_one(std::span<const double> x, const LabelSet& y_local);

    struct Prediction {
        LabelSet labels;             // scores strictly above 1/2
        std::vector<double> scores;  // Laplace-smoothed per-label posteriors
    };

    /// Routes x to the main leaf; alternate leaves on the path that received
    /// their grace period of instances blend in with weights proportional to
    /// one minus their monitored error.
    Prediction predict_one(std::span<const double> x) const;

    std::size_t cluster_size() const { return cluster_size_; }
    std::size_t feature_count() const { return feature_count_; }
    std::uint64_t instances() const { return root_->n; }
    const TreeConfig& config() const { return config_; }
    const TreeNode& root() const { return *root_; }

    std::size_t node_count() const;
    std::size_t depth() const;
    std::size_t alternate_count() const;

    /// Split/count/alternate structure dump.
    std::string to_json() const;

    // --- pure pieces, exposed for direct testing ---

    static double binary_entropy(double p);
    /// Sum of per-label binary entropies of the positive rates.
    static double leaf_entropy(std::span<const std::uint64_t> label_pos, std::uint64_t n);

    enum class AltDecision { kReplace, kPrune, kContinue };
    /// Three-way outcome of comparing monitored errors e (main) and e_alt:
    /// the alternate takes over when it is better by more than the margin,
    /// is discarded when worse by more than the margin, and keeps training
    /// otherwise.
    static AltDecision alternate_decision(double e_main, double e_alt, double delta_alt);
    /// Replacement bound from the monitored errors and window widths of the
    /// two competing subtrees.
    static double epsilon_alt(double e_main, double e_alt, std::uint64_t w_main,
                              std::uint64_t w_alt, double delta_alt);

    static std::uint64_t labelset_key(const LabelSet& y);

private:
    std::size_t cluster_size_;
    std::size_t feature_count_;
    TreeConfig config_;
    std::unique_ptr<TreeNode> root_;

    void learn_node(std::unique_ptr<TreeNode>& node_ref, std::span<const double> x,
                    const LabelSet& y);
    void update_leaf_observers(TreeNode& leaf, std::span<const double> x, const LabelSet& y);
    void attempt_split(TreeNode& leaf);
    void node_hamming_error(const TreeNode& node, const LabelSet& y, double& error) const;

    struct FeatureSplit {
        double gain = -1.0;
        double threshold = 0.0;
    };
    FeatureSplit best_split_for_feature(const TreeNode& leaf, std::size_t feature,
                                        double node_entropy) const;
};

}  // namespace ihomer
