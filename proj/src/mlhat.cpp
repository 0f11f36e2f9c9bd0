#include "ihomer/mlhat.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ihomer {

void GaussianEstimator::observe(double x) {
    if (n_ == 0) {
        min_ = max_ = x;
    } else {
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
    }
    n_ += 1;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double GaussianEstimator::cdf(double x) const {
    if (n_ == 0) return 0.5;
    const double var = variance();
    if (var <= 0.0) return x < mean_ ? 0.0 : 1.0;
    return 0.5 * std::erfc((mean_ - x) / std::sqrt(2.0 * var));
}

TreeNode::TreeNode(std::size_t cluster_size, std::size_t feature_count,
                   const TreeConfig& config)
    : label_pos(cluster_size, 0),
      adwin(config.adwin_delta),
      feature_global(feature_count),
      feature_given(feature_count, std::vector<GaussianEstimator>(cluster_size)) {}

MlhatTree::MlhatTree(std::size_t cluster_size, std::size_t feature_count, TreeConfig config)
    : cluster_size_(cluster_size), feature_count_(feature_count), config_(config) {
    if (cluster_size_ < 1) throw std::invalid_argument("cluster must own at least one label");
    root_ = std::make_unique<TreeNode>(cluster_size_, feature_count_, config_);
}

double MlhatTree::binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double MlhatTree::leaf_entropy(std::span<const std::uint64_t> label_pos, std::uint64_t n) {
    if (n == 0) return 0.0;
    double h = 0.0;
    for (auto pos : label_pos)
        h += binary_entropy(static_cast<double>(pos) / static_cast<double>(n));
    return h;
}

MlhatTree::AltDecision MlhatTree::alternate_decision(double e_main, double e_alt,
                                                     double delta_alt) {
    if (e_main - e_alt > delta_alt) return AltDecision::kReplace;
    if (e_alt - e_main > delta_alt) return AltDecision::kPrune;
    return AltDecision::kContinue;
}

double MlhatTree::epsilon_alt(double e_main, double e_alt, std::uint64_t w_main,
                              std::uint64_t w_alt, double delta_alt) {
    if (w_main == 0 || w_alt == 0) throw std::invalid_argument("window widths must be >= 1");
    const double w = static_cast<double>(w_main);
    const double wp = static_cast<double>(w_alt);
    return std::sqrt(2.0 * e_main * (1.0 - e_alt) * (w + wp) * std::log(2.0 / delta_alt) /
                     (w * wp));
}

std::uint64_t MlhatTree::labelset_key(const LabelSet& y) {
    // splitmix-style combination; deterministic across runs.
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (auto l : y.indices()) {
        std::uint64_t z = (h ^ (static_cast<std::uint64_t>(l) + 0x9e3779b97f4a7c15ull));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        h = z ^ (z >> 31);
    }
    return h;
}

void MlhatTree::node_hamming_error(const TreeNode& node, const LabelSet& y,
                                   double& error) const {
    // The node's own thresholded posterior against the observed labels.
    std::size_t mismatches = 0;
    const double denom = static_cast<double>(node.n) + 2.0;
    for (std::size_t l = 0; l < cluster_size_; ++l) {
        const bool predicted = (static_cast<double>(node.label_pos[l]) + 1.0) / denom > 0.5;
        const bool actual = y.contains(static_cast<std::uint32_t>(l));
        if (predicted != actual) ++mismatches;
    }
    error = static_cast<double>(mismatches) / static_cast<double>(cluster_size_);
}

void MlhatTree::update_leaf_observers(TreeNode& leaf, std::span<const double> x,
                                      const LabelSet& y) {
    for (std::size_t f = 0; f < feature_count_; ++f) {
        leaf.feature_global[f].observe(x[f]);
        for (auto l : y.indices()) leaf.feature_given[f][l].observe(x[f]);
    }
    leaf.labelset_registry.insert(labelset_key(y));
}

void MlhatTree::learn_one(std::span<const double> x, const LabelSet& y_local) {
    if (x.size() != feature_count_) throw std::invalid_argument("feature length mismatch");
    if (!y_local.empty() && y_local.max_index() >= cluster_size_)
        throw std::out_of_range("label outside the tree's cluster");
    learn_node(root_, x, y_local);
}

void MlhatTree::learn_node(std::unique_ptr<TreeNode>& node_ref, std::span<const double> x,
                           const LabelSet& y) {
    TreeNode& node = *node_ref;

    // Prequential node-local error, measured before this instance updates
    // the counters it is about to change.
    double err = 0.0;
    node_hamming_error(node, y, err);
    const auto signal = node.adwin.update(err);

    node.n += 1;
    for (auto l : y.indices()) node.label_pos[l] += 1;

    if (node.alternate) {
        learn_node(node.alternate, x, y);
        if (node.alternate->n >= config_.n_min) {
            const double e_main = node.adwin.mean();
            const double e_alt = node.alternate->adwin.mean();
            node.last_epsilon_alt =
                epsilon_alt(e_main, e_alt, std::max<std::uint64_t>(node.adwin.width(), 1),
                            std::max<std::uint64_t>(node.alternate->adwin.width(), 1),
                            config_.delta_alt);
            switch (alternate_decision(e_main, e_alt, config_.delta_alt)) {
                case AltDecision::kReplace: {
                    // The alternate takes this node's place; the old subtree
                    // is pruned and the promoted detector starts fresh.
                    auto promoted = std::move(node_ref->alternate);
                    node_ref = std::move(promoted);
                    node_ref->adwin.reset();
                    return;  // the promoted subtree already saw this instance
                }
                case AltDecision::kPrune:
                    node.alternate.reset();
                    break;
                case AltDecision::kContinue:
                    break;
            }
        }
    } else if (signal.warning && signal.degrading) {
        node.alternate = std::make_unique<TreeNode>(cluster_size_, feature_count_, config_);
    }

    if (node.is_leaf()) {
        update_leaf_observers(node, x, y);
        if (node.n - node.last_split_eval_n >= config_.n_min) {
            node.last_split_eval_n = node.n;
            attempt_split(node);
        }
        return;
    }
    learn_node(x[node.split_feature] <= node.split_threshold ? node.left : node.right, x, y);
}

MlhatTree::FeatureSplit MlhatTree::best_split_for_feature(const TreeNode& leaf,
                                                          std::size_t feature,
                                                          double node_entropy) const {
    FeatureSplit best;
    const GaussianEstimator& global = leaf.feature_global[feature];
    const double lo = global.min(), hi = global.max();
    if (!(hi > lo)) return best;  // constant feature at this leaf
    const double n = static_cast<double>(leaf.n);
    const std::size_t k = config_.candidate_thresholds;
    for (std::size_t i = 1; i <= k; ++i) {
        const double thr = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k + 1);
        const double n_left = n * global.cdf(thr);
        const double n_right = n - n_left;
        if (n_left < 1e-9 || n_right < 1e-9) continue;
        double h_left = 0.0, h_right = 0.0;
        for (std::size_t l = 0; l < cluster_size_; ++l) {
            const double pos = static_cast<double>(leaf.label_pos[l]);
            const double pos_left =
                pos * (leaf.label_pos[l] ? leaf.feature_given[feature][l].cdf(thr) : 0.0);
            const double p_left = std::clamp(pos_left / n_left, 0.0, 1.0);
            const double p_right = std::clamp((pos - pos_left) / n_right, 0.0, 1.0);
            h_left += binary_entropy(p_left);
            h_right += binary_entropy(p_right);
        }
        const double gain =
            node_entropy - (n_left / n * h_left + n_right / n * h_right);
        if (gain > best.gain) {
            best.gain = gain;
            best.threshold = thr;
        }
    }
    return best;
}

void MlhatTree::attempt_split(TreeNode& leaf) {
    // A node that has seen a single label combination admits no split.
    if (leaf.labelset_registry.size() < 2) return;

    const double node_entropy = leaf_entropy(leaf.label_pos, leaf.n);
    double g_best = -1.0, g_second = -1.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < feature_count_; ++f) {
        const FeatureSplit s = best_split_for_feature(leaf, f, node_entropy);
        if (s.gain > g_best) {
            g_second = g_best;
            g_best = s.gain;
            best_feature = static_cast<int>(f);
            best_threshold = s.threshold;
        } else if (s.gain > g_second) {
            g_second = s.gain;
        }
    }
    if (best_feature < 0 || g_best <= 0.0) return;
    if (g_second < 0.0) g_second = 0.0;

    const double delta_g = g_best - g_second;
    const double eps =
        hoeffding_epsilon_tree(leaf.labelset_registry.size(), config_.delta, leaf.n);
    const bool confident = delta_g > eps;
    const bool tie_forced = eps < config_.tau && delta_g <= config_.tau;
    if (!confident && !tie_forced) return;

    leaf.split_feature = best_feature;
    leaf.split_threshold = best_threshold;
    leaf.split_gain = g_best;
    leaf.left = std::make_unique<TreeNode>(cluster_size_, feature_count_, config_);
    leaf.right = std::make_unique<TreeNode>(cluster_size_, feature_count_, config_);
    // Observers and the registry belong to leaves; drop them on promotion.
    leaf.feature_global.clear();
    leaf.feature_global.shrink_to_fit();
    leaf.feature_given.clear();
    leaf.feature_given.shrink_to_fit();
    leaf.labelset_registry.clear();
}

MlhatTree::Prediction MlhatTree::predict_one(std::span<const double> x) const {
    if (x.size() != feature_count_) throw std::invalid_argument("feature length mismatch");

    // Contributing leaves: the main leaf plus the leaf of every mature
    // alternate hanging off the main path.
    std::vector<const TreeNode*> contributors;
    const TreeNode* node = root_.get();
    while (true) {
        if (node->alternate && node->alternate->n >= config_.n_min) {
            const TreeNode* alt = node->alternate.get();
            while (!alt->is_leaf())
                alt = x[alt->split_feature] <= alt->split_threshold ? alt->left.get()
                                                                    : alt->right.get();
            contributors.push_back(alt);
        }
        if (node->is_leaf()) break;
        node = x[node->split_feature] <= node->split_threshold ? node->left.get()
                                                               : node->right.get();
    }
    const TreeNode* main_leaf = node;

    Prediction out;
    out.scores.assign(cluster_size_, 0.0);
    auto leaf_score = [&](const TreeNode& leaf, std::size_t l) {
        return (static_cast<double>(leaf.label_pos[l]) + 1.0) /
               (static_cast<double>(leaf.n) + 2.0);
    };

    double weight_sum = 0.0;
    const double w_main = 1.0 - main_leaf->adwin.mean();
    if (w_main > 0.0) {
        weight_sum += w_main;
        for (std::size_t l = 0; l < cluster_size_; ++l)
            out.scores[l] += w_main * leaf_score(*main_leaf, l);
    }
    for (const TreeNode* alt_leaf : contributors) {
        const double w = 1.0 - alt_leaf->adwin.mean();
        if (w <= 0.0) continue;
        weight_sum += w;
        for (std::size_t l = 0; l < cluster_size_; ++l)
            out.scores[l] += w * leaf_score(*alt_leaf, l);
    }
    if (weight_sum > 0.0) {
        for (auto& s : out.scores) s /= weight_sum;
    } else {
        for (std::size_t l = 0; l < cluster_size_; ++l)
            out.scores[l] = leaf_score(*main_leaf, l);
    }

    std::vector<std::uint32_t> active;
    for (std::size_t l = 0; l < cluster_size_; ++l)
        if (out.scores[l] > 0.5) active.push_back(static_cast<std::uint32_t>(l));
    out.labels = LabelSet(std::move(active));
    return out;
}

namespace {

std::size_t count_nodes(const TreeNode& node) {
    std::size_t n = 1;
    if (node.alternate) n += count_nodes(*node.alternate);
    if (!node.is_leaf()) n += count_nodes(*node.left) + count_nodes(*node.right);
    return n;
}

std::size_t max_depth(const TreeNode& node) {
    if (node.is_leaf()) return 1;
    return 1 + std::max(max_depth(*node.left), max_depth(*node.right));
}

std::size_t count_alternates(const TreeNode& node) {
    std::size_t n = node.alternate ? 1 + count_alternates(*node.alternate) : 0;
    if (!node.is_leaf()) n += count_alternates(*node.left) + count_alternates(*node.right);
    return n;
}

void node_json(std::ostringstream& os, const TreeNode& node) {
    os << "{\"n\":" << node.n << ",\"positives\":[";
    for (std::size_t i = 0; i < node.label_pos.size(); ++i)
        os << (i ? "," : "") << node.label_pos[i];
    os << "]";
    if (!node.is_leaf()) {
        os << ",\"split_feature\":" << node.split_feature
           << ",\"split_threshold\":" << node.split_threshold
           << ",\"split_gain\":" << node.split_gain << ",\"children\":[";
        node_json(os, *node.left);
        os << ",";
        node_json(os, *node.right);
        os << "]";
    }
    if (node.alternate) {
        os << ",\"alternate\":";
        node_json(os, *node.alternate);
    }
    os << "}";
}

}  // namespace

std::size_t MlhatTree::node_count() const { return count_nodes(*root_); }
std::size_t MlhatTree::depth() const { return max_depth(*root_); }
std::size_t MlhatTree::alternate_count() const { return count_alternates(*root_); }

std::string MlhatTree::to_json() const {
    std::ostringstream os;
    node_json(os, *root_);
    return os.str();
}

}  // namespace ihomer
