#include "ihomer/label_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ihomer/drift.hpp"

namespace ihomer {

namespace {
// Jaccard dissimilarity is bounded in [0,1], so the cluster bound uses R = 1.
double cluster_epsilon(double delta, std::uint64_t n) {
    return hoeffding_epsilon({1.0, delta, n});
}
}  // namespace

CooccurrenceStats::CooccurrenceStats(std::size_t label_count) : label_count_(0) {
    ensure_label_count(label_count);
}

void CooccurrenceStats::ensure_label_count(std::size_t label_count) {
    if (label_count <= label_count_) return;
    label_count_ = label_count;
    presence_.resize(label_count, 0);
    both_.resize(label_count * (label_count - 1) / 2, 0);
}

void CooccurrenceStats::observe(const LabelSet& y) {
    if (!y.empty() && y.max_index() >= label_count_) ensure_label_count(y.max_index() + 1);
    const auto& idx = y.indices();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        presence_[idx[i]] += 1;
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            both_[pair_index(idx[i], idx[j])] += 1;
    }
    size_hist_[idx.size()] += 1;
    n_ += 1;
}

std::uint64_t CooccurrenceStats::both_count(std::uint32_t p, std::uint32_t q) const {
    if (p == q || p >= label_count_ || q >= label_count_)
        throw std::out_of_range("invalid label pair");
    if (p > q) std::swap(p, q);
    return both_[pair_index(p, q)];
}

std::uint64_t CooccurrenceStats::only_first_count(std::uint32_t p, std::uint32_t q) const {
    return presence_.at(p) - both_count(p, q);
}

double CooccurrenceStats::dissimilarity(std::uint32_t p, std::uint32_t q) const {
    const std::uint64_t a = both_count(p, q);
    const std::uint64_t denom = presence_[p] + presence_[q] - a;  // a + b + c
    if (denom == 0) return 1.0;
    return 1.0 - static_cast<double>(a) / static_cast<double>(denom);
}

void PairWindow::reset(const std::vector<std::uint32_t>& labels) {
    labels_ = labels;
    presence_.assign(labels_.size(), 0);
    both_.assign(labels_.size() * (labels_.size() - 1) / 2, 0);
    n_ = 0;
}

void PairWindow::add_label(std::uint32_t label) {
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it != labels_.end() && *it == label) return;
    // Rebuild the triangle with the label inserted; existing pair counts are
    // remapped, the new label starts with no evidence.
    const std::size_t pos = static_cast<std::size_t>(it - labels_.begin());
    std::vector<std::uint32_t> new_labels = labels_;
    new_labels.insert(new_labels.begin() + pos, label);
    std::vector<std::uint64_t> new_presence(new_labels.size(), 0);
    std::vector<std::uint64_t> new_both(new_labels.size() * (new_labels.size() - 1) / 2, 0);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const std::size_t ni = i < pos ? i : i + 1;
        new_presence[ni] = presence_[i];
        for (std::size_t j = i + 1; j < labels_.size(); ++j) {
            const std::size_t nj = j < pos ? j : j + 1;
            new_both[pair_index(std::min(ni, nj), std::max(ni, nj))] =
                both_[pair_index(i, j)];
        }
    }
    labels_ = std::move(new_labels);
    presence_ = std::move(new_presence);
    both_ = std::move(new_both);
}

void PairWindow::observe(const LabelSet& y) {
    n_ += 1;
    // local indices of the owned labels present in y
    std::vector<std::size_t> active;
    std::size_t i = 0, j = 0;
    const auto& g = y.indices();
    while (i < g.size() && j < labels_.size()) {
        if (g[i] < labels_[j]) ++i;
        else if (labels_[j] < g[i]) ++j;
        else {
            active.push_back(j);
            ++i;
            ++j;
        }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
        presence_[active[a]] += 1;
        for (std::size_t b = a + 1; b < active.size(); ++b)
            both_[pair_index(active[a], active[b])] += 1;
    }
}

std::size_t PairWindow::local_index(std::uint32_t label) const {
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label)
        throw std::out_of_range("label not owned by this window");
    return static_cast<std::size_t>(it - labels_.begin());
}

double PairWindow::dissimilarity(std::uint32_t p, std::uint32_t q) const {
    std::size_t lp = local_index(p), lq = local_index(q);
    if (lp == lq) throw std::invalid_argument("dissimilarity of a label with itself");
    if (lp > lq) std::swap(lp, lq);
    const std::uint64_t a = both_[pair_index(lp, lq)];
    const std::uint64_t denom = presence_[lp] + presence_[lq] - a;
    if (denom == 0) return 1.0;
    return 1.0 - static_cast<double>(a) / static_cast<double>(denom);
}

double PairWindow::diameter() const {
    double max_d = 0.0;
    for (std::size_t p = 0; p < labels_.size(); ++p)
        for (std::size_t q = p + 1; q < labels_.size(); ++q) {
            const std::uint64_t a = both_[pair_index(p, q)];
            const std::uint64_t denom = presence_[p] + presence_[q] - a;
            const double d =
                denom == 0 ? 1.0 : 1.0 - static_cast<double>(a) / static_cast<double>(denom);
            max_d = std::max(max_d, d);
        }
    return max_d;
}

ClusterHierarchy::ClusterHierarchy(std::size_t label_count, ClusterConfig config)
    : config_(config), label_count_(label_count) {
    if (label_count < 1) throw std::invalid_argument("label count must be >= 1");
    root_ = std::make_unique<ClusterNode>();
    root_->labels.resize(label_count);
    for (std::size_t i = 0; i < label_count; ++i)
        root_->labels[i] = static_cast<std::uint32_t>(i);
    root_->window.reset(root_->labels);
}

void ClusterHierarchy::add_label(std::uint32_t label, const CooccurrenceStats& stats) {
    if (label < label_count_) return;
    label_count_ = label + 1;
    ClusterNode* node = root_.get();
    while (true) {
        node->labels.insert(
            std::lower_bound(node->labels.begin(), node->labels.end(), label), label);
        node->window.add_label(label);
        if (node->is_leaf()) break;
        // Descend toward the child whose labels sit closer on average; with
        // no evidence yet every dissimilarity is the prior, so ties go left.
        auto mean_dissim = [&](const ClusterNode& c) {
            double sum = 0.0;
            for (auto l : c.labels)
                sum += l == label ? 0.0
                       : (std::max(l, label) < stats.label_count()
                              ? stats.dissimilarity(l, label)
                              : 1.0);
            return sum / static_cast<double>(c.labels.size());
        };
        node = mean_dissim(*node->left) <= mean_dissim(*node->right) ? node->left.get()
                                                                     : node->right.get();
    }
}

void ClusterHierarchy::observe(const LabelSet& y) {
    std::vector<ClusterNode*> stack{root_.get()};
    while (!stack.empty()) {
        ClusterNode* node = stack.back();
        stack.pop_back();
        node->window.observe(y);
        if (!node->is_leaf()) {
            stack.push_back(node->right.get());
            stack.push_back(node->left.get());
        }
    }
}

bool ClusterHierarchy::split_criterion(double d1, double d0, double d_mean, double epsilon) {
    const double spread = d1 - d0;
    const double denom = std::fabs(d1 + d0 - 2.0 * d_mean);
    if (denom == 0.0) return spread > 0.0;
    return spread / denom > epsilon;
}

bool ClusterHierarchy::aggregate_criterion(double parent_diam, double left_diam,
                                           double right_diam, double epsilon) {
    return 2.0 * parent_diam - (left_diam + right_diam) < epsilon;
}

bool ClusterHierarchy::try_split(ClusterNode& leaf) {
    if (!leaf.is_leaf() || leaf.labels.size() < 2) return false;
    if (leaf.n_active() < config_.n_min) return false;

    // Materialize the pairwise dissimilarities for this leaf only.
    const auto& ls = leaf.labels;
    double d1 = -1.0, d0 = std::numeric_limits<double>::infinity(), sum = 0.0;
    std::size_t pivot_i = 0, pivot_j = 1;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        for (std::size_t j = i + 1; j < ls.size(); ++j) {
            const double d = leaf.window.dissimilarity(ls[i], ls[j]);
            sum += d;
            ++pairs;
            d0 = std::min(d0, d);
            if (d > d1) {  // strict: ties keep the lexicographically first pair
                d1 = d;
                pivot_i = i;
                pivot_j = j;
            }
        }
    }
    leaf.d1 = d1;
    leaf.d0 = d0;
    leaf.d_mean = sum / static_cast<double>(pairs);
    leaf.epsilon = cluster_epsilon(config_.delta, leaf.n_active());

    if (!split_criterion(leaf.d1, leaf.d0, leaf.d_mean, leaf.epsilon)) return false;

    const std::uint32_t pivot_a = ls[pivot_i];  // pivot_a < pivot_b
    const std::uint32_t pivot_b = ls[pivot_j];
    auto left = std::make_unique<ClusterNode>();
    auto right = std::make_unique<ClusterNode>();
    left->labels.push_back(pivot_a);
    right->labels.push_back(pivot_b);
    for (auto l : ls) {
        if (l == pivot_a || l == pivot_b) continue;
        const double da = leaf.window.dissimilarity(l, pivot_a);
        const double db = leaf.window.dissimilarity(l, pivot_b);
        // Equidistant labels join the lower-indexed pivot for determinism.
        ClusterNode& side = da <= db ? *left : *right;
        side.labels.insert(std::lower_bound(side.labels.begin(), side.labels.end(), l), l);
    }
    left->parent = &leaf;
    right->parent = &leaf;
    left->window.reset(left->labels);    // children start fresh
    right->window.reset(right->labels);
    leaf.n_at_split = leaf.n_active();
    leaf.left = std::move(left);
    leaf.right = std::move(right);
    return true;
}

bool ClusterHierarchy::try_aggregate(ClusterNode& leaf) {
    ClusterNode* parent = leaf.parent;
    if (!parent) return false;  // root has no parent
    ClusterNode* sibling =
        parent->left.get() == &leaf ? parent->right.get() : parent->left.get();
    if (!sibling->is_leaf()) return false;  // only sibling leaves aggregate
    if (parent->n_at_split < 1) return false;  // no accumulated evidence at the parent

    const double eps = cluster_epsilon(config_.delta, parent->n_at_split);
    const double parent_diam = parent->window.diameter();
    const double leaf_diam = leaf.window.diameter();
    const double sib_diam = sibling->window.diameter();
    if (!aggregate_criterion(parent_diam, leaf_diam, sib_diam, eps)) return false;

    parent->left.reset();
    parent->right.reset();
    // The re-aggregated node starts over with fresh statistical summaries;
    // only future observations inform its internal structure.
    parent->window.reset(parent->labels);
    parent->n_at_split = 0;
    parent->last_test_n = 0;
    parent->tested = false;
    parent->d1 = parent->d0 = parent->d_mean = parent->epsilon = 0.0;
    return true;
}

ClusterNode* ClusterHierarchy::find_due_leaf(ClusterNode& node) {
    if (node.is_leaf()) {
        const bool due = node.n_active() >= config_.n_min &&
                         node.n_active() - node.last_test_n >= config_.n_min;
        return due ? &node : nullptr;
    }
    if (ClusterNode* found = find_due_leaf(*node.left)) return found;
    return find_due_leaf(*node.right);
}

bool ClusterHierarchy::run_structure_tests() {
    bool changed = false;
    // Leaves are tested one at a time; each test may rewrite the tree, so
    // the scan restarts from the root until no leaf is due.
    while (ClusterNode* leaf = find_due_leaf(*root_)) {
        leaf->last_test_n = leaf->n_active();
        leaf->tested = true;
        if (leaf->labels.size() >= 2 && try_split(*leaf)) {
            changed = true;
            continue;
        }
        if (try_aggregate(*leaf)) changed = true;
    }
    return changed;
}

void ClusterHierarchy::collect_leaves(const ClusterNode& node,
                                      std::vector<std::vector<std::uint32_t>>& out) const {
    if (node.is_leaf()) {
        out.push_back(node.labels);
        return;
    }
    collect_leaves(*node.left, out);
    collect_leaves(*node.right, out);
}

std::vector<std::vector<std::uint32_t>> ClusterHierarchy::leaves() const {
    std::vector<std::vector<std::uint32_t>> out;
    collect_leaves(*root_, out);
    return out;
}

std::vector<std::vector<std::uint32_t>> ClusterHierarchy::balanced_partition(
    const std::map<std::size_t, std::uint64_t>& labelset_size_histogram) const {
    // Minimum safe cluster size = most common non-empty labelset cardinality.
    std::size_t min_size = 1;
    std::uint64_t best_count = 0;
    for (const auto& [size, count] : labelset_size_histogram) {
        if (size == 0) continue;
        if (count > best_count) {  // ties keep the smaller size
            best_count = count;
            min_size = size;
        }
    }

    std::vector<std::vector<std::uint32_t>> out;
    std::vector<const ClusterNode*> stack{root_.get()};
    while (!stack.empty()) {
        const ClusterNode* node = stack.back();
        stack.pop_back();
        if (node->is_leaf() || node->left->labels.size() < min_size ||
            node->right->labels.size() < min_size) {
            out.push_back(node->labels);
        } else {
            stack.push_back(node->right.get());
            stack.push_back(node->left.get());
        }
    }
    return out;
}

std::string ClusterHierarchy::to_json() const {
    std::ostringstream os;
    struct Writer {
        static void node(std::ostringstream& os, const ClusterNode& n) {
            os << "{\"labels\":[";
            for (std::size_t i = 0; i < n.labels.size(); ++i)
                os << (i ? "," : "") << n.labels[i];
            os << "],\"n_active\":" << n.n_active();
            if (!n.is_leaf()) {
                os << ",\"children\":[";
                node(os, *n.left);
                os << ",";
                node(os, *n.right);
                os << "]";
            }
            os << "}";
        }
    };
    Writer::node(os, *root_);
    return os.str();
}

}  // namespace ihomer
