#pragma once

// Shared domain types for multi-label streams: label sets, instances,
// stream configuration, and cluster-local index mapping.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ihomer {

/// Sparse set of active label indices for one instance.
/// Indices are kept sorted ascending with no duplicates.
class LabelSet {
public:
    LabelSet() = default;

    explicit LabelSet(std::vector<std::uint32_t> indices) : idx_(std::move(indices)) {
        std::sort(idx_.begin(), idx_.end());
        idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    }

    LabelSet(std::initializer_list<std::uint32_t> indices)
        : LabelSet(std::vector<std::uint32_t>(indices)) {}

    /// Positions holding 1 in a binary indicator vector.
    static LabelSet from_indicator(std::span<const std::uint8_t> bits);

    /// Inverse of from_indicator for a label space of size label_count.
    std::vector<std::uint8_t> to_indicator(std::size_t label_count) const;

    const std::vector<std::uint32_t>& indices() const { return idx_; }
    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }

    bool contains(std::uint32_t label) const {
        return std::binary_search(idx_.begin(), idx_.end(), label);
    }

    /// Largest index in the set; throws on empty.
    std::uint32_t max_index() const {
        if (idx_.empty()) throw std::logic_error("max_index on empty LabelSet");
        return idx_.back();
    }

    void insert(std::uint32_t label) {
        auto it = std::lower_bound(idx_.begin(), idx_.end(), label);
        if (it == idx_.end() || *it != label) idx_.insert(it, label);
    }

    LabelSet intersect(const LabelSet& other) const;

    static std::size_t intersection_size(const LabelSet& a, const LabelSet& b);
    static std::size_t union_size(const LabelSet& a, const LabelSet& b);
    /// Number of positions where exactly one of the two sets is active.
    static std::size_t symmetric_difference_size(const LabelSet& a, const LabelSet& b);

    bool operator==(const LabelSet&) const = default;

private:
    std::vector<std::uint32_t> idx_;
};

/// One stream element: a dense feature vector and (when known) its labels.
struct Instance {
    std::vector<double> features;
    std::optional<LabelSet> labels;
};

struct StreamConfig {
    std::size_t label_count = 0;
    std::size_t feature_count = 0;
    bool temporally_ordered = false;
};

/// A cluster of the label space together with its local<->global index map.
/// Local coordinate i maps to global label labels[i].
struct ClusterView {
    std::vector<std::uint32_t> labels;  // sorted global indices, non-empty

    explicit ClusterView(std::vector<std::uint32_t> global_labels)
        : labels(std::move(global_labels)) {
        std::sort(labels.begin(), labels.end());
        if (labels.empty()) throw std::invalid_argument("empty cluster");
    }

    std::size_t size() const { return labels.size(); }

    /// Intersection of s with this cluster, in cluster-local coordinates.
    LabelSet restrict(const LabelSet& s) const;

    /// Maps a cluster-local set back to global indices.
    LabelSet expand(const LabelSet& local) const;
};

}  // namespace ihomer
