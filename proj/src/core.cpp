#include "ihomer/core.hpp"

namespace ihomer {

LabelSet LabelSet::from_indicator(std::span<const std::uint8_t> bits) {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1)
            throw std::invalid_argument("indicator entries must be 0 or 1");
        if (bits[i]) idx.push_back(static_cast<std::uint32_t>(i));
    }
    LabelSet s;
    s.idx_ = std::move(idx);  // already sorted unique
    return s;
}

std::vector<std::uint8_t> LabelSet::to_indicator(std::size_t label_count) const {
    std::vector<std::uint8_t> bits(label_count, 0);
    for (auto i : idx_) {
        if (i >= label_count) throw std::out_of_range("label index beyond indicator length");
        bits[i] = 1;
    }
    return bits;
}

LabelSet LabelSet::intersect(const LabelSet& other) const {
    std::vector<std::uint32_t> out;
    std::set_intersection(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                          std::back_inserter(out));
    LabelSet s;
    s.idx_ = std::move(out);
    return s;
}

std::size_t LabelSet::intersection_size(const LabelSet& a, const LabelSet& b) {
    std::size_t count = 0, i = 0, j = 0;
    const auto& x = a.idx_;
    const auto& y = b.idx_;
    while (i < x.size() && j < y.size()) {
        if (x[i] < y[j]) ++i;
        else if (y[j] < x[i]) ++j;
        else { ++count; ++i; ++j; }
    }
    return count;
}

std::size_t LabelSet::union_size(const LabelSet& a, const LabelSet& b) {
    return a.size() + b.size() - intersection_size(a, b);
}

std::size_t LabelSet::symmetric_difference_size(const LabelSet& a, const LabelSet& b) {
    return union_size(a, b) - intersection_size(a, b);
}

LabelSet ClusterView::restrict(const LabelSet& s) const {
    std::vector<std::uint32_t> local;
    std::size_t i = 0, j = 0;
    const auto& g = s.indices();
    while (i < g.size() && j < labels.size()) {
        if (g[i] < labels[j]) ++i;
        else if (labels[j] < g[i]) ++j;
        else {
            local.push_back(static_cast<std::uint32_t>(j));
            ++i;
            ++j;
        }
    }
    return LabelSet(std::move(local));
}

LabelSet ClusterView::expand(const LabelSet& local) const {
    std::vector<std::uint32_t> global;
    global.reserve(local.size());
    for (auto i : local.indices()) {
        if (i >= labels.size()) throw std::out_of_range("local index beyond cluster size");
        global.push_back(labels[i]);
    }
    return LabelSet(std::move(global));
}

}  // namespace ihomer
