#include "ihomer/metrics.hpp"

#include <fstream>
#include <stdexcept>

namespace ihomer {

PrequentialState::PrequentialState(std::size_t label_count, std::size_t rolling_capacity)
    : label_count_(label_count),
      rolling_capacity_(rolling_capacity),
      true_pos_(label_count, 0),
      pred_pos_(label_count, 0),
      tp_(label_count, 0) {
    if (rolling_capacity_ == 0) throw std::invalid_argument("rolling capacity must be >= 1");
}

void PrequentialState::ensure_label_count(std::size_t label_count) {
    if (label_count <= label_count_) return;
    label_count_ = label_count;
    true_pos_.resize(label_count, 0);
    pred_pos_.resize(label_count, 0);
    tp_.resize(label_count, 0);
}

void PrequentialState::update(const LabelSet& truth, const LabelSet& pred) {
    if ((!truth.empty() && truth.max_index() >= label_count_) ||
        (!pred.empty() && pred.max_index() >= label_count_))
        throw std::out_of_range("label index beyond registered label count");

    const std::size_t inter = LabelSet::intersection_size(truth, pred);
    const std::size_t uni = LabelSet::union_size(truth, pred);

    n_ += 1;
    if (truth == pred) exact_ += 1;
    hamming_errors_ += uni - inter;

    for (auto l : truth.indices()) true_pos_[l] += 1;
    for (auto l : pred.indices()) pred_pos_[l] += 1;
    const LabelSet both = truth.intersect(pred);
    for (auto l : both.indices()) tp_[l] += 1;

    const double sample_acc = uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    jaccard_sum_ += sample_acc;
    sample_acc_.push_back(sample_acc);
}

MetricsReport PrequentialState::report() const {
    if (n_ == 0) throw std::logic_error("report on empty evaluation");
    MetricsReport r;
    const double n = static_cast<double>(n_);
    r.subset_accuracy = static_cast<double>(exact_) / n;
    r.sample_accuracy = jaccard_sum_ / n;
    r.hamming_loss = static_cast<double>(hamming_errors_) /
                     (n * static_cast<double>(label_count_));

    std::uint64_t tp_total = 0, true_total = 0, pred_total = 0;
    double macro_sum = 0.0;
    for (std::size_t l = 0; l < label_count_; ++l) {
        tp_total += tp_[l];
        true_total += true_pos_[l];
        pred_total += pred_pos_[l];
        const std::uint64_t denom = true_pos_[l] + pred_pos_[l];
        // Labels never seen and never predicted contribute 0; the average
        // still divides by the full label count.
        if (denom > 0) macro_sum += 2.0 * static_cast<double>(tp_[l]) / denom;
    }
    r.macro_f1 = label_count_ == 0 ? 0.0 : macro_sum / static_cast<double>(label_count_);
    const std::uint64_t micro_denom = true_total + pred_total;
    r.micro_f1 = micro_denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp_total) / micro_denom;
    return r;
}

std::span<const double> PrequentialState::rolling_window() const {
    const std::size_t len = std::min(sample_acc_.size(), rolling_capacity_);
    return {sample_acc_.data() + (sample_acc_.size() - len), len};
}

std::vector<double> rolling_series(const PrequentialState& state, std::size_t window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    const auto& values = state.sample_accuracy_history();
    std::vector<double> out;
    if (values.size() < window) return out;
    out.reserve(values.size() - window + 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += values[i];
        if (i + 1 > window) acc -= values[i - window];
        if (i + 1 >= window) out.push_back(acc / static_cast<double>(window));
    }
    return out;
}

void write_rolling_csv(const std::string& path, const PrequentialState& state,
                       std::size_t window) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "instance_index,rolling_sample_accuracy\n";
    const auto series = rolling_series(state, window);
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10f\n", i + window - 1, series[i]);
        out << buf;
    }
}

}  // namespace ihomer
