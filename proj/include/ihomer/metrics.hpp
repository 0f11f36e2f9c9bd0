#pragma once

// Prequential (test-then-train) evaluation: incremental accumulators for
// subset accuracy, sample accuracy, Hamming loss and micro/macro F1, plus
// the rolling per-instance sample-accuracy series.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ihomer/core.hpp"

namespace ihomer {

struct MetricsReport {
    double subset_accuracy = 0.0;
    double sample_accuracy = 0.0;
    double hamming_loss = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
};

/// Single-writer accumulator advanced one instance at a time.
/// Per-instance sample accuracy is the Jaccard score |truth ∩ pred| /
/// |truth ∪ pred|, defined as 1 when both sets are empty (predicting
/// "no labels" correctly is an exact match).
class PrequentialState {
public:
    explicit PrequentialState(std::size_t label_count, std::size_t rolling_capacity = 500);

    /// Grows the label space; existing counters are preserved.
    void ensure_label_count(std::size_t label_count);

    /// Advances all accumulators by one instance. Throws if either set uses
    /// an index >= label_count (prediction before label registration).
    void update(const LabelSet& truth, const LabelSet& pred);

    /// Snapshot of the five metrics. Throws when no instance has been seen.
    MetricsReport report() const;

    std::uint64_t instances() const { return n_; }
    std::size_t label_count() const { return label_count_; }
    std::uint64_t exact_matches() const { return exact_; }
    std::uint64_t hamming_errors() const { return hamming_errors_; }

    /// Full per-instance sample-accuracy history (source of the rolling series).
    const std::vector<double>& sample_accuracy_history() const { return sample_acc_; }

    /// Most recent values, capped at the configured rolling capacity.
    std::span<const double> rolling_window() const;
    std::size_t rolling_capacity() const { return rolling_capacity_; }

private:
    std::size_t label_count_;
    std::size_t rolling_capacity_;
    std::uint64_t n_ = 0;
    std::uint64_t exact_ = 0;
    std::uint64_t hamming_errors_ = 0;
    double jaccard_sum_ = 0.0;
    std::vector<std::uint64_t> true_pos_;   // per label: truth positives
    std::vector<std::uint64_t> pred_pos_;   // per label: predicted positives
    std::vector<std::uint64_t> tp_;         // per label: both
    std::vector<double> sample_acc_;
};

/// Moving average of per-instance sample accuracy: one value per instance
/// index i >= window-1, averaging the last `window` instances. Empty when
/// fewer than `window` instances have been seen.
std::vector<double> rolling_series(const PrequentialState& state, std::size_t window);

/// Two-column CSV (instance_index, rolling_sample_accuracy); instance_index
/// is the 0-based index of the last instance inside each window.
void write_rolling_csv(const std::string& path, const PrequentialState& state,
                       std::size_t window);

}  // namespace ihomer
