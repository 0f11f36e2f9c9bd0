#pragma once

// Statistical primitives for change-aware decisions: Hoeffding bounds,
// the ADWIN adaptive-window change detector, and Welch's unequal-variance
// t-test with a Student-t tail computed from the regularized incomplete
// beta function.

#include <cstdint>
#include <vector>

namespace ihomer {

struct HoeffdingParams {
    double range = 1.0;   // R > 0
    double delta = 0.05;  // in (0,1)
    std::uint64_t n = 1;  // >= 1
};

/// Hoeffding deviation bound sqrt(R^2 ln(1/delta) / (2n)) for the mean of a
/// variable bounded in range R after n samples, at confidence 1 - delta.
double hoeffding_epsilon(const HoeffdingParams& p);

/// Split-margin bound for a multi-label tree node: the Hoeffding bound with
/// range log2(known_label_sets). Requires known_label_sets >= 2; a node that
/// has seen a single label combination admits no split.
double hoeffding_epsilon_tree(std::uint64_t known_label_sets, double delta, std::uint64_t n);

/// Mean/variance/count summary of the errors held in a monitored window.
struct ErrorSummary {
    double mean = 0.0;
    double variance = 0.0;   // population variance, >= 0
    std::uint64_t count = 0;
};

struct WelchResult {
    double t = 0.0;    // (mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b)
    double dof = 1.0;  // Welch-Satterthwaite degrees of freedom
};

/// Welch's t statistic under unequal variances. Both counts must be >= 2.
/// Degenerate case of two zero variances: t = 0 for equal means, +/-infinity
/// for unequal means (sign of mean_a - mean_b).
WelchResult welch_t(const ErrorSummary& a, const ErrorSummary& b);

/// Upper tail P(T > t) of Student's t with dof degrees of freedom.
double student_t_tail(double t, double dof);

/// One-sided test: true iff P(T > t) < delta.
bool welch_significant(double t, double dof, double delta);

/// ADWIN change detector over values in [0,1], implemented as the standard
/// exponential histogram with a fixed per-row bucket capacity. The window is
/// cut whenever two sub-windows have means that differ beyond the adaptive
/// bound at confidence delta; a softer confidence (warn_factor * delta,
/// clamped below 1) raises the warning flag before the cut level is reached.
class AdwinDetector {
public:
    explicit AdwinDetector(double delta = 0.002, double warn_factor = 10.0);

    struct Signal {
        bool drift = false;
        bool warning = false;
        // At the firing cut, the newer sub-window's mean exceeded the older
        // one's. Alternate-model machinery reacts to degradation only; cuts
        // caused by an improving error are still applied but not escalated.
        bool degrading = false;
    };

    /// Feeds one value; returns the drift/warning state after the update.
    /// On drift the older portion of the window has been dropped.
    Signal update(double value);

    double mean() const;
    double variance() const;  // population variance of the window
    std::uint64_t width() const { return width_; }
    double delta() const { return delta_; }

    bool in_drift() const { return drift_; }
    bool in_warning() const { return warning_; }

    void reset();

    /// Window summary in the shape Welch's test consumes.
    ErrorSummary summary() const { return {mean(), variance(), width()}; }

private:
    // Buckets of row r hold 2^r values each; within a row, oldest first.
    struct Bucket {
        double sum = 0.0;
        double var = 0.0;  // within-bucket sum of squared deviations
    };
    struct Row {
        std::vector<Bucket> buckets;
    };

    static constexpr std::size_t kMaxBucketsPerRow = 5;
    static constexpr std::uint64_t kMinSubWindow = 5;

    double delta_;
    double warn_delta_;
    std::vector<Row> rows_;  // rows_[r]: bucket capacity 2^r
    std::uint64_t width_ = 0;
    double total_sum_ = 0.0;
    bool drift_ = false;
    bool warning_ = false;
    bool last_cut_degrading_ = false;

    void insert(double value);
    void compress();
    void drop_oldest_bucket();
    bool scan_for_cut(double delta, bool shrink);
    double window_variance_sum() const;  // sum of squared deviations over window
};

}  // namespace ihomer
