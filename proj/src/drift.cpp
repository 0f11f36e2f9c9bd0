#include "ihomer/drift.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ihomer {

double hoeffding_epsilon(const HoeffdingParams& p) {
    if (p.range <= 0.0) throw std::invalid_argument("hoeffding range must be > 0");
    if (p.delta <= 0.0 || p.delta >= 1.0) throw std::invalid_argument("delta must be in (0,1)");
    if (p.n < 1) throw std::invalid_argument("n must be >= 1");
    return std::sqrt(p.range * p.range * std::log(1.0 / p.delta) /
                     (2.0 * static_cast<double>(p.n)));
}

double hoeffding_epsilon_tree(std::uint64_t known_label_sets, double delta, std::uint64_t n) {
    if (known_label_sets < 2)
        throw std::invalid_argument("split bound undefined for fewer than 2 known label sets");
    const double range = std::log2(static_cast<double>(known_label_sets));
    return hoeffding_epsilon({range, delta, n});
}

WelchResult welch_t(const ErrorSummary& a, const ErrorSummary& b) {
    if (a.count < 2 || b.count < 2)
        throw std::invalid_argument("welch_t requires both counts >= 2");
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double va = a.variance / na;
    const double vb = b.variance / nb;
    const double diff = a.mean - b.mean;
    if (va + vb <= 0.0) {
        // Both variances zero: identical constants compare equal, otherwise
        // the statistic diverges with the sign of the difference.
        if (diff == 0.0) return {0.0, na + nb - 2.0};
        return {diff > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity(),
                1.0};
    }
    const double t = diff / std::sqrt(va + vb);
    const double dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    return {t, dof};
}

namespace {

// Regularized incomplete beta I_x(a,b) by the Lentz continued fraction.
double ibeta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * ibeta_cf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     ibeta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_tail(double t, double dof) {
    if (dof < 1.0) throw std::invalid_argument("dof must be >= 1");
    if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
    if (t < 0.0) return 1.0 - student_t_tail(-t, dof);
    const double x = dof / (dof + t * t);
    return 0.5 * ibeta(dof / 2.0, 0.5, x);
}

bool welch_significant(double t, double dof, double delta) {
    return student_t_tail(t, dof) < delta;
}

AdwinDetector::AdwinDetector(double delta, double warn_factor) : delta_(delta) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("adwin delta must be in (0,1)");
    warn_delta_ = std::min(warn_factor * delta, 0.9999);
}

void AdwinDetector::reset() {
    rows_.clear();
    width_ = 0;
    total_sum_ = 0.0;
    drift_ = false;
    warning_ = false;
    last_cut_degrading_ = false;
}

double AdwinDetector::mean() const {
    return width_ == 0 ? 0.0 : total_sum_ / static_cast<double>(width_);
}

double AdwinDetector::window_variance_sum() const {
    if (width_ == 0) return 0.0;
    // Combine per-bucket moments with the parallel-axis adjustment.
    double n = 0.0, sum = 0.0, var = 0.0;
    for (std::size_t r = rows_.size(); r-- > 0;) {
        const double cap = static_cast<double>(1ull << r);
        for (const auto& b : rows_[r].buckets) {
            if (n == 0.0) {
                n = cap;
                sum = b.sum;
                var = b.var;
                continue;
            }
            const double mu1 = sum / n, mu2 = b.sum / cap;
            var += b.var + n * cap / (n + cap) * (mu1 - mu2) * (mu1 - mu2);
            sum += b.sum;
            n += cap;
        }
    }
    return var;
}

double AdwinDetector::variance() const {
    return width_ == 0 ? 0.0 : window_variance_sum() / static_cast<double>(width_);
}

void AdwinDetector::insert(double value) {
    if (rows_.empty()) rows_.emplace_back();
    rows_[0].buckets.push_back({value, 0.0});
    width_ += 1;
    total_sum_ += value;
    compress();
}

void AdwinDetector::compress() {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].buckets.size() <= kMaxBucketsPerRow) break;
        if (r + 1 >= rows_.size()) rows_.emplace_back();
        // Merge the two oldest buckets of this row into the next row.
        const double cap = static_cast<double>(1ull << r);
        Bucket a = rows_[r].buckets[0];
        Bucket b = rows_[r].buckets[1];
        rows_[r].buckets.erase(rows_[r].buckets.begin(), rows_[r].buckets.begin() + 2);
        const double mu_a = a.sum / cap, mu_b = b.sum / cap;
        Bucket merged;
        merged.sum = a.sum + b.sum;
        merged.var = a.var + b.var + cap * cap / (2.0 * cap) * (mu_a - mu_b) * (mu_a - mu_b);
        rows_[r + 1].buckets.push_back(merged);
    }
}

void AdwinDetector::drop_oldest_bucket() {
    for (std::size_t r = rows_.size(); r-- > 0;) {
        if (rows_[r].buckets.empty()) continue;
        const double cap = static_cast<double>(1ull << r);
        total_sum_ -= rows_[r].buckets.front().sum;
        width_ -= static_cast<std::uint64_t>(cap);
        rows_[r].buckets.erase(rows_[r].buckets.begin());
        return;
    }
}

bool AdwinDetector::scan_for_cut(double delta, bool shrink) {
    bool cut_found = false;
    bool removed = true;
    while (removed) {
        removed = false;
        if (width_ < 2 * kMinSubWindow) break;
        // Window statistics are refreshed after every drop.
        const double n = static_cast<double>(width_);
        const double sigma2 = window_variance_sum() / n;
        const double dd = std::log(2.0 * std::log(n) / delta);
        double n0 = 0.0, sum0 = 0.0;
        const double total = total_sum_;
        // Walk cut points from the oldest end of the window.
        for (std::size_t r = rows_.size(); r-- > 0;) {
            const double cap = static_cast<double>(1ull << r);
            for (std::size_t i = 0; i < rows_[r].buckets.size(); ++i) {
                n0 += cap;
                sum0 += rows_[r].buckets[i].sum;
                const double n1 = static_cast<double>(width_) - n0;
                if (n0 < kMinSubWindow) continue;
                if (n1 < kMinSubWindow) break;
                const double mu0 = sum0 / n0;
                const double mu1 = (total - sum0) / n1;
                const double m = 1.0 / n0 + 1.0 / n1;
                const double eps_cut = std::sqrt(2.0 * m * sigma2 * dd) + (2.0 / 3.0) * m * dd;
                if (std::fabs(mu0 - mu1) > eps_cut) {
                    if (!cut_found) last_cut_degrading_ = mu1 > mu0;
                    cut_found = true;
                    if (shrink) {
                        drop_oldest_bucket();
                        removed = width_ >= 2 * kMinSubWindow;
                    }
                    goto next_pass;
                }
            }
        }
    next_pass:;
        if (!shrink) break;
    }
    return cut_found;
}

AdwinDetector::Signal AdwinDetector::update(double value) {
    if (value < 0.0 || value > 1.0) throw std::invalid_argument("adwin input must lie in [0,1]");
    insert(value);
    last_cut_degrading_ = false;
    drift_ = scan_for_cut(delta_, /*shrink=*/true);
    // After a drift-level cut the window already reflects the new regime;
    // the warning level is only meaningful short of a confirmed cut.
    warning_ = drift_ || scan_for_cut(warn_delta_, /*shrink=*/false);
    return {drift_, warning_, last_cut_degrading_};
}

}  // namespace ihomer
