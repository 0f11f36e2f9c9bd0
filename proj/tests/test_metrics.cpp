#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ihomer/metrics.hpp"

using namespace ihomer;

namespace {

// Independent batch re-computation over a stored (truth, pred) log, written
// straight from the metric definitions: exact-match indicator average,
// slot-mismatch average, per-label F1 averaged over all labels, and the
// globally pooled F1. Shares nothing with the incremental path.
MetricsReport batch_oracle(const std::vector<std::pair<LabelSet, LabelSet>>& log,
                           std::size_t L) {
    const std::size_t n = log.size();
    MetricsReport r;
    double exact = 0.0, mism = 0.0, jacc = 0.0;
    std::vector<double> tp(L, 0), y_pos(L, 0), z_pos(L, 0);
    for (const auto& [truth, pred] : log) {
        const auto y = truth.to_indicator(L);
        const auto z = pred.to_indicator(L);
        bool all_equal = true;
        std::size_t inter = 0, uni = 0;
        for (std::size_t l = 0; l < L; ++l) {
            if (y[l] != z[l]) {
                all_equal = false;
                mism += 1.0;
            }
            if (y[l] && z[l]) {
                inter += 1;
                tp[l] += 1.0;
            }
            if (y[l] || z[l]) uni += 1;
            if (y[l]) y_pos[l] += 1.0;
            if (z[l]) z_pos[l] += 1.0;
        }
        if (all_equal) exact += 1.0;
        jacc += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    }
    r.subset_accuracy = exact / n;
    r.sample_accuracy = jacc / n;
    r.hamming_loss = mism / (static_cast<double>(n) * L);
    double macro = 0.0, tp_sum = 0.0, y_sum = 0.0, z_sum = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        if (y_pos[l] + z_pos[l] > 0.0) macro += 2.0 * tp[l] / (y_pos[l] + z_pos[l]);
        tp_sum += tp[l];
        y_sum += y_pos[l];
        z_sum += z_pos[l];
    }
    r.macro_f1 = macro / static_cast<double>(L);
    r.micro_f1 = y_sum + z_sum == 0.0 ? 0.0 : 2.0 * tp_sum / (y_sum + z_sum);
    return r;
}

LabelSet random_set(std::mt19937_64& rng, std::size_t L, double p) {
    std::vector<std::uint32_t> on;
    std::bernoulli_distribution coin(p);
    for (std::size_t l = 0; l < L; ++l)
        if (coin(rng)) on.push_back(static_cast<std::uint32_t>(l));
    return LabelSet(std::move(on));
}

}  // namespace

TEST_CASE("per-instance update: worked examples") {
    PrequentialState s(3);
    s.update(LabelSet{0, 2}, LabelSet{0, 2});
    CHECK(s.exact_matches() == 1);
    CHECK(s.hamming_errors() == 0);
    CHECK(s.sample_accuracy_history().back() == doctest::Approx(1.0));

    s.update(LabelSet{0, 2}, LabelSet{0});
    CHECK(s.exact_matches() == 1);
    CHECK(s.hamming_errors() == 1);
    // Jaccard |{0}| / |{0,2}| by hand
    CHECK(s.sample_accuracy_history().back() == doctest::Approx(0.5));

    PrequentialState s5(5);
    s5.update(LabelSet{}, LabelSet{});
    CHECK(s5.exact_matches() == 1);
    CHECK(s5.sample_accuracy_history().back() == doctest::Approx(1.0));  // empty/empty
}

TEST_CASE("update rejects unregistered labels") {
    PrequentialState s(2);
    CHECK_THROWS_AS(s.update(LabelSet{5}, LabelSet{}), std::out_of_range);
    CHECK_THROWS_AS(s.update(LabelSet{}, LabelSet{2}), std::out_of_range);
    s.ensure_label_count(6);
    s.update(LabelSet{5}, LabelSet{});
    CHECK(s.instances() == 1);
}

TEST_CASE("report: single perfect instance") {
    PrequentialState s(2);
    s.update(LabelSet{0}, LabelSet{0});
    const auto r = s.report();
    CHECK(r.subset_accuracy == doctest::Approx(1.0));
    CHECK(r.sample_accuracy == doctest::Approx(1.0));
    CHECK(r.hamming_loss == doctest::Approx(0.0));
    CHECK(r.micro_f1 == doctest::Approx(1.0));
    // label 1 never seen/predicted contributes 0 to the macro average
    CHECK(r.macro_f1 == doctest::Approx(0.5));
}

TEST_CASE("report: two-instance hand-derived batch") {
    // (truth {0}, pred {1}), (truth {1}, pred {1}) over L = 2:
    // instance 1 mismatches both slots, instance 2 none.
    PrequentialState s(2);
    s.update(LabelSet{0}, LabelSet{1});
    s.update(LabelSet{1}, LabelSet{1});
    const auto r = s.report();
    CHECK(r.subset_accuracy == doctest::Approx(0.5));
    CHECK(r.hamming_loss == doctest::Approx(0.5));  // 2 of 4 slots
    CHECK(r.micro_f1 == doctest::Approx(2.0 * 1.0 / (2.0 + 2.0)));
    const auto oracle =
        batch_oracle({{LabelSet{0}, LabelSet{1}}, {LabelSet{1}, LabelSet{1}}}, 2);
    CHECK(r.subset_accuracy == doctest::Approx(oracle.subset_accuracy).epsilon(1e-15));
    CHECK(r.hamming_loss == doctest::Approx(oracle.hamming_loss).epsilon(1e-15));
    CHECK(r.micro_f1 == doctest::Approx(oracle.micro_f1).epsilon(1e-15));
    CHECK(r.macro_f1 == doctest::Approx(oracle.macro_f1).epsilon(1e-15));
    CHECK(r.sample_accuracy == doctest::Approx(oracle.sample_accuracy).epsilon(1e-15));
}

TEST_CASE("report on empty evaluation throws") {
    PrequentialState s(3);
    CHECK_THROWS_AS(s.report(), std::logic_error);
}

TEST_CASE("incremental report equals the batch oracle on random streams") {
    std::mt19937_64 rng(20240607);
    std::uniform_int_distribution<std::size_t> label_count(2, 30);
    std::uniform_real_distribution<double> rate(0.05, 0.6);
    for (int stream = 0; stream < 1000; ++stream) {
        const std::size_t L = label_count(rng);
        const double p_truth = rate(rng), p_pred = rate(rng);
        PrequentialState s(L);
        std::vector<std::pair<LabelSet, LabelSet>> log;
        for (int i = 0; i < 500; ++i) {
            auto truth = random_set(rng, L, p_truth);
            auto pred = random_set(rng, L, p_pred);
            s.update(truth, pred);
            log.emplace_back(std::move(truth), std::move(pred));
        }
        const auto inc = s.report();
        const auto bat = batch_oracle(log, L);
        CHECK(inc.subset_accuracy == doctest::Approx(bat.subset_accuracy).epsilon(1e-12));
        CHECK(inc.sample_accuracy == doctest::Approx(bat.sample_accuracy).epsilon(1e-12));
        CHECK(inc.hamming_loss == doctest::Approx(bat.hamming_loss).epsilon(1e-12));
        CHECK(inc.micro_f1 == doctest::Approx(bat.micro_f1).epsilon(1e-12));
        CHECK(inc.macro_f1 == doctest::Approx(bat.macro_f1).epsilon(1e-12));
    }
}

TEST_CASE("exact match implies per-instance sample accuracy 1 and no hamming errors") {
    std::mt19937_64 rng(3);
    PrequentialState s(8);
    for (int i = 0; i < 2000; ++i) {
        const auto truth = random_set(rng, 8, 0.3);
        const bool echo = rng() % 2 == 0;
        const auto pred = echo ? truth : random_set(rng, 8, 0.3);
        const auto errors_before = s.hamming_errors();
        s.update(truth, pred);
        if (truth == pred) {
            CHECK(s.sample_accuracy_history().back() == doctest::Approx(1.0));
            CHECK(s.hamming_errors() == errors_before);
        }
        const auto r = s.report();
        CHECK(r.micro_f1 >= 0.0);
        CHECK(r.micro_f1 <= 1.0);
    }
}

TEST_CASE("rolling series: hand-computed moving average") {
    PrequentialState s(2);
    // craft per-instance sample accuracies [1, 0, 1, 1]
    s.update(LabelSet{0}, LabelSet{0});
    s.update(LabelSet{0}, LabelSet{1});
    s.update(LabelSet{1}, LabelSet{1});
    s.update(LabelSet{0}, LabelSet{0});
    const auto series = rolling_series(s, 2);
    REQUIRE(series.size() == 3);
    CHECK(series[0] == doctest::Approx(0.5));
    CHECK(series[1] == doctest::Approx(0.5));
    CHECK(series[2] == doctest::Approx(1.0));
}

TEST_CASE("rolling series: constant stream and short stream") {
    PrequentialState s(2);
    for (int i = 0; i < 20; ++i) s.update(LabelSet{0}, LabelSet{0});
    for (const double v : rolling_series(s, 7)) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rolling_series(s, 21).empty());
    CHECK(rolling_series(s, 20).size() == 1);
}

TEST_CASE("rolling window view respects its capacity") {
    PrequentialState s(2, 10);
    for (int i = 0; i < 25; ++i) s.update(LabelSet{0}, LabelSet{0});
    CHECK(s.rolling_window().size() == 10);
    CHECK(s.rolling_capacity() == 10);
}

TEST_CASE("rolling csv export") {
    PrequentialState s(2);
    for (int i = 0; i < 5; ++i) s.update(LabelSet{0}, LabelSet{i % 2 ? 0u : 1u});
    const auto path = std::filesystem::temp_directory_path() / "mlstream_rolling_test.csv";
    write_rolling_csv(path.string(), s, 3);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "instance_index,rolling_sample_accuracy");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);  // max(0, n - window + 1)
    std::filesystem::remove(path);
}
