#pragma once

// Online multi-label learner interface plus the comparison baselines:
// binary-relevance Hoeffding trees, a single global tree, and the
// majority-labelset floor.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ihomer/core.hpp"
#include "ihomer/ihomer.hpp"
#include "ihomer/mlhat.hpp"

namespace ihomer {

class OnlineMultiLabelLearner {
public:
    virtual ~OnlineMultiLabelLearner() = default;
    virtual LabelSet predict_one(std::span<const double> x) const = 0;
    virtual void learn_one(std::span<const double> x, const LabelSet& y) = 0;
    virtual std::string name() const = 0;
    /// Rough structural size: nodes across all trees (0 for stateless floors).
    virtual std::size_t structure_size() const { return 0; }
    virtual std::string structure_json() const { return "{}"; }
};

/// Predicts the most frequent exact label set seen so far; ties break to the
/// lexicographically smallest set for reproducibility.
class MajorityLabelsetLearner : public OnlineMultiLabelLearner {
public:
    LabelSet predict_one(std::span<const double>) const override { return mode_; }
    void learn_one(std::span<const double>, const LabelSet& y) override;
    std::string name() const override { return "majority-labelset"; }

private:
    std::map<std::vector<std::uint32_t>, std::uint64_t> counts_;
    LabelSet mode_;
    std::uint64_t mode_count_ = 0;
};

/// One independent single-label tree per label (problem transformation).
class BinaryRelevanceHoeffding : public OnlineMultiLabelLearner {
public:
    BinaryRelevanceHoeffding(std::size_t label_count, std::size_t feature_count,
                             TreeConfig config, int threads = 1);
    LabelSet predict_one(std::span<const double> x) const override;
    void learn_one(std::span<const double> x, const LabelSet& y) override;
    std::string name() const override { return "br-hoeffding"; }
    std::size_t structure_size() const override;
    std::string structure_json() const override;

private:
    std::size_t feature_count_;
    TreeConfig config_;
    int threads_;
    std::vector<std::unique_ptr<MlhatTree>> trees_;  // one per label
};

/// A single global tree over the whole label space.
class SingleMlhatLearner : public OnlineMultiLabelLearner {
public:
    SingleMlhatLearner(std::size_t label_count, std::size_t feature_count, TreeConfig config)
        : tree_(label_count, feature_count, config) {}
    LabelSet predict_one(std::span<const double> x) const override {
        return tree_.predict_one(x).labels;
    }
    void learn_one(std::span<const double> x, const LabelSet& y) override {
        tree_.learn_one(x, y);
    }
    std::string name() const override { return "mlhat-single"; }
    std::size_t structure_size() const override { return tree_.node_count(); }
    std::string structure_json() const override { return tree_.to_json(); }
    const MlhatTree& tree() const { return tree_; }

private:
    MlhatTree tree_;
};

class IhomerLearner : public OnlineMultiLabelLearner {
public:
    IhomerLearner(std::size_t label_count, std::size_t feature_count, IhomerConfig config)
        : model_(label_count, feature_count, std::move(config)) {}
    LabelSet predict_one(std::span<const double> x) const override {
        return model_.predict_one(x);
    }
    void learn_one(std::span<const double> x, const LabelSet& y) override {
        model_.learn_one(x, y);
    }
    std::string name() const override { return "ihomer"; }
    std::size_t structure_size() const override;
    std::string structure_json() const override { return model_.to_json(); }
    const IhomerModel& model() const { return model_; }

private:
    IhomerModel model_;
};

/// Factory for the CLI's learner names; throws on unknown kinds.
std::unique_ptr<OnlineMultiLabelLearner> make_learner(const std::string& kind,
                                                      std::size_t label_count,
                                                      std::size_t feature_count,
                                                      const IhomerConfig& config);

}  // namespace ihomer
