#include "ihomer/baselines.hpp"

#include <sstream>
#include <stdexcept>

namespace ihomer {

void MajorityLabelsetLearner::learn_one(std::span<const double>, const LabelSet& y) {
    const auto count = ++counts_[y.indices()];
    if (count > mode_count_ ||
        (count == mode_count_ && y.indices() < mode_.indices())) {
        mode_count_ = count;
        mode_ = y;
    }
}

BinaryRelevanceHoeffding::BinaryRelevanceHoeffding(std::size_t label_count,
                                                   std::size_t feature_count, TreeConfig config,
                                                   int threads)
    : feature_count_(feature_count), config_(config), threads_(threads) {
    trees_.reserve(label_count);
    for (std::size_t l = 0; l < label_count; ++l)
        trees_.push_back(std::make_unique<MlhatTree>(1, feature_count_, config_));
}

LabelSet BinaryRelevanceHoeffding::predict_one(std::span<const double> x) const {
    std::vector<std::uint32_t> on;
    for (std::size_t l = 0; l < trees_.size(); ++l)
        if (!trees_[l]->predict_one(x).labels.empty())
            on.push_back(static_cast<std::uint32_t>(l));
    return LabelSet(std::move(on));
}

void BinaryRelevanceHoeffding::learn_one(std::span<const double> x, const LabelSet& y) {
#ifdef _OPENMP
    if (threads_ > 1 && trees_.size() > 1) {
#pragma omp parallel for schedule(static) num_threads(threads_)
        for (std::size_t l = 0; l < trees_.size(); ++l) {
            const LabelSet local =
                y.contains(static_cast<std::uint32_t>(l)) ? LabelSet({0u}) : LabelSet();
            trees_[l]->learn_one(x, local);
        }
        return;
    }
#endif
    for (std::size_t l = 0; l < trees_.size(); ++l) {
        const LabelSet local =
            y.contains(static_cast<std::uint32_t>(l)) ? LabelSet({0u}) : LabelSet();
        trees_[l]->learn_one(x, local);
    }
}

std::size_t BinaryRelevanceHoeffding::structure_size() const {
    std::size_t total = 0;
    for (const auto& t : trees_) total += t->node_count();
    return total;
}

std::string BinaryRelevanceHoeffding::structure_json() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t l = 0; l < trees_.size(); ++l)
        os << (l ? "," : "") << trees_[l]->to_json();
    os << "]";
    return os.str();
}

std::size_t IhomerLearner::structure_size() const {
    return model_.main().total_tree_nodes();
}

std::unique_ptr<OnlineMultiLabelLearner> make_learner(const std::string& kind,
                                                      std::size_t label_count,
                                                      std::size_t feature_count,
                                                      const IhomerConfig& config) {
    if (kind == "ihomer")
        return std::make_unique<IhomerLearner>(label_count, feature_count, config);
    if (kind == "mlhat-single")
        return std::make_unique<SingleMlhatLearner>(label_count, feature_count, config.tree);
    if (kind == "br-hoeffding")
        return std::make_unique<BinaryRelevanceHoeffding>(label_count, feature_count,
                                                          config.tree, config.threads);
    if (kind == "majority-labelset") return std::make_unique<MajorityLabelsetLearner>();
    throw std::invalid_argument("unknown learner '" + kind + "'");
}

}  // namespace ihomer
