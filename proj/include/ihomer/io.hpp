#pragma once

// Dataset ingestion for multi-label benchmark formats (dense and sparse
// ARFF with a companion label XML, plain CSV with trailing binary labels)
// and deterministic synthetic drifting-stream generation.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ihomer/core.hpp"

namespace ihomer::io {

struct DatasetMeta {
    std::string name;
    std::uint64_t instance_count = 0;
    std::size_t feature_count = 0;
    std::size_t label_count = 0;
    double cardinality = 0.0;  // mean labels per instance
    double density = 0.0;      // cardinality / label_count
    double mean_ir = 0.0;      // mean imbalance ratio (reported, not consumed)
    bool temporally_ordered = false;
};

/// Parse failure with the 1-based line it was detected on.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t line)
        : std::runtime_error(message + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// How label attributes are identified inside a file.
struct LabelSpec {
    enum class Kind { kXml, kTrailing, kLeading, kPrefix };
    Kind kind = Kind::kTrailing;
    std::string xml_path;   // kXml: MULAN-style companion file
    std::size_t count = 0;  // kTrailing / kLeading
    std::string prefix;     // kPrefix: attribute-name prefix
};

enum class NominalEncoding { kOneHot, kInteger };

struct LoadedDataset {
    DatasetMeta meta;
    StreamConfig config;
    std::vector<Instance> instances;
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;
};

LoadedDataset load_arff(const std::string& path, const LabelSpec& labels,
                        NominalEncoding encoding = NominalEncoding::kOneHot);

/// Numeric features with trailing binary label columns; a header row is
/// detected and skipped when the first field is not numeric.
LoadedDataset load_csv(const std::string& path, std::size_t trailing_labels);

/// Dense ARFF writer (numeric features, {0,1} label attributes); used for
/// round-trip checks and for exporting generated streams.
void write_arff(const std::string& path, const LoadedDataset& dataset);

/// Pull-based single-consumer stream of instances.
class InstanceStream {
public:
    virtual ~InstanceStream() = default;
    virtual std::optional<Instance> next() = 0;
    virtual const StreamConfig& config() const = 0;
};

/// In-memory stream over a loaded dataset.
class MemoryStream : public InstanceStream {
public:
    explicit MemoryStream(LoadedDataset dataset)
        : dataset_(std::move(dataset)) {}
    std::optional<Instance> next() override {
        if (pos_ >= dataset_.instances.size()) return std::nullopt;
        return dataset_.instances[pos_++];
    }
    const StreamConfig& config() const override { return dataset_.config; }
    const LoadedDataset& dataset() const { return dataset_; }

private:
    LoadedDataset dataset_;
    std::size_t pos_ = 0;
};

struct DriftEvent {
    enum class Kind { kAbrupt, kGradual };
    enum class Affected { kFeatures, kLabelCorrelations, kBoth };
    std::uint64_t position = 0;
    Kind kind = Kind::kAbrupt;
    Affected affected = Affected::kLabelCorrelations;
    std::uint64_t width = 500;  // transition length for gradual drift
};

struct SyntheticSpec {
    enum class Kind { kHypercube, kHypersphere, kCorrelatedBernoulli };
    Kind kind = Kind::kCorrelatedBernoulli;
    std::size_t feature_count = 20;
    std::size_t label_count = 4;
    std::uint64_t instance_count = 10000;
    std::uint64_t seed = 1;
    std::vector<DriftEvent> drift;  // positions strictly increasing

    // correlated-bernoulli shape: labels form equally sized blocks driven by
    // one feature each; similarity targets set the in/out activation rates.
    std::size_t blocks = 2;
    double within_similarity = 0.9;
    double across_similarity = 0.05;

    /// Parses the key-value JSON spec document.
    static SyntheticSpec from_json_file(const std::string& path);

    /// Expected mean label-set cardinality under the generator's law.
    double expected_cardinality() const;
};

/// Generator law for correlated-bernoulli streams: each block is active,
/// independently, when its driving feature exceeds 1 - activation; labels
/// fire at p_in inside active blocks and p_out elsewhere. The three rates
/// realize the stream's within/across similarity targets.
struct BlockRates {
    double activation = 0.3;
    double p_in = 0.9;
    double p_out = 0.02;
    double label_rate() const { return activation * p_in + (1.0 - activation) * p_out; }
};
BlockRates calibrate_block_rates(const SyntheticSpec& spec);

/// Deterministic generator; the same spec and seed always produce the same
/// stream. Correlated-bernoulli streams expose their current ground-truth
/// label blocks so clustering can be validated against them.
class SyntheticStream : public InstanceStream {
public:
    explicit SyntheticStream(SyntheticSpec spec);
    std::optional<Instance> next() override;
    const StreamConfig& config() const override { return config_; }
    const SyntheticSpec& spec() const { return spec_; }

    /// Current label blocks (correlated-bernoulli only), after any drift
    /// events at or before the last emitted instance.
    std::vector<std::vector<std::uint32_t>> current_blocks() const;

private:
    // Everything a drift event is allowed to rewrite.
    struct ConceptState {
        std::vector<std::uint32_t> label_block;   // label -> block id
        std::vector<std::size_t> block_drive;     // block -> driving feature
        std::vector<std::vector<double>> corners;        // hypercube anchors
        std::vector<std::vector<double>> shell_centers;  // hypersphere anchors
    };

    SyntheticSpec spec_;
    StreamConfig config_;
    std::mt19937_64 rng_;
    std::uint64_t emitted_ = 0;

    ConceptState concept_;
    std::optional<ConceptState> pending_;  // new concept during a gradual window
    std::size_t next_event_ = 0;

    BlockRates rates_;
    std::vector<std::array<std::size_t, 3>> shell_dims_;
    double shell_radius_ = 0.0;

    ConceptState drifted_concept(const ConceptState& base, const DriftEvent& event) const;
    Instance draw(const ConceptState& state);
    Instance draw_correlated_bernoulli(const ConceptState& state);
    Instance draw_hypercube(const ConceptState& state);
    Instance draw_hypersphere(const ConceptState& state);
};

/// Computes cardinality/density/MeanIR from instances already in memory.
DatasetMeta compute_meta(const std::string& name, const std::vector<Instance>& instances,
                         std::size_t feature_count, std::size_t label_count,
                         bool temporally_ordered);

}  // namespace ihomer::io
