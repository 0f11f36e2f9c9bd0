#include "ihomer/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace ihomer::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"')))
        return s.substr(1, s.size() - 2);
    return s;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(trim(field));
    return out;
}

struct ArffAttribute {
    std::string name;
    bool nominal = false;
    std::vector<std::string> values;  // nominal only
    bool is_label = false;
};

// MULAN companion files are flat: a <labels> root with <label name="..."/>
// children. A tolerant scan for the name attributes is all that is needed.
std::vector<std::string> parse_label_xml(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label XML " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::vector<std::string> names;
    std::size_t pos = 0;
    while ((pos = text.find("<label", pos)) != std::string::npos) {
        const std::size_t close = text.find('>', pos);
        if (close == std::string::npos) break;
        const std::string tag = text.substr(pos, close - pos);
        const std::size_t name_at = tag.find("name=");
        if (name_at != std::string::npos) {
            const char quote = tag[name_at + 5];
            const std::size_t start = name_at + 6;
            const std::size_t end = tag.find(quote, start);
            if (end != std::string::npos) names.push_back(tag.substr(start, end - start));
        }
        pos = close + 1;
    }
    if (names.empty()) throw std::runtime_error("no <label name=...> entries in " + path);
    return names;
}

double binary_label_value(const std::string& raw, std::size_t line_no) {
    if (raw == "?") return 0.0;  // missing labels are imputed as zero
    double v = 0.0;
    if (!parse_double(raw, v) || (v != 0.0 && v != 1.0))
        throw ParseError("non-binary label value '" + raw + "'", line_no);
    return v;
}

}  // namespace

DatasetMeta compute_meta(const std::string& name, const std::vector<Instance>& instances,
                         std::size_t feature_count, std::size_t label_count,
                         bool temporally_ordered) {
    DatasetMeta meta;
    meta.name = name;
    meta.instance_count = instances.size();
    meta.feature_count = feature_count;
    meta.label_count = label_count;
    meta.temporally_ordered = temporally_ordered;

    std::vector<std::uint64_t> presence(label_count, 0);
    std::uint64_t total_labels = 0;
    for (const auto& inst : instances) {
        if (!inst.labels) continue;
        total_labels += inst.labels->size();
        for (auto l : inst.labels->indices()) presence[l] += 1;
    }
    if (!instances.empty())
        meta.cardinality = static_cast<double>(total_labels) / instances.size();
    if (label_count > 0) meta.density = meta.cardinality / label_count;

    const std::uint64_t max_presence =
        presence.empty() ? 0 : *std::max_element(presence.begin(), presence.end());
    double ir_sum = 0.0;
    std::size_t ir_labels = 0;
    for (auto p : presence) {
        if (p == 0) continue;  // labels never observed carry no ratio
        ir_sum += static_cast<double>(max_presence) / static_cast<double>(p);
        ++ir_labels;
    }
    if (ir_labels > 0) meta.mean_ir = ir_sum / static_cast<double>(ir_labels);
    return meta;
}

LoadedDataset load_arff(const std::string& path, const LabelSpec& labels,
                        NominalEncoding encoding) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string relation = path;
    std::vector<ArffAttribute> attrs;
    std::string line;
    std::size_t line_no = 0;
    bool in_data = false;

    // --- header ---
    while (!in_data && std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        const std::string lt = lower(t);
        if (lt.rfind("@relation", 0) == 0) {
            relation = unquote(trim(t.substr(9)));
        } else if (lt.rfind("@attribute", 0) == 0) {
            std::string rest = trim(t.substr(10));
            ArffAttribute attr;
            if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
                const char q = rest[0];
                const std::size_t end = rest.find(q, 1);
                if (end == std::string::npos)
                    throw ParseError("unterminated quoted attribute name", line_no);
                attr.name = rest.substr(1, end - 1);
                rest = trim(rest.substr(end + 1));
            } else {
                const std::size_t sp = rest.find_first_of(" \t");
                if (sp == std::string::npos)
                    throw ParseError("attribute without a type", line_no);
                attr.name = rest.substr(0, sp);
                rest = trim(rest.substr(sp));
            }
            if (!rest.empty() && rest[0] == '{') {
                const std::size_t end = rest.find('}');
                if (end == std::string::npos)
                    throw ParseError("unterminated nominal specification", line_no);
                attr.nominal = true;
                for (auto& v : split_csv_row(rest.substr(1, end - 1)))
                    attr.values.push_back(unquote(v));
                if (attr.values.empty())
                    throw ParseError("empty nominal specification", line_no);
            } else {
                const std::string type = lower(rest);
                if (type != "numeric" && type != "real" && type != "integer")
                    throw ParseError("unsupported attribute type '" + rest + "'", line_no);
            }
            attrs.push_back(std::move(attr));
        } else if (lt.rfind("@data", 0) == 0) {
            in_data = true;
        } else {
            throw ParseError("unrecognized header directive", line_no);
        }
    }
    if (!in_data) throw ParseError("missing @data section", line_no);
    if (attrs.empty()) throw ParseError("no attributes declared", line_no);

    // --- mark label attributes ---
    switch (labels.kind) {
        case LabelSpec::Kind::kXml: {
            for (const auto& name : parse_label_xml(labels.xml_path)) {
                const auto it = std::find_if(attrs.begin(), attrs.end(),
                                             [&](const ArffAttribute& a) { return a.name == name; });
                if (it == attrs.end())
                    throw std::runtime_error("label '" + name + "' from " + labels.xml_path +
                                             " is not an attribute of " + path);
                it->is_label = true;
            }
            break;
        }
        case LabelSpec::Kind::kTrailing: {
            if (labels.count == 0 || labels.count >= attrs.size())
                throw std::runtime_error("trailing label count out of range");
            for (std::size_t i = attrs.size() - labels.count; i < attrs.size(); ++i)
                attrs[i].is_label = true;
            break;
        }
        case LabelSpec::Kind::kLeading: {
            if (labels.count == 0 || labels.count >= attrs.size())
                throw std::runtime_error("leading label count out of range");
            for (std::size_t i = 0; i < labels.count; ++i) attrs[i].is_label = true;
            break;
        }
        case LabelSpec::Kind::kPrefix: {
            if (labels.prefix.empty()) throw std::runtime_error("empty label prefix");
            for (auto& a : attrs)
                a.is_label = a.name.rfind(labels.prefix, 0) == 0;
            break;
        }
    }

    // --- column layout for features ---
    LoadedDataset out;
    std::vector<std::size_t> attr_feature_offset(attrs.size(), 0);
    std::size_t feature_width = 0;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        const auto& a = attrs[i];
        if (a.is_label) {
            if (a.nominal) {
                // binary nominal labels only
                for (const auto& v : a.values)
                    if (v != "0" && v != "1")
                        throw std::runtime_error("label attribute '" + a.name +
                                                 "' is not binary");
            }
            out.label_names.push_back(a.name);
            continue;
        }
        attr_feature_offset[i] = feature_width;
        if (a.nominal && encoding == NominalEncoding::kOneHot) {
            for (const auto& v : a.values) out.feature_names.push_back(a.name + "=" + v);
            feature_width += a.values.size();
        } else {
            out.feature_names.push_back(a.name);
            feature_width += 1;
        }
    }
    if (out.label_names.empty()) throw std::runtime_error("no label attributes identified");

    std::vector<std::size_t> label_local(attrs.size(), 0);
    std::size_t next_label = 0;
    for (std::size_t i = 0; i < attrs.size(); ++i)
        if (attrs[i].is_label) label_local[i] = next_label++;

    auto nominal_code = [&](const ArffAttribute& a, const std::string& raw,
                            std::size_t ln) -> std::size_t {
        const auto it = std::find(a.values.begin(), a.values.end(), unquote(raw));
        if (it == a.values.end())
            throw ParseError("value '" + raw + "' not in nominal domain of " + a.name, ln);
        return static_cast<std::size_t>(it - a.values.begin());
    };

    // --- data rows ---
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;

        // Raw attribute values; sparse rows default to "0" / first nominal value.
        std::vector<std::string> raw(attrs.size());
        for (std::size_t i = 0; i < attrs.size(); ++i)
            raw[i] = attrs[i].nominal ? attrs[i].values[0] : "0";

        if (t[0] == '{') {
            const std::size_t end = t.find('}');
            if (end == std::string::npos) throw ParseError("unterminated sparse row", line_no);
            const std::string body = trim(t.substr(1, end - 1));
            if (!body.empty()) {
                for (auto& entry : split_csv_row(body)) {
                    const std::size_t sp = entry.find_first_of(" \t");
                    if (sp == std::string::npos)
                        throw ParseError("sparse entry '" + entry + "' lacks a value", line_no);
                    std::size_t idx = 0;
                    try {
                        idx = std::stoul(entry.substr(0, sp));
                    } catch (const std::exception&) {
                        throw ParseError("bad sparse index in '" + entry + "'", line_no);
                    }
                    if (idx >= attrs.size())
                        throw ParseError("sparse index out of range", line_no);
                    raw[idx] = trim(entry.substr(sp));
                }
            }
        } else {
            const auto fields = split_csv_row(t);
            if (fields.size() != attrs.size())
                throw ParseError("expected " + std::to_string(attrs.size()) + " values, got " +
                                     std::to_string(fields.size()),
                                 line_no);
            raw = fields;
        }

        Instance inst;
        inst.features.assign(feature_width, 0.0);
        std::vector<std::uint32_t> active;
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            const auto& a = attrs[i];
            if (a.is_label) {
                double v;
                if (a.nominal)
                    v = binary_label_value(unquote(raw[i]), line_no);
                else
                    v = binary_label_value(raw[i], line_no);
                if (v == 1.0) active.push_back(static_cast<std::uint32_t>(label_local[i]));
                continue;
            }
            if (a.nominal) {
                if (raw[i] == "?") continue;  // missing: all-zero / code 0
                const std::size_t code = nominal_code(a, raw[i], line_no);
                if (encoding == NominalEncoding::kOneHot)
                    inst.features[attr_feature_offset[i] + code] = 1.0;
                else
                    inst.features[attr_feature_offset[i]] = static_cast<double>(code);
            } else {
                double v = 0.0;
                if (raw[i] != "?" && !parse_double(raw[i], v))
                    throw ParseError("bad numeric value '" + raw[i] + "'", line_no);
                inst.features[attr_feature_offset[i]] = v;
            }
        }
        inst.labels = LabelSet(std::move(active));
        out.instances.push_back(std::move(inst));
    }

    out.config.feature_count = feature_width;
    out.config.label_count = out.label_names.size();
    out.meta = compute_meta(relation, out.instances, feature_width, out.label_names.size(),
                            /*temporally_ordered=*/false);
    return out;
}

LoadedDataset load_csv(const std::string& path, std::size_t trailing_labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    if (trailing_labels == 0) throw std::runtime_error("trailing label count must be >= 1");

    LoadedDataset out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        auto fields = split_csv_row(t);
        if (line_no == 1) {
            double probe;
            if (!parse_double(fields[0], probe)) continue;  // header row
        }
        if (width == 0) {
            width = fields.size();
            if (width <= trailing_labels)
                throw ParseError("row narrower than the label block", line_no);
        } else if (fields.size() != width) {
            throw ParseError("inconsistent column count", line_no);
        }
        Instance inst;
        const std::size_t f_count = width - trailing_labels;
        inst.features.reserve(f_count);
        for (std::size_t i = 0; i < f_count; ++i) {
            double v = 0.0;
            if (fields[i] != "?" && !parse_double(fields[i], v))
                throw ParseError("bad numeric value '" + fields[i] + "'", line_no);
            inst.features.push_back(v);
        }
        std::vector<std::uint32_t> active;
        for (std::size_t i = 0; i < trailing_labels; ++i) {
            const double v = binary_label_value(fields[f_count + i], line_no);
            if (v == 1.0) active.push_back(static_cast<std::uint32_t>(i));
        }
        inst.labels = LabelSet(std::move(active));
        out.instances.push_back(std::move(inst));
    }
    if (width == 0) throw std::runtime_error("empty CSV " + path);

    const std::size_t f_count = width - trailing_labels;
    for (std::size_t i = 0; i < f_count; ++i) out.feature_names.push_back("f" + std::to_string(i));
    for (std::size_t i = 0; i < trailing_labels; ++i)
        out.label_names.push_back("label" + std::to_string(i));
    out.config.feature_count = f_count;
    out.config.label_count = trailing_labels;
    out.meta = compute_meta(path, out.instances, f_count, trailing_labels, false);
    return out;
}

void write_arff(const std::string& path, const LoadedDataset& dataset) {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot open " + path + " for writing");
    outf << "@relation " << (dataset.meta.name.empty() ? "stream" : dataset.meta.name) << "\n\n";
    for (std::size_t i = 0; i < dataset.config.feature_count; ++i) {
        const std::string name =
            i < dataset.feature_names.size() ? dataset.feature_names[i] : "f" + std::to_string(i);
        outf << "@attribute " << name << " numeric\n";
    }
    for (std::size_t i = 0; i < dataset.config.label_count; ++i) {
        const std::string name =
            i < dataset.label_names.size() ? dataset.label_names[i] : "label" + std::to_string(i);
        outf << "@attribute " << name << " {0,1}\n";
    }
    outf << "\n@data\n";
    char buf[48];
    for (const auto& inst : dataset.instances) {
        for (std::size_t i = 0; i < inst.features.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", inst.features[i]);
            outf << (i ? "," : "") << buf;
        }
        for (std::size_t l = 0; l < dataset.config.label_count; ++l)
            outf << "," << (inst.labels && inst.labels->contains(static_cast<std::uint32_t>(l))
                                ? "1"
                                : "0");
        outf << "\n";
    }
}

// --- synthetic streams ---

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    SyntheticSpec spec;
    const std::string kind = j.value("kind", "correlated-bernoulli");
    if (kind == "hypercube") spec.kind = Kind::kHypercube;
    else if (kind == "hypersphere") spec.kind = Kind::kHypersphere;
    else if (kind == "correlated-bernoulli") spec.kind = Kind::kCorrelatedBernoulli;
    else throw std::runtime_error("unknown generator kind '" + kind + "'");
    spec.feature_count = j.value("features", spec.feature_count);
    spec.label_count = j.value("labels", spec.label_count);
    spec.instance_count = j.value("instances", spec.instance_count);
    spec.seed = j.value("seed", spec.seed);
    spec.blocks = j.value("blocks", spec.blocks);
    spec.within_similarity = j.value("within_similarity", spec.within_similarity);
    spec.across_similarity = j.value("across_similarity", spec.across_similarity);
    if (j.contains("drift")) {
        for (const auto& d : j.at("drift")) {
            DriftEvent e;
            e.position = d.at("position").get<std::uint64_t>();
            const std::string k = d.value("kind", "abrupt");
            e.kind = k == "gradual" ? DriftEvent::Kind::kGradual : DriftEvent::Kind::kAbrupt;
            const std::string a = d.value("affected", "label-correlations");
            if (a == "features") e.affected = DriftEvent::Affected::kFeatures;
            else if (a == "both") e.affected = DriftEvent::Affected::kBoth;
            else e.affected = DriftEvent::Affected::kLabelCorrelations;
            e.width = d.value("width", e.width);
            spec.drift.push_back(e);
        }
    }
    bool first = true;
    std::uint64_t prev = 0;
    for (const auto& e : spec.drift) {
        if (!first && e.position <= prev)
            throw std::runtime_error("drift positions must be strictly increasing");
        if (e.position >= spec.instance_count)
            throw std::runtime_error("drift position beyond instance count");
        if (e.kind == DriftEvent::Kind::kGradual && e.width < 1)
            throw std::runtime_error("gradual drift needs a positive width");
        prev = e.position;
        first = false;
    }
    return spec;
}

namespace {
constexpr double kShellMembership = 0.231;
}

BlockRates calibrate_block_rates(const SyntheticSpec& spec) {
    // Pair probabilities under independent block activation at rate rho:
    //   same block:   P(both) = rho p_in^2 + (1-rho) p_out^2
    //   other blocks: labels fire independently at q = rho p_in + (1-rho) p_out
    // The across target pins the marginal rate q = 2A/(1+A); p_in comes from
    // the within target's ceiling p/(2-p) and p_out absorbs the residual.
    auto sim_within = [](double rho, double pi, double po) {
        const double both = rho * pi * pi + (1.0 - rho) * po * po;
        const double any = rho * (1.0 - (1.0 - pi) * (1.0 - pi)) +
                           (1.0 - rho) * (1.0 - (1.0 - po) * (1.0 - po));
        return any > 0.0 ? both / any : 0.0;
    };
    BlockRates r;
    const double q = 2.0 * spec.across_similarity / (1.0 + spec.across_similarity);
    r.p_in = std::min(0.999, std::max(0.95, 2.0 * spec.within_similarity /
                                                (1.0 + spec.within_similarity) +
                                            0.02));
    double lo = 1e-9, hi = 0.9 * q;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double rho = std::clamp((q - mid) / (r.p_in - mid), 1e-3, 1.0);
        // within similarity falls as off-block noise grows
        (sim_within(rho, r.p_in, mid) > spec.within_similarity ? lo : hi) = mid;
    }
    r.p_out = 0.5 * (lo + hi);
    r.activation = std::clamp((q - r.p_out) / (r.p_in - r.p_out), 1e-3, 1.0);
    return r;
}

double SyntheticSpec::expected_cardinality() const {
    switch (kind) {
        case Kind::kHypercube:
            return 1.0;
        case Kind::kHypersphere:
            return static_cast<double>(label_count) * kShellMembership;
        case Kind::kCorrelatedBernoulli:
            return static_cast<double>(label_count) *
                   calibrate_block_rates(*this).label_rate();
    }
    return 0.0;
}

SyntheticStream::SyntheticStream(SyntheticSpec spec)
    : spec_(std::move(spec)), rng_(spec_.seed) {
    config_.feature_count = spec_.feature_count;
    config_.label_count = spec_.label_count;
    config_.temporally_ordered = true;
    if (spec_.label_count < 1 || spec_.feature_count < 1)
        throw std::invalid_argument("synthetic spec needs labels and features");

    switch (spec_.kind) {
        case SyntheticSpec::Kind::kCorrelatedBernoulli: {
            if (spec_.blocks < 1 || spec_.blocks > spec_.label_count)
                throw std::invalid_argument("block count out of range");
            concept_.label_block.resize(spec_.label_count);
            for (std::size_t l = 0; l < spec_.label_count; ++l)
                concept_.label_block[l] =
                    static_cast<std::uint32_t>(l * spec_.blocks / spec_.label_count);
            concept_.block_drive.resize(spec_.blocks);
            for (std::size_t b = 0; b < spec_.blocks; ++b)
                concept_.block_drive[b] = b % spec_.feature_count;
            rates_ = calibrate_block_rates(spec_);
            break;
        }
        case SyntheticSpec::Kind::kHypercube: {
            std::uniform_int_distribution<int> bit(0, 1);
            concept_.corners.assign(spec_.label_count,
                                    std::vector<double>(spec_.feature_count));
            for (auto& corner : concept_.corners)
                for (auto& v : corner) v = static_cast<double>(bit(rng_));
            break;
        }
        case SyntheticSpec::Kind::kHypersphere: {
            shell_radius_ = std::cbrt(kShellMembership * 6.0 / std::numbers::pi);
            std::uniform_int_distribution<std::size_t> dim(0, spec_.feature_count - 1);
            std::uniform_real_distribution<double> center(-(1.0 - shell_radius_),
                                                          1.0 - shell_radius_);
            shell_dims_.resize(spec_.label_count);
            concept_.shell_centers.assign(spec_.label_count, std::vector<double>(3));
            for (std::size_t l = 0; l < spec_.label_count; ++l) {
                auto& dims = shell_dims_[l];
                dims[0] = dim(rng_);
                do { dims[1] = dim(rng_); } while (spec_.feature_count > 1 && dims[1] == dims[0]);
                do { dims[2] = dim(rng_); } while (spec_.feature_count > 2 &&
                                                   (dims[2] == dims[0] || dims[2] == dims[1]));
                for (auto& c : concept_.shell_centers[l]) c = center(rng_);
            }
            break;
        }
    }
}

std::vector<std::vector<std::uint32_t>> SyntheticStream::current_blocks() const {
    std::vector<std::vector<std::uint32_t>> blocks(spec_.blocks);
    for (std::size_t l = 0; l < concept_.label_block.size(); ++l)
        blocks[concept_.label_block[l]].push_back(static_cast<std::uint32_t>(l));
    return blocks;
}

SyntheticStream::ConceptState SyntheticStream::drifted_concept(const ConceptState& base,
                                                               const DriftEvent& event) const {
    ConceptState next = base;
    const bool labels = event.affected != DriftEvent::Affected::kFeatures;
    const bool features = event.affected != DriftEvent::Affected::kLabelCorrelations;
    if (labels) {
        if (spec_.kind == SyntheticSpec::Kind::kCorrelatedBernoulli && spec_.blocks >= 2) {
            // Swap the last label of each even block with the first label of
            // the following block: a correlation flip with a known permutation.
            for (std::size_t b = 0; b + 1 < spec_.blocks; b += 2) {
                std::int64_t last_of_b = -1, first_of_next = -1;
                for (std::size_t l = 0; l < next.label_block.size(); ++l) {
                    if (next.label_block[l] == b) last_of_b = static_cast<std::int64_t>(l);
                    if (first_of_next < 0 && next.label_block[l] == b + 1)
                        first_of_next = static_cast<std::int64_t>(l);
                }
                if (last_of_b >= 0 && first_of_next >= 0)
                    std::swap(next.label_block[last_of_b], next.label_block[first_of_next]);
            }
        } else {
            if (!next.corners.empty())
                std::rotate(next.corners.begin(), next.corners.begin() + 1, next.corners.end());
            if (!next.shell_centers.empty())
                std::rotate(next.shell_centers.begin(), next.shell_centers.begin() + 1,
                            next.shell_centers.end());
        }
    }
    if (features)
        for (auto& f : next.block_drive)
            f = (f + 2 * spec_.blocks) % spec_.feature_count;
    return next;
}

Instance SyntheticStream::draw_correlated_bernoulli(const ConceptState& state) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance inst;
    inst.features.resize(spec_.feature_count);
    for (auto& f : inst.features) f = u(rng_);
    // Each block is active, independently, when both of its driving
    // features land in the top slice of their range. The conjunction asks
    // two splits per block of any axis-aligned learner; the uneven cut
    // depths keep the two features' gains apart so split decisions are not
    // stalled by ties.
    const double cut_a = 1.0 - std::pow(rates_.activation, 1.0 / 3.0);
    const double cut_b = 1.0 - std::pow(rates_.activation, 2.0 / 3.0);
    std::vector<bool> active(spec_.blocks);
    for (std::size_t b = 0; b < spec_.blocks; ++b) {
        const std::size_t f_a = state.block_drive[b];
        const std::size_t f_b = (f_a + spec_.blocks) % spec_.feature_count;
        active[b] = inst.features[f_a] > cut_a && inst.features[f_b] > cut_b;
    }
    std::vector<std::uint32_t> on;
    for (std::size_t l = 0; l < spec_.label_count; ++l) {
        const double p = active[state.label_block[l]] ? rates_.p_in : rates_.p_out;
        if (u(rng_) < p) on.push_back(static_cast<std::uint32_t>(l));
    }
    inst.labels = LabelSet(std::move(on));
    return inst;
}

Instance SyntheticStream::draw_hypercube(const ConceptState& state) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Instance inst;
    inst.features.resize(spec_.feature_count);
    for (auto& f : inst.features) f = u(rng_);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < state.corners.size(); ++l) {
        double d = 0.0;
        for (std::size_t f = 0; f < spec_.feature_count; ++f) {
            const double diff = inst.features[f] - state.corners[l][f];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = l;
        }
    }
    inst.labels = LabelSet({static_cast<std::uint32_t>(best)});
    return inst;
}

Instance SyntheticStream::draw_hypersphere(const ConceptState& state) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Instance inst;
    inst.features.resize(spec_.feature_count);
    for (auto& f : inst.features) f = u(rng_);
    std::vector<std::uint32_t> on;
    for (std::size_t l = 0; l < spec_.label_count; ++l) {
        double d = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const double diff = inst.features[shell_dims_[l][k]] - state.shell_centers[l][k];
            d += diff * diff;
        }
        if (d <= shell_radius_ * shell_radius_) on.push_back(static_cast<std::uint32_t>(l));
    }
    inst.labels = LabelSet(std::move(on));
    return inst;
}

Instance SyntheticStream::draw(const ConceptState& state) {
    switch (spec_.kind) {
        case SyntheticSpec::Kind::kCorrelatedBernoulli:
            return draw_correlated_bernoulli(state);
        case SyntheticSpec::Kind::kHypercube:
            return draw_hypercube(state);
        case SyntheticSpec::Kind::kHypersphere:
            return draw_hypersphere(state);
    }
    throw std::logic_error("unreachable generator kind");
}

std::optional<Instance> SyntheticStream::next() {
    if (emitted_ >= spec_.instance_count) return std::nullopt;

    // Enter the next drift event at its position: abrupt events commit at
    // once, gradual ones mix old and new concepts across their window.
    if (!pending_ && next_event_ < spec_.drift.size() &&
        emitted_ >= spec_.drift[next_event_].position) {
        const DriftEvent& event = spec_.drift[next_event_];
        if (event.kind == DriftEvent::Kind::kAbrupt) {
            concept_ = drifted_concept(concept_, event);
            next_event_ += 1;
        } else {
            pending_ = drifted_concept(concept_, event);
        }
    }

    const ConceptState* use = &concept_;
    if (pending_) {
        const DriftEvent& event = spec_.drift[next_event_];
        if (emitted_ >= event.position + event.width) {
            concept_ = std::move(*pending_);
            pending_.reset();
            next_event_ += 1;
        } else {
            const double ramp = static_cast<double>(emitted_ - event.position) /
                                static_cast<double>(event.width);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            if (u(rng_) < ramp) use = &*pending_;
        }
    }

    Instance inst = draw(*use);
    emitted_ += 1;
    return inst;
}

}  // namespace ihomer::io
