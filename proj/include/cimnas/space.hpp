/*******************************************************************************
* Copyright 2026 The cimnas Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#pragma once

// Combined model / quantization / hardware search space: declarative choice
// lists, genome types, the flat index encoding, uniform sampling and exact
// cardinality.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <yaml-cpp/yaml.h>

#include "cimnas/error.hpp"
#include "cimnas/rng.hpp"

namespace cimnas {

using BigInt = boost::multiprecision::cpp_int;

enum class ModelTemplate { MobileNetV2Like, ResNet50Like };
enum class ExecutionMode { WeightStationary, WeightSwapping };

inline std::string_view to_string(ModelTemplate t) {
    return t == ModelTemplate::MobileNetV2Like ? "MobileNetV2Like" : "ResNet50Like";
}
inline std::string_view to_string(ExecutionMode m) {
    return m == ExecutionMode::WeightStationary ? "WeightStationary" : "WeightSwapping";
}

/// Names of the two searched convolution kinds of a template. Index 0 is the
/// spatial convolution (depthwise or normal), index 1 the pointwise one.
inline std::array<std::string_view, 2> quant_kind_names(ModelTemplate t) {
    if (t == ModelTemplate::MobileNetV2Like) return {"depthwise", "pointwise"};
    return {"normal", "pointwise"};
}

/// Canonical hardware gene order. Encodings depend on it; never reorder.
inline constexpr std::array<std::string_view, 9> kHardwareGeneNames{
    "V_op", "Bits_cell", "T_cycle", "Xbar_rows", "Xbar_cols",
    "C_per_tile", "T_per_router", "G_per_chip", "GLB"};

enum HardwareGene : std::size_t {
    kVop = 0, kBitsCell, kTCycle, kXbarRows, kXbarCols, kCPerTile, kTPerRouter, kGPerChip, kGlb
};

struct PrecisionChoices {
    std::vector<int> weight_bits;
    std::vector<int> input_bits;
};

enum class GeneGroup { Model, Quant, Hardware };
enum class GeneRole { Depth, Kernel, Expansion, WidthMult, WeightBits, InputBits, Hardware };

struct GeneInfo {
    std::string name;
    GeneGroup group{};
    GeneRole role{};
    std::size_t choices = 0;
    int stage = -1;     // -1 for global genes
    int block = -1;     // -1 for per-stage or global genes
    int kind = -1;      // quant kind index, or hardware gene index for Hardware
};

struct SearchSpaceSpec {
    ModelTemplate model_template = ModelTemplate::MobileNetV2Like;
    std::string template_table;  // path to the channel/stride table
    int input_resolution = 224;
    int stage_count = 0;
    std::vector<std::vector<int>> depth_choices;  // one list per stage
    std::vector<int> kernel_choices;
    std::vector<double> expansion_choices;
    std::vector<double> width_mult_choices;  // ResNet template only
    std::array<PrecisionChoices, 2> quant;
    std::array<std::vector<double>, 9> hardware;
    ExecutionMode execution_mode = ExecutionMode::WeightStationary;

    /// Filled by finalize(); flat gene order used by encode/decode.
    std::vector<GeneInfo> genes;

    int max_depth(int stage) const { return depth_choices.at(static_cast<std::size_t>(stage)).back(); }
    int min_depth(int stage) const { return depth_choices.at(static_cast<std::size_t>(stage)).front(); }
    bool has_width_mult() const { return model_template == ModelTemplate::ResNet50Like; }
    std::size_t gene_count() const { return genes.size(); }
};

// ---------------------------------------------------------------------------
// Genomes

struct ModelGenome {
    std::vector<int> depths;                      // per stage
    std::vector<std::vector<int>> kernels;        // [stage][block], padded to max depth
    std::vector<std::vector<double>> expansions;  // [stage][block]
    double width_mult = 1.0;

    bool operator==(const ModelGenome&) const = default;
};

struct BlockPrecision {
    std::array<int, 2> weight_bits{};
    std::array<int, 2> input_bits{};

    bool operator==(const BlockPrecision&) const = default;
};

struct QuantPolicy {
    std::vector<std::vector<BlockPrecision>> blocks;  // [stage][block]
    int fixed_bits = 8;  // stem, fixed bottleneck, last conv, classifier

    bool operator==(const QuantPolicy&) const = default;
};

struct HardwareConfig {
    double v_op = 0.0;        // V
    int bits_cell = 0;
    double t_cycle_ns = 0.0;  // ns
    int xbar_rows = 0;
    int xbar_cols = 0;
    int c_per_tile = 0;
    int t_per_router = 0;
    int g_per_chip = 0;
    double glb_mb = 0.0;
    ExecutionMode mode = ExecutionMode::WeightStationary;

    long long macros() const {
        return static_cast<long long>(g_per_chip) * t_per_router * c_per_tile;
    }
    long long tiles() const { return static_cast<long long>(g_per_chip) * t_per_router; }

    bool operator==(const HardwareConfig&) const = default;
};

struct DesignPoint {
    ModelGenome model;
    QuantPolicy quant;
    HardwareConfig hardware;
    std::vector<int> encoding;

    bool operator==(const DesignPoint&) const = default;
};

// ---------------------------------------------------------------------------
// Spec construction and validation

namespace detail {

template <class T>
void check_choice_list(const std::vector<T>& values, const std::string& key) {
    if (values.empty()) throw Error(ErrorCode::EmptyChoiceList, key);
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i - 1] < values[i]))
            throw Error(ErrorCode::InvalidSpec, key + " must be strictly increasing and duplicate-free");
    }
}

inline std::string stage_block_name(int stage, int block, std::string_view what) {
    std::ostringstream os;
    os << "stage" << stage;
    if (block >= 0) os << ".block" << block;
    os << "." << what;
    return os.str();
}

} // namespace detail

/// Validates the choice lists and builds the flat gene layout.
///
/// Gene order: [width_mult], then per stage {depth, per block {kernel,
/// expansion}}, then per stage/block {w0, in0, w1, in1} quantization genes,
/// then the nine hardware genes in kHardwareGeneNames order.
inline void finalize(SearchSpaceSpec& spec) {
    using detail::check_choice_list;
    if (spec.stage_count < 1) throw Error(ErrorCode::InvalidSpec, "stage_count must be >= 1");
    if (spec.depth_choices.size() == 1 && spec.stage_count > 1)
        spec.depth_choices.resize(static_cast<std::size_t>(spec.stage_count), spec.depth_choices.front());
    if (spec.depth_choices.size() != static_cast<std::size_t>(spec.stage_count))
        throw Error(ErrorCode::InvalidSpec, "depth_choices must have one list per stage");
    for (int s = 0; s < spec.stage_count; ++s) {
        const auto& d = spec.depth_choices[static_cast<std::size_t>(s)];
        check_choice_list(d, "depth_choices");
        if (d.front() < 1) throw Error(ErrorCode::InvalidSpec, "depth_choices entries must be >= 1");
    }
    check_choice_list(spec.kernel_choices, "kernel_choices");
    check_choice_list(spec.expansion_choices, "expansion_choices");
    if (spec.has_width_mult()) check_choice_list(spec.width_mult_choices, "width_mult_choices");
    const auto kinds = quant_kind_names(spec.model_template);
    for (std::size_t k = 0; k < 2; ++k) {
        check_choice_list(spec.quant[k].weight_bits, "quantization." + std::string(kinds[k]) + ".weight_bits");
        check_choice_list(spec.quant[k].input_bits, "quantization." + std::string(kinds[k]) + ".input_bits");
    }
    for (std::size_t h = 0; h < kHardwareGeneNames.size(); ++h)
        check_choice_list(spec.hardware[h], "hardware." + std::string(kHardwareGeneNames[h]));
    if (spec.hardware[kGPerChip].front() * spec.hardware[kTPerRouter].front() * spec.hardware[kCPerTile].front() < 1.0)
        throw Error(ErrorCode::InvalidSpec, "macro count G_per_chip*T_per_router*C_per_tile must be >= 1");

    auto& g = spec.genes;
    g.clear();
    if (spec.has_width_mult())
        g.push_back({"width_mult", GeneGroup::Model, GeneRole::WidthMult, spec.width_mult_choices.size()});
    for (int s = 0; s < spec.stage_count; ++s) {
        g.push_back({detail::stage_block_name(s, -1, "depth"), GeneGroup::Model, GeneRole::Depth,
                     spec.depth_choices[static_cast<std::size_t>(s)].size(), s, -1, -1});
        for (int b = 0; b < spec.max_depth(s); ++b) {
            g.push_back({detail::stage_block_name(s, b, "kernel"), GeneGroup::Model, GeneRole::Kernel,
                         spec.kernel_choices.size(), s, b, -1});
            g.push_back({detail::stage_block_name(s, b, "expansion"), GeneGroup::Model, GeneRole::Expansion,
                         spec.expansion_choices.size(), s, b, -1});
        }
    }
    for (int s = 0; s < spec.stage_count; ++s) {
        for (int b = 0; b < spec.max_depth(s); ++b) {
            for (int k = 0; k < 2; ++k) {
                const std::string kind(kinds[static_cast<std::size_t>(k)]);
                g.push_back({detail::stage_block_name(s, b, kind + "_weight_bits"), GeneGroup::Quant,
                             GeneRole::WeightBits, spec.quant[static_cast<std::size_t>(k)].weight_bits.size(), s, b, k});
                g.push_back({detail::stage_block_name(s, b, kind + "_input_bits"), GeneGroup::Quant,
                             GeneRole::InputBits, spec.quant[static_cast<std::size_t>(k)].input_bits.size(), s, b, k});
            }
        }
    }
    for (std::size_t h = 0; h < kHardwareGeneNames.size(); ++h)
        g.push_back({std::string(kHardwareGeneNames[h]), GeneGroup::Hardware, GeneRole::Hardware,
                     spec.hardware[h].size(), -1, -1, static_cast<int>(h)});
}

namespace detail {

inline const YAML::Node require(const YAML::Node& node, const std::string& key, const std::string& path = "") {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!node.IsMap() || !node[key]) throw Error(ErrorCode::MissingKey, full);
    return node[key];
}

template <class T>
std::vector<T> read_list(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence()) throw Error(ErrorCode::InvalidSpec, key + " must be a list");
    std::vector<T> out;
    try {
        for (const auto& v : node) out.push_back(v.as<T>());
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, key + ": " + e.what());
    }
    return out;
}

} // namespace detail

/// Parses and validates a space document. Relative `template_table` paths
/// are resolved against `base_dir`.
inline SearchSpaceSpec load_spec(const YAML::Node& root, const std::filesystem::path& base_dir = {}) {
    using detail::read_list;
    using detail::require;
    SearchSpaceSpec spec;

    const auto tmpl = require(root, "template").as<std::string>();
    if (tmpl == "MobileNetV2Like") spec.model_template = ModelTemplate::MobileNetV2Like;
    else if (tmpl == "ResNet50Like") spec.model_template = ModelTemplate::ResNet50Like;
    else throw Error(ErrorCode::UnknownTemplate, "template: '" + tmpl + "'");

    std::filesystem::path table = require(root, "template_table").as<std::string>();
    if (table.is_relative() && !base_dir.empty()) table = base_dir / table;
    spec.template_table = table.lexically_normal().string();
    if (root["input_resolution"]) spec.input_resolution = root["input_resolution"].as<int>();
    spec.stage_count = require(root, "stage_count").as<int>();

    const auto depth = require(root, "depth_choices");
    if (depth.IsSequence() && depth.size() > 0 && depth[0].IsSequence()) {
        for (const auto& d : depth) spec.depth_choices.push_back(read_list<int>(d, "depth_choices"));
    } else {
        spec.depth_choices.push_back(read_list<int>(depth, "depth_choices"));
        if (spec.depth_choices.front().empty()) throw Error(ErrorCode::EmptyChoiceList, "depth_choices");
    }
    spec.kernel_choices = read_list<int>(require(root, "kernel_choices"), "kernel_choices");
    spec.expansion_choices = read_list<double>(require(root, "expansion_choices"), "expansion_choices");
    if (spec.has_width_mult())
        spec.width_mult_choices = read_list<double>(require(root, "width_mult_choices"), "width_mult_choices");

    const auto quant = require(root, "quantization");
    const auto kinds = quant_kind_names(spec.model_template);
    for (std::size_t k = 0; k < 2; ++k) {
        const std::string kind(kinds[k]);
        const auto node = require(quant, kind, "quantization");
        const std::string path = "quantization." + kind;
        spec.quant[k].weight_bits = read_list<int>(require(node, "weight_bits", path), path + ".weight_bits");
        spec.quant[k].input_bits = read_list<int>(require(node, "input_bits", path), path + ".input_bits");
    }

    const auto hw = require(root, "hardware");
    for (const auto& kv : hw) {
        const auto name = kv.first.as<std::string>();
        if (std::find(kHardwareGeneNames.begin(), kHardwareGeneNames.end(), name) == kHardwareGeneNames.end())
            throw Error(ErrorCode::InvalidSpec, "hardware." + name + " is not a known hardware gene");
    }
    for (std::size_t h = 0; h < kHardwareGeneNames.size(); ++h) {
        const std::string name(kHardwareGeneNames[h]);
        spec.hardware[h] = read_list<double>(require(hw, name, "hardware"), "hardware." + name);
    }

    if (root["execution_mode"]) {
        const auto mode = root["execution_mode"].as<std::string>();
        if (mode == "WeightStationary") spec.execution_mode = ExecutionMode::WeightStationary;
        else if (mode == "WeightSwapping") spec.execution_mode = ExecutionMode::WeightSwapping;
        else throw Error(ErrorCode::InvalidSpec, "execution_mode: '" + mode + "'");
    }
    finalize(spec);
    return spec;
}

inline SearchSpaceSpec load_spec_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("parse error: ") + e.what());
    }
    try {
        return load_spec(root, base_dir);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("bad value: ") + e.what());
    }
}

inline std::string read_text_file(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, std::string(what) + " not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline SearchSpaceSpec load_spec_file(const std::filesystem::path& path) {
    return load_spec_text(read_text_file(path, "spec"), path.parent_path());
}

// ---------------------------------------------------------------------------
// Encoding

namespace detail {

template <class T>
int index_of(const std::vector<T>& values, T v, const std::string& gene) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if constexpr (std::is_floating_point_v<T>) {
            if (std::abs(values[i] - v) <= 1e-9 * std::max(1.0, std::abs(v))) return static_cast<int>(i);
        } else {
            if (values[i] == v) return static_cast<int>(i);
        }
    }
    throw Error(ErrorCode::InvalidGenome, gene + " value is not in its choice list");
}

inline double hardware_value(const HardwareConfig& hw, std::size_t gene) {
    switch (gene) {
    case kVop: return hw.v_op;
    case kBitsCell: return hw.bits_cell;
    case kTCycle: return hw.t_cycle_ns;
    case kXbarRows: return hw.xbar_rows;
    case kXbarCols: return hw.xbar_cols;
    case kCPerTile: return hw.c_per_tile;
    case kTPerRouter: return hw.t_per_router;
    case kGPerChip: return hw.g_per_chip;
    case kGlb: return hw.glb_mb;
    }
    return 0.0;
}

inline void set_hardware_value(HardwareConfig& hw, std::size_t gene, double v) {
    switch (gene) {
    case kVop: hw.v_op = v; break;
    case kBitsCell: hw.bits_cell = static_cast<int>(std::lround(v)); break;
    case kTCycle: hw.t_cycle_ns = v; break;
    case kXbarRows: hw.xbar_rows = static_cast<int>(std::lround(v)); break;
    case kXbarCols: hw.xbar_cols = static_cast<int>(std::lround(v)); break;
    case kCPerTile: hw.c_per_tile = static_cast<int>(std::lround(v)); break;
    case kTPerRouter: hw.t_per_router = static_cast<int>(std::lround(v)); break;
    case kGPerChip: hw.g_per_chip = static_cast<int>(std::lround(v)); break;
    case kGlb: hw.glb_mb = v; break;
    }
}

} // namespace detail

inline double hardware_value(const HardwareConfig& hw, std::size_t gene) { return detail::hardware_value(hw, gene); }

/// Maps a design's gene values to choice-list indices in canonical gene order.
inline std::vector<int> encode(const SearchSpaceSpec& spec, const DesignPoint& d) {
    using detail::index_of;
    std::vector<int> out;
    out.reserve(spec.genes.size());
    for (const auto& g : spec.genes) {
        const auto s = static_cast<std::size_t>(g.stage);
        const auto b = static_cast<std::size_t>(g.block);
        switch (g.role) {
        case GeneRole::WidthMult: out.push_back(index_of(spec.width_mult_choices, d.model.width_mult, g.name)); break;
        case GeneRole::Depth: out.push_back(index_of(spec.depth_choices[s], d.model.depths.at(s), g.name)); break;
        case GeneRole::Kernel: out.push_back(index_of(spec.kernel_choices, d.model.kernels.at(s).at(b), g.name)); break;
        case GeneRole::Expansion:
            out.push_back(index_of(spec.expansion_choices, d.model.expansions.at(s).at(b), g.name));
            break;
        case GeneRole::WeightBits: {
            const auto k = static_cast<std::size_t>(g.kind);
            out.push_back(index_of(spec.quant[k].weight_bits, d.quant.blocks.at(s).at(b).weight_bits[k], g.name));
            break;
        }
        case GeneRole::InputBits: {
            const auto k = static_cast<std::size_t>(g.kind);
            out.push_back(index_of(spec.quant[k].input_bits, d.quant.blocks.at(s).at(b).input_bits[k], g.name));
            break;
        }
        case GeneRole::Hardware: {
            const auto h = static_cast<std::size_t>(g.kind);
            out.push_back(index_of(spec.hardware[h], detail::hardware_value(d.hardware, h), g.name));
            break;
        }
        }
    }
    return out;
}

/// Builds the design addressed by an index vector; throws IndexOutOfRange
/// naming the first offending gene.
inline DesignPoint decode(const SearchSpaceSpec& spec, const std::vector<int>& idx) {
    if (idx.size() != spec.genes.size())
        throw Error(ErrorCode::LengthMismatch, "encoding has " + std::to_string(idx.size()) + " genes, spec has " +
                                                   std::to_string(spec.genes.size()));
    DesignPoint d;
    const auto stages = static_cast<std::size_t>(spec.stage_count);
    d.model.depths.resize(stages);
    d.model.kernels.resize(stages);
    d.model.expansions.resize(stages);
    d.quant.blocks.resize(stages);
    for (std::size_t s = 0; s < stages; ++s) {
        const auto depth = static_cast<std::size_t>(spec.max_depth(static_cast<int>(s)));
        d.model.kernels[s].resize(depth);
        d.model.expansions[s].resize(depth);
        d.quant.blocks[s].resize(depth);
    }
    d.hardware.mode = spec.execution_mode;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto& g = spec.genes[i];
        if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= g.choices)
            throw Error(ErrorCode::IndexOutOfRange,
                        g.name + " index " + std::to_string(idx[i]) + " outside [0, " + std::to_string(g.choices) + ")");
        const auto v = static_cast<std::size_t>(idx[i]);
        const auto s = static_cast<std::size_t>(g.stage);
        const auto b = static_cast<std::size_t>(g.block);
        switch (g.role) {
        case GeneRole::WidthMult: d.model.width_mult = spec.width_mult_choices[v]; break;
        case GeneRole::Depth: d.model.depths[s] = spec.depth_choices[s][v]; break;
        case GeneRole::Kernel: d.model.kernels[s][b] = spec.kernel_choices[v]; break;
        case GeneRole::Expansion: d.model.expansions[s][b] = spec.expansion_choices[v]; break;
        case GeneRole::WeightBits: {
            const auto k = static_cast<std::size_t>(g.kind);
            d.quant.blocks[s][b].weight_bits[k] = spec.quant[k].weight_bits[v];
            break;
        }
        case GeneRole::InputBits: {
            const auto k = static_cast<std::size_t>(g.kind);
            d.quant.blocks[s][b].input_bits[k] = spec.quant[k].input_bits[v];
            break;
        }
        case GeneRole::Hardware: {
            const auto h = static_cast<std::size_t>(g.kind);
            detail::set_hardware_value(d.hardware, h, spec.hardware[h][v]);
            break;
        }
        }
    }
    d.encoding = idx;
    return d;
}

/// Whether gene `i` of `idx` affects the design (false for genes of blocks
/// beyond the stage's active depth).
inline bool gene_active(const SearchSpaceSpec& spec, const std::vector<int>& idx, std::size_t i) {
    const auto& g = spec.genes[i];
    if (g.block < 0) return true;
    // Depth gene of the stage precedes its block genes; locate it.
    std::size_t depth_pos = 0;
    for (std::size_t j = 0; j < spec.genes.size(); ++j) {
        if (spec.genes[j].role == GeneRole::Depth && spec.genes[j].stage == g.stage) {
            depth_pos = j;
            break;
        }
    }
    const int depth = spec.depth_choices[static_cast<std::size_t>(g.stage)][static_cast<std::size_t>(idx[depth_pos])];
    return g.block < depth;
}

/// Zeroes the genes of inactive blocks so that designs that realize the same
/// network, precision and hardware share one encoding.
inline std::vector<int> canonical_encoding(const SearchSpaceSpec& spec, std::vector<int> idx) {
    std::vector<int> depth_of_stage(static_cast<std::size_t>(spec.stage_count), 0);
    for (std::size_t i = 0; i < spec.genes.size(); ++i) {
        const auto& g = spec.genes[i];
        if (g.role == GeneRole::Depth)
            depth_of_stage[static_cast<std::size_t>(g.stage)] =
                spec.depth_choices[static_cast<std::size_t>(g.stage)][static_cast<std::size_t>(idx[i])];
    }
    for (std::size_t i = 0; i < spec.genes.size(); ++i) {
        const auto& g = spec.genes[i];
        if (g.block >= 0 && g.block >= depth_of_stage[static_cast<std::size_t>(g.stage)]) idx[i] = 0;
    }
    return idx;
}

/// Draws every gene independently and uniformly from its choice list.
inline DesignPoint sample_uniform(const SearchSpaceSpec& spec, RngStream& rng) {
    std::vector<int> idx(spec.genes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(rng.below(spec.genes[i].choices));
    return decode(spec, idx);
}

/// Index vector with every gene of `group` set by `pick(gene)`, others copied from `base`.
template <class Pick>
std::vector<int> with_group(const SearchSpaceSpec& spec, std::vector<int> base, GeneGroup group, Pick pick) {
    for (std::size_t i = 0; i < spec.genes.size(); ++i)
        if (spec.genes[i].group == group) base[i] = pick(spec.genes[i]);
    return base;
}

/// Median hardware configuration: element n/2 of every hardware choice list.
inline HardwareConfig median_hardware(const SearchSpaceSpec& spec) {
    HardwareConfig hw;
    for (std::size_t h = 0; h < kHardwareGeneNames.size(); ++h)
        detail::set_hardware_value(hw, h, spec.hardware[h][spec.hardware[h].size() / 2]);
    hw.mode = spec.execution_mode;
    return hw;
}

/// Index of `value` in `list`, or the largest entry when absent.
template <class T>
int preferred_index(const std::vector<T>& list, T value) {
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] == value) return static_cast<int>(i);
    return static_cast<int>(list.size()) - 1;
}

/// Fixed reference network used by the baselines: every stage at full depth,
/// the smallest kernel, the largest expansion and width, 8-bit precision (the
/// largest available precision when 8 is not listed).
inline std::vector<int> reference_model_encoding(const SearchSpaceSpec& spec, std::vector<int> base) {
    for (std::size_t i = 0; i < spec.genes.size(); ++i) {
        const auto& g = spec.genes[i];
        const auto k = static_cast<std::size_t>(std::max(g.kind, 0));
        switch (g.role) {
        case GeneRole::Depth:
        case GeneRole::Expansion:
        case GeneRole::WidthMult: base[i] = static_cast<int>(g.choices) - 1; break;
        case GeneRole::Kernel: base[i] = 0; break;
        case GeneRole::WeightBits: base[i] = preferred_index(spec.quant[k].weight_bits, 8); break;
        case GeneRole::InputBits: base[i] = preferred_index(spec.quant[k].input_bits, 8); break;
        case GeneRole::Hardware: break;
        }
    }
    return base;
}

inline std::vector<int> median_hardware_encoding(const SearchSpaceSpec& spec, std::vector<int> base) {
    return with_group(spec, std::move(base), GeneGroup::Hardware,
                      [](const GeneInfo& g) { return static_cast<int>(g.choices / 2); });
}

// ---------------------------------------------------------------------------
// Cardinality

struct Cardinality {
    BigInt model;
    BigInt quant;
    BigInt hardware;
    BigInt total;
};

/// Exact subspace sizes. The model count only counts distinct active
/// networks: per stage, sum over depths d of (|kernel| * |expansion|)^d.
inline Cardinality cardinality(const SearchSpaceSpec& spec) {
    Cardinality c;
    c.model = 1;
    const BigInt per_block = BigInt(spec.kernel_choices.size()) * spec.expansion_choices.size();
    for (int s = 0; s < spec.stage_count; ++s) {
        BigInt stage_sum = 0;
        for (int d : spec.depth_choices[static_cast<std::size_t>(s)]) stage_sum += boost::multiprecision::pow(per_block, static_cast<unsigned>(d));
        c.model *= stage_sum;
    }
    if (spec.has_width_mult()) c.model *= spec.width_mult_choices.size();
    c.quant = 1;
    c.hardware = 1;
    for (const auto& g : spec.genes) {
        if (g.group == GeneGroup::Quant) c.quant *= g.choices;
        if (g.group == GeneGroup::Hardware) c.hardware *= g.choices;
    }
    c.total = c.model * c.quant * c.hardware;
    return c;
}

/// "d.ddd×10^N"-style rendering as "d.dde+N" with `digits` significant digits.
inline std::string to_scientific(const BigInt& v, int digits = 2) {
    std::string s = v.str();
    if (s.size() <= 1) return s + ".0e+0";
    std::string mant = s.substr(0, 1) + "." + s.substr(1, static_cast<std::size_t>(std::max(digits - 1, 1)));
    // Round half up on the next digit.
    const std::size_t next = static_cast<std::size_t>(std::max(digits, 2));
    int exponent = static_cast<int>(s.size()) - 1;
    if (next < s.size() && s[next] >= '5') {
        std::string digits_only = s.substr(0, next);
        int i = static_cast<int>(digits_only.size()) - 1;
        while (i >= 0 && digits_only[static_cast<std::size_t>(i)] == '9') digits_only[static_cast<std::size_t>(i--)] = '0';
        if (i < 0) {
            digits_only.insert(digits_only.begin(), '1');
            digits_only.pop_back();
            ++exponent;
        } else {
            ++digits_only[static_cast<std::size_t>(i)];
        }
        mant = digits_only.substr(0, 1) + "." + digits_only.substr(1);
    }
    return mant + "e+" + std::to_string(exponent);
}

} // namespace cimnas
