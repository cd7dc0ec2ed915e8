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

// Expansion of a genome into per-layer matrix workloads, plus the synthetic
// value histograms that make hardware energy data-dependent.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cimnas/error.hpp"
#include "cimnas/rng.hpp"
#include "cimnas/space.hpp"

namespace cimnas {

enum class ConvKind { Pointwise, Depthwise, Standard, Linear };

inline std::string_view to_string(ConvKind k) {
    switch (k) {
    case ConvKind::Pointwise: return "pointwise";
    case ConvKind::Depthwise: return "depthwise";
    case ConvKind::Standard: return "standard";
    case ConvKind::Linear: return "linear";
    }
    return "?";
}

/// One layer lowered to the matrix-vector form a crossbar executes.
/// Depthwise layers keep rows = k*k and cols = channels; mapping packs them
/// block-diagonally.
struct LayerWorkload {
    int id = 0;
    std::string name;
    std::uint64_t slot = 0;  // stable key for the layer position (histogram seeding)
    ConvKind kind = ConvKind::Pointwise;
    int kernel = 1;
    long long in_channels = 0;
    long long rows = 0;       // R
    long long cols = 0;       // C
    long long positions = 0;  // P = OH * OW
    long long macs = 0;
    int weight_bits = 8;
    int input_bits = 8;
    long long weights = 0;
    long long input_bytes = 0;
    long long output_bytes = 0;

    long long weight_bytes() const { return (weights * weight_bits + 7) / 8; }
    long long traffic_bytes() const { return input_bytes + output_bytes; }
};

// ---------------------------------------------------------------------------
// Template tables

enum class TemplateRowKind { Stem, Pool, FixedBottleneck, Stage, LastConv, Classifier };

struct TemplateRow {
    TemplateRowKind kind{};
    int channels = 0;
    int stride = 1;
    int kernel = 3;
};

struct TemplateTable {
    ModelTemplate model_template = ModelTemplate::MobileNetV2Like;
    std::vector<TemplateRow> rows;

    int stage_rows() const {
        int n = 0;
        for (const auto& r : rows) n += r.kind == TemplateRowKind::Stage;
        return n;
    }
};

inline TemplateTable load_template_table(const YAML::Node& root) {
    TemplateTable t;
    if (!root["template"]) throw Error(ErrorCode::MissingKey, "template");
    const auto name = root["template"].as<std::string>();
    if (name == "MobileNetV2Like") t.model_template = ModelTemplate::MobileNetV2Like;
    else if (name == "ResNet50Like") t.model_template = ModelTemplate::ResNet50Like;
    else throw Error(ErrorCode::UnknownTemplate, "template: '" + name + "'");
    if (!root["rows"]) throw Error(ErrorCode::MissingKey, "rows");
    for (const auto& r : root["rows"]) {
        TemplateRow row;
        if (!r["kind"]) throw Error(ErrorCode::MissingKey, "rows[].kind");
        const auto kind = r["kind"].as<std::string>();
        if (kind == "stem") row.kind = TemplateRowKind::Stem;
        else if (kind == "pool") row.kind = TemplateRowKind::Pool;
        else if (kind == "fixed_bottleneck") row.kind = TemplateRowKind::FixedBottleneck;
        else if (kind == "stage") row.kind = TemplateRowKind::Stage;
        else if (kind == "last_conv") row.kind = TemplateRowKind::LastConv;
        else if (kind == "classifier") row.kind = TemplateRowKind::Classifier;
        else throw Error(ErrorCode::InvalidSpec, "unknown template row kind '" + kind + "'");
        if (row.kind != TemplateRowKind::Pool) {
            if (!r["channels"]) throw Error(ErrorCode::MissingKey, "rows[].channels");
            row.channels = r["channels"].as<int>();
        }
        if (r["stride"]) row.stride = r["stride"].as<int>();
        if (r["kernel"]) row.kernel = r["kernel"].as<int>();
        if (row.stride < 1 || (row.kind != TemplateRowKind::Pool && row.channels < 1))
            throw Error(ErrorCode::InvalidSpec, "template row '" + kind + "' must have positive channels and stride");
        t.rows.push_back(row);
    }
    return t;
}

inline TemplateTable load_template_file(const std::filesystem::path& path) {
    try {
        return load_template_table(YAML::Load(read_text_file(path, "template table")));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Model expansion

namespace detail {

inline long long make_divisible(double v, int divisor = 8) {
    const long long d = divisor;
    long long out = std::max(d, static_cast<long long>(v + d / 2.0) / d * d);
    if (static_cast<double>(out) < 0.9 * v) out += d;
    return out;
}

inline std::uint64_t slot_key(int stage, int block, int role) {
    return (static_cast<std::uint64_t>(stage + 2) << 32) ^ (static_cast<std::uint64_t>(block + 2) << 16) ^
           static_cast<std::uint64_t>(role);
}

class LayerBuilder {
public:
    std::vector<LayerWorkload> layers;

    void add(std::string name, std::uint64_t slot, ConvKind kind, int kernel, long long c_in, long long c_out,
             long long in_hw, int stride, int w_bits, int in_bits) {
        if (in_hw % stride != 0) throw Error(ErrorCode::InvalidSpec, "input resolution not divisible by cumulative strides");
        LayerWorkload l;
        l.id = static_cast<int>(layers.size());
        l.name = std::move(name);
        l.slot = slot;
        l.kind = kind;
        l.kernel = kernel;
        l.in_channels = c_in;
        const long long out_hw = in_hw / stride;
        l.positions = kind == ConvKind::Linear ? 1 : out_hw * out_hw;
        const long long k2 = static_cast<long long>(kernel) * kernel;
        switch (kind) {
        case ConvKind::Depthwise:
            l.rows = k2;
            l.cols = c_in;
            l.weights = k2 * c_in;
            l.macs = k2 * c_in * l.positions;
            break;
        case ConvKind::Standard:
            l.rows = c_in * k2;
            l.cols = c_out;
            l.weights = l.rows * l.cols;
            l.macs = l.rows * l.cols * l.positions;
            break;
        case ConvKind::Pointwise:
        case ConvKind::Linear:
            l.rows = c_in;
            l.cols = c_out;
            l.weights = l.rows * l.cols;
            l.macs = l.rows * l.cols * l.positions;
            break;
        }
        l.weight_bits = w_bits;
        l.input_bits = in_bits;
        const long long in_positions = kind == ConvKind::Linear ? 1 : in_hw * in_hw;
        l.input_bytes = (c_in * in_positions * in_bits + 7) / 8;
        l.output_bytes = (kind == ConvKind::Depthwise ? c_in : c_out) * l.positions;
        layers.push_back(std::move(l));
    }
};

} // namespace detail

/// Lowers (genome, policy) to the per-layer workload list of the template.
///
/// MobileNetV2Like emits, per active block, expand pointwise (C_in -> e*C_in),
/// depthwise k x k, and project pointwise (e*C_in -> C_out); the stem, the
/// fixed bottleneck, the last conv and the classifier run at the fixed
/// precision. ResNet50Like emits 1x1 / k x k / 1x1 bottleneck triplets with
/// channels scaled by the width multiplier. Projection shortcuts are not
/// modeled.
inline std::vector<LayerWorkload> expand_model(const SearchSpaceSpec& spec, const TemplateTable& table,
                                               const ModelGenome& model, const QuantPolicy& quant,
                                               int input_resolution) {
    if (table.model_template != spec.model_template)
        throw Error(ErrorCode::InvalidSpec, "template table does not match the spec template");
    if (table.stage_rows() != spec.stage_count)
        throw Error(ErrorCode::InvalidSpec, "template table stage rows (" + std::to_string(table.stage_rows()) +
                                                ") differ from stage_count (" + std::to_string(spec.stage_count) + ")");
    const auto stages = static_cast<std::size_t>(spec.stage_count);
    if (model.depths.size() != stages || model.kernels.size() != stages || model.expansions.size() != stages ||
        quant.blocks.size() != stages)
        throw Error(ErrorCode::InvalidGenome, "genome stage count differs from spec");
    for (std::size_t s = 0; s < stages; ++s) {
        const int d = model.depths[s];
        const auto& choices = spec.depth_choices[s];
        if (std::find(choices.begin(), choices.end(), d) == choices.end())
            throw Error(ErrorCode::InvalidGenome, "stage" + std::to_string(s) + ".depth not in choice list");
        if (model.kernels[s].size() < static_cast<std::size_t>(d) || model.expansions[s].size() < static_cast<std::size_t>(d) ||
            quant.blocks[s].size() < static_cast<std::size_t>(d))
            throw Error(ErrorCode::InvalidGenome, "stage" + std::to_string(s) + " has fewer block genes than its depth");
    }

    const bool resnet = spec.model_template == ModelTemplate::ResNet50Like;
    const double wm = resnet ? model.width_mult : 1.0;
    const int fixed = quant.fixed_bits;
    auto scaled = [&](int base) { return resnet ? detail::make_divisible(base * wm) : static_cast<long long>(base); };

    detail::LayerBuilder out;
    long long hw = input_resolution;
    long long channels = 3;
    int stage = 0;
    for (const auto& row : table.rows) {
        switch (row.kind) {
        case TemplateRowKind::Stem: {
            const long long c = scaled(row.channels);
            out.add("stem", detail::slot_key(-1, -1, 0), ConvKind::Standard, row.kernel, channels, c, hw, row.stride,
                    fixed, fixed);
            hw /= row.stride;
            channels = c;
            break;
        }
        case TemplateRowKind::Pool:
            if (hw % row.stride != 0)
                throw Error(ErrorCode::InvalidSpec, "input resolution not divisible by cumulative strides");
            hw /= row.stride;
            break;
        case TemplateRowKind::FixedBottleneck: {
            const long long c = scaled(row.channels);
            out.add("fixed.dw", detail::slot_key(-1, -1, 1), ConvKind::Depthwise, 3, channels, channels, hw,
                    row.stride, fixed, fixed);
            hw /= row.stride;
            out.add("fixed.pw", detail::slot_key(-1, -1, 2), ConvKind::Pointwise, 1, channels, c, hw, 1, fixed,
                    fixed);
            channels = c;
            break;
        }
        case TemplateRowKind::Stage: {
            const auto s = static_cast<std::size_t>(stage);
            const long long c_out = scaled(row.channels);
            for (int b = 0; b < model.depths[s]; ++b) {
                const auto bi = static_cast<std::size_t>(b);
                const int stride = b == 0 ? row.stride : 1;
                const int k = model.kernels[s][bi];
                const double e = model.expansions[s][bi];
                const auto& p = quant.blocks[s][bi];
                const std::string prefix = "s" + std::to_string(stage) + ".b" + std::to_string(b);
                if (!resnet) {
                    const long long hidden = std::llround(static_cast<double>(channels) * e);
                    out.add(prefix + ".expand", detail::slot_key(stage, b, 0), ConvKind::Pointwise, 1, channels,
                            hidden, hw, 1, p.weight_bits[1], p.input_bits[1]);
                    out.add(prefix + ".dw", detail::slot_key(stage, b, 1), ConvKind::Depthwise, k, hidden, hidden, hw,
                            stride, p.weight_bits[0], p.input_bits[0]);
                    hw /= stride;
                    out.add(prefix + ".project", detail::slot_key(stage, b, 2), ConvKind::Pointwise, 1, hidden, c_out,
                            hw, 1, p.weight_bits[1], p.input_bits[1]);
                } else {
                    const long long mid = std::max<long long>(1, std::llround(static_cast<double>(c_out) * e));
                    out.add(prefix + ".reduce", detail::slot_key(stage, b, 0), ConvKind::Pointwise, 1, channels, mid,
                            hw, 1, p.weight_bits[1], p.input_bits[1]);
                    out.add(prefix + ".conv", detail::slot_key(stage, b, 1), ConvKind::Standard, k, mid, mid, hw,
                            stride, p.weight_bits[0], p.input_bits[0]);
                    hw /= stride;
                    out.add(prefix + ".expand", detail::slot_key(stage, b, 2), ConvKind::Pointwise, 1, mid, c_out, hw,
                            1, p.weight_bits[1], p.input_bits[1]);
                }
                channels = c_out;
            }
            ++stage;
            break;
        }
        case TemplateRowKind::LastConv: {
            const long long c = resnet ? scaled(row.channels) : row.channels;
            out.add("last_conv", detail::slot_key(-1, -1, 3), ConvKind::Pointwise, 1, channels, c, hw, row.stride,
                    fixed, fixed);
            hw /= row.stride;
            channels = c;
            break;
        }
        case TemplateRowKind::Classifier:
            out.add("classifier", detail::slot_key(-1, -1, 4), ConvKind::Linear, 1, channels, row.channels, hw, 1,
                    fixed, fixed);
            break;
        }
    }
    return std::move(out.layers);
}

// ---------------------------------------------------------------------------
// Synthetic values and histograms

struct Distribution {
    enum class Kind { UniformNonneg, HalfGaussian, Constant };
    Kind kind = Kind::UniformNonneg;
    double value = 0.0;  // Constant level, or HalfGaussian sigma

    static Distribution uniform() { return {Kind::UniformNonneg, 0.0}; }
    static Distribution half_gaussian(double sigma = 1.0 / 3.0) { return {Kind::HalfGaussian, sigma}; }
    static Distribution constant(double v) { return {Kind::Constant, v}; }
};

/// Draws `n` values in [0, 1]; stand-in for supernetwork weights/activations.
inline std::vector<double> synth_values(const Distribution& dist, std::size_t n, RngStream& rng) {
    std::vector<double> out(n);
    for (auto& v : out) {
        switch (dist.kind) {
        case Distribution::Kind::UniformNonneg: v = rng.uniform(); break;
        case Distribution::Kind::HalfGaussian: v = std::abs(rng.normal()) * dist.value; break;
        case Distribution::Kind::Constant: v = dist.value; break;
        }
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

struct Histogram {
    int precision = 0;
    std::vector<std::uint64_t> bins;
    std::uint64_t total = 0;
};

/// Quantizes magnitudes to 2^p levels: v -> floor(v * (2^p - 1) + 0.5).
inline Histogram build_histogram(const std::vector<double>& values, int precision) {
    if (precision < 1 || precision > 16)
        throw Error(ErrorCode::PrecisionOutOfRange, "precision " + std::to_string(precision) + " outside [1, 16]");
    Histogram h;
    h.precision = precision;
    const std::size_t levels = std::size_t{1} << precision;
    h.bins.assign(levels, 0);
    const double top = static_cast<double>(levels - 1);
    for (double v : values) {
        const double m = std::min(std::abs(v), 1.0);
        const auto bin = static_cast<std::size_t>(std::floor(m * top + 0.5));
        ++h.bins[std::min(bin, levels - 1)];
    }
    h.total = values.size();
    return h;
}

/// Mean normalized quantization level, sum(i * bins_i) / ((2^p - 1) * total).
inline double activity_factor(const Histogram& h) {
    if (h.total == 0) throw Error(ErrorCode::EmptyHistogram, "histogram has no samples");
    long double acc = 0;
    for (std::size_t i = 0; i < h.bins.size(); ++i) acc += static_cast<long double>(i) * h.bins[i];
    const long double top = static_cast<long double>(h.bins.size() - 1);
    return static_cast<double>(acc / (top * static_cast<long double>(h.total)));
}

struct LayerHistograms {
    Histogram input;
    Histogram weight;

    double activity() const { return activity_factor(input) * activity_factor(weight); }
};

struct SynthSettings {
    Distribution inputs = Distribution::uniform();
    Distribution weights = Distribution::half_gaussian();
    std::size_t samples = 1024;
    std::uint64_t seed = 0;
};

/// Histograms of synthetic inputs/weights per layer, quantized at the
/// layer's precisions. Values are keyed by the layer's slot, so the same
/// layer position sees the same data in every design.
inline std::vector<LayerHistograms> layer_histograms(const std::vector<LayerWorkload>& layers,
                                                     const SynthSettings& settings) {
    std::vector<LayerHistograms> out;
    out.reserve(layers.size());
    const RngStream root(settings.seed);
    for (const auto& l : layers) {
        RngStream in_rng = root.fork(l.slot * 2);
        RngStream w_rng = root.fork(l.slot * 2 + 1);
        out.push_back({build_histogram(synth_values(settings.inputs, settings.samples, in_rng), l.input_bits),
                       build_histogram(synth_values(settings.weights, settings.samples, w_rng), l.weight_bits)});
    }
    return out;
}

} // namespace cimnas
