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

// Analytical compute-in-memory cost model: maps layer workloads onto the
// crossbar / tile / group hierarchy, checks capacity, and estimates energy,
// delay and area. Every coefficient comes from a TechnologyProfile.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cimnas/error.hpp"
#include "cimnas/space.hpp"
#include "cimnas/workload.hpp"

namespace cimnas {

struct TechnologyProfile {
    std::string name;
    double reference_voltage = 0;     // V
    double cell_read_pj = 0;          // per cell per bit slice at the reference voltage
    double adc_coeff_pj = 0;          // conversion energy = coeff * 2^adc_bits
    double driver_pj = 0;             // per row activation
    double buffer_pj_per_byte = 0;
    double router_pj_per_byte_hop = 0;
    double dram_pj_per_byte = 0;      // weight swapping only
    double cell_area_um2 = 0;
    double adc_area_um2 = 0;
    double adc_share = 0;             // columns multiplexed onto one ADC
    double peripheral_area_um2 = 0;   // per macro: drivers, shift-add, local buffers
    double router_area_mm2 = 0;
    double glb_mm2_per_mb = 0;
    double tile_overhead = 0;         // fraction added to macro area for tile buffers
    double noc_bytes_per_ns = 0;      // per tile-group router
    double dram_bytes_per_ns = 0;

    /// Field table shared by the loader and the validator.
    template <class Fn>
    void for_each_field(Fn&& fn) {
        fn("reference_voltage", reference_voltage);
        fn("cell_read_pj", cell_read_pj);
        fn("adc_coeff_pj", adc_coeff_pj);
        fn("driver_pj", driver_pj);
        fn("buffer_pj_per_byte", buffer_pj_per_byte);
        fn("router_pj_per_byte_hop", router_pj_per_byte_hop);
        fn("dram_pj_per_byte", dram_pj_per_byte);
        fn("cell_area_um2", cell_area_um2);
        fn("adc_area_um2", adc_area_um2);
        fn("adc_share", adc_share);
        fn("peripheral_area_um2", peripheral_area_um2);
        fn("router_area_mm2", router_area_mm2);
        fn("glb_mm2_per_mb", glb_mm2_per_mb);
        fn("tile_overhead", tile_overhead);
        fn("noc_bytes_per_ns", noc_bytes_per_ns);
        fn("dram_bytes_per_ns", dram_bytes_per_ns);
    }
};

inline TechnologyProfile load_profile(const YAML::Node& root) {
    TechnologyProfile p;
    p.name = root["name"] ? root["name"].as<std::string>() : std::string("unnamed");
    p.for_each_field([&](const char* key, double& v) {
        if (!root[key]) throw Error(ErrorCode::MissingKey, std::string("profile.") + key);
        v = root[key].as<double>();
        if (!(v > 0)) throw Error(ErrorCode::InvalidSpec, std::string("profile.") + key + " must be > 0");
    });
    return p;
}

inline TechnologyProfile load_profile_file(const std::filesystem::path& path) {
    try {
        return load_profile(YAML::Load(read_text_file(path, "profile")));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::InvalidSpec, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Mapping

struct LayerMapping {
    long long crossbars = 0;
    long long row_tiles = 0;
    long long col_tiles = 0;
    long long first_macro = 0;  // sequential fill offset
    long long cells_per_weight = 0;
    long long programmed_cells = 0;
};

struct MappingResult {
    std::vector<LayerMapping> layers;
    long long required = 0;   // M
    long long available = 0;
    long long largest_layer = 0;
    std::vector<std::pair<int, int>> swap_groups;  // inclusive layer ranges

    long long tile_of(int layer, int c_per_tile) const {
        return layers.at(static_cast<std::size_t>(layer)).first_macro / c_per_tile;
    }
};

inline long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

inline int ceil_log2(long long v) {
    int bits = 0;
    while ((1LL << bits) < v) ++bits;
    return bits;
}

inline long long cells_per_weight(int weight_bits, int bits_cell) { return ceil_div(weight_bits, bits_cell); }

/// Crossbar requirement of one layer on a given array geometry.
///
/// Dense: ceil(R / rows) * ceil(C * cpw / cols). Depthwise channels are packed
/// block-diagonally, min(rows / k^2, cols / cpw) channels per crossbar.
inline LayerMapping map_layer(const LayerWorkload& l, const HardwareConfig& hw) {
    LayerMapping m;
    m.cells_per_weight = cells_per_weight(l.weight_bits, hw.bits_cell);
    const long long rows = hw.xbar_rows;
    const long long cols = hw.xbar_cols;
    if (l.kind == ConvKind::Depthwise) {
        const long long k2 = l.rows;
        if (k2 <= rows && m.cells_per_weight <= cols) {
            const long long per_xbar = std::max(1LL, std::min(rows / k2, cols / m.cells_per_weight));
            m.crossbars = ceil_div(l.cols, per_xbar);
            m.row_tiles = 1;
            m.col_tiles = m.crossbars;
        } else {
            m.row_tiles = ceil_div(k2, rows);
            const long long per_channel = m.row_tiles * ceil_div(m.cells_per_weight, cols);
            m.crossbars = l.cols * per_channel;
            m.col_tiles = m.crossbars / m.row_tiles;
        }
        m.programmed_cells = k2 * l.cols * m.cells_per_weight;
    } else {
        m.row_tiles = ceil_div(l.rows, rows);
        m.col_tiles = ceil_div(l.cols * m.cells_per_weight, cols);
        m.crossbars = m.row_tiles * m.col_tiles;
        m.programmed_cells = l.rows * l.cols * m.cells_per_weight;
    }
    return m;
}

inline MappingResult map_network(const std::vector<LayerWorkload>& layers, const HardwareConfig& hw) {
    if (layers.empty()) throw Error(ErrorCode::InvalidGenome, "network has no layers");
    MappingResult r;
    r.available = hw.macros();
    r.layers.reserve(layers.size());
    for (const auto& l : layers) {
        LayerMapping m = map_layer(l, hw);
        m.first_macro = r.required;
        r.required += m.crossbars;
        r.largest_layer = std::max(r.largest_layer, m.crossbars);
        r.layers.push_back(m);
    }
    // Greedy layer groups for weight swapping; a layer larger than the chip
    // forms its own (unrunnable) group.
    int first = 0;
    long long used = 0;
    for (int i = 0; i < static_cast<int>(r.layers.size()); ++i) {
        const long long need = r.layers[static_cast<std::size_t>(i)].crossbars;
        if (i > first && used + need > r.available) {
            r.swap_groups.emplace_back(first, i - 1);
            first = i;
            used = 0;
        }
        used += need;
    }
    r.swap_groups.emplace_back(first, static_cast<int>(r.layers.size()) - 1);
    return r;
}

/// Capacity test: stationary mode needs every layer resident at once,
/// swapping mode only needs the largest layer to fit.
inline bool check_feasibility(const MappingResult& m, ExecutionMode mode) {
    if (mode == ExecutionMode::WeightStationary) return m.available >= m.required;
    return m.available >= m.largest_layer;
}

// ---------------------------------------------------------------------------
// Area / energy / delay

inline int adc_bits(const HardwareConfig& hw) { return hw.bits_cell + ceil_log2(hw.xbar_rows) - 1; }

inline double compute_area(const HardwareConfig& hw, const TechnologyProfile& tech) {
    const double adcs = std::ceil(hw.xbar_cols / tech.adc_share);
    const double macro_um2 = static_cast<double>(hw.xbar_rows) * hw.xbar_cols * tech.cell_area_um2 +
                             tech.adc_area_um2 * adcs + tech.peripheral_area_um2;
    return static_cast<double>(hw.macros()) * macro_um2 * (1.0 + tech.tile_overhead) * 1e-6 +
           hw.g_per_chip * tech.router_area_mm2 + hw.glb_mb * tech.glb_mm2_per_mb;
}

/// Per-layer energy terms in pJ.
struct LayerEnergy {
    double driver = 0;
    double cell_read = 0;
    double adc = 0;
    double movement = 0;
    double dram = 0;

    double total() const { return driver + cell_read + adc + movement + dram; }
};

inline double router_hops(const HardwareConfig& hw) { return std::ceil(std::sqrt(static_cast<double>(hw.g_per_chip))); }

/// Inputs are streamed bit-serially through 1-bit DACs.
inline long long bit_slices(const LayerWorkload& l) { return l.input_bits; }

inline LayerEnergy layer_energy(const LayerWorkload& l, const LayerMapping& m, double activity,
                                const HardwareConfig& hw, const TechnologyProfile& tech) {
    const double p = static_cast<double>(l.positions);
    const double slices = static_cast<double>(bit_slices(l));
    double row_activations = 0;
    double cell_reads = 0;
    double conversions = 0;
    if (l.kind == ConvKind::Depthwise) {
        row_activations = p * slices * static_cast<double>(l.rows * l.cols);
        cell_reads = row_activations * static_cast<double>(m.cells_per_weight);
        conversions = p * slices * static_cast<double>(l.cols * m.cells_per_weight) * static_cast<double>(m.row_tiles);
    } else {
        row_activations = p * slices * static_cast<double>(l.rows * m.col_tiles);
        cell_reads = p * slices * static_cast<double>(l.rows * l.cols * m.cells_per_weight);
        conversions = p * slices * static_cast<double>(m.row_tiles * l.cols * m.cells_per_weight);
    }
    const double v = hw.v_op / tech.reference_voltage;
    LayerEnergy e;
    e.driver = row_activations * tech.driver_pj;
    e.cell_read = cell_reads * tech.cell_read_pj * v * v * activity;
    e.adc = conversions * tech.adc_coeff_pj * std::ldexp(1.0, adc_bits(hw));
    e.movement = static_cast<double>(l.traffic_bytes()) *
                 (tech.buffer_pj_per_byte + router_hops(hw) * tech.router_pj_per_byte_hop);
    if (hw.mode == ExecutionMode::WeightSwapping)
        e.dram = static_cast<double>(l.weight_bytes()) * tech.dram_pj_per_byte;
    return e;
}

/// Total energy in mJ, summed in layer order.
inline double compute_energy(const MappingResult& mapping, const std::vector<LayerWorkload>& layers,
                             const std::vector<LayerHistograms>& hist, const HardwareConfig& hw,
                             const TechnologyProfile& tech) {
    if (hist.size() != layers.size())
        throw Error(ErrorCode::MissingHistogram,
                    std::to_string(layers.size()) + " layers but " + std::to_string(hist.size()) + " histograms");
    double pj = 0;
    for (std::size_t i = 0; i < layers.size(); ++i)
        pj += layer_energy(layers[i], mapping.layers.at(i), hist[i].activity(), hw, tech).total();
    return pj * 1e-9;
}

/// Per-layer delay in us: bit-serial compute with all row tiles in parallel,
/// plus activation transfer over the tile-group network (and DRAM weight
/// loading when swapping).
inline double layer_delay(const LayerWorkload& l, const HardwareConfig& hw, const TechnologyProfile& tech) {
    const double compute_ns = static_cast<double>(l.positions) * static_cast<double>(bit_slices(l)) * hw.t_cycle_ns;
    const double transfer_ns = static_cast<double>(l.traffic_bytes()) / (tech.noc_bytes_per_ns * hw.g_per_chip);
    double dram_ns = 0;
    if (hw.mode == ExecutionMode::WeightSwapping)
        dram_ns = static_cast<double>(l.weight_bytes()) / tech.dram_bytes_per_ns;
    return (compute_ns + transfer_ns + dram_ns) * 1e-3;
}

inline double compute_delay(const std::vector<LayerWorkload>& layers, const HardwareConfig& hw,
                            const TechnologyProfile& tech) {
    double us = 0;
    for (const auto& l : layers) us += layer_delay(l, hw, tech);
    return us;
}

struct HardwareMetrics {
    double energy_mj = 0;
    double delay_us = 0;
    double area_mm2 = 0;
    double edap = 0;  // mJ * ms * mm^2
    double tops_per_w = 0;
    double tops_per_mm2 = 0;
    double utilization = 0;
    bool feasible = false;
    long long required_macros = 0;
    long long available_macros = 0;
};

inline double edap(double energy_mj, double delay_us, double area_mm2) {
    return energy_mj * (delay_us / 1000.0) * area_mm2;
}

/// Full hardware evaluation. Infeasible designs still get every metric so
/// they can be diagnosed; `feasible` carries the capacity verdict.
inline HardwareMetrics evaluate_hardware(const std::vector<LayerWorkload>& layers,
                                         const std::vector<LayerHistograms>& hist, const HardwareConfig& hw,
                                         const TechnologyProfile& tech) {
    const MappingResult mapping = map_network(layers, hw);
    HardwareMetrics m;
    m.feasible = check_feasibility(mapping, hw.mode);
    m.required_macros = mapping.required;
    m.available_macros = mapping.available;
    m.energy_mj = compute_energy(mapping, layers, hist, hw, tech);
    m.delay_us = compute_delay(layers, hw, tech);
    m.area_mm2 = compute_area(hw, tech);
    m.edap = edap(m.energy_mj, m.delay_us, m.area_mm2);

    long long macs = 0;
    long long programmed = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        macs += layers[i].macs;
        programmed += mapping.layers[i].programmed_cells;
    }
    const double ops = 2.0 * static_cast<double>(macs);
    m.tops_per_w = ops / (m.energy_mj * 1e-3) / 1e12;
    m.tops_per_mm2 = ops / (m.delay_us * 1e-6) / 1e12 / m.area_mm2;
    const double chip_cells = static_cast<double>(hw.macros()) * hw.xbar_rows * hw.xbar_cols;
    const double loads = hw.mode == ExecutionMode::WeightSwapping ? static_cast<double>(mapping.swap_groups.size()) : 1.0;
    m.utilization = std::min(1.0, static_cast<double>(programmed) / (chip_cells * loads));
    return m;
}

} // namespace cimnas
