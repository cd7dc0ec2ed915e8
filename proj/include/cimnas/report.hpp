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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cimnas/error.hpp"
#include "cimnas/evolve.hpp"

namespace cimnas {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kArchiveSchema = "# cimnas-archive v1";
inline constexpr std::string_view kConvergenceSchema = "# cimnas-convergence v1";
inline constexpr std::string_view kTopKSchema = "# cimnas-topk v1";
inline constexpr std::string_view kCompareSchema = "# cimnas-compare v1";
inline constexpr std::string_view kArchiveColumns =
    "generation,order,hits,encoding,energy_mj,delay_us,area_mm2,edap,accuracy,score,feasible";

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string join_encoding(const std::vector<int>& idx) { return encoding_key(idx); }

inline std::vector<int> split_encoding(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, '-')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw Error(ErrorCode::SchemaMismatch, "bad encoding '" + text + "'");
        }
    }
    return out;
}

inline std::string anchor_text(const std::optional<Anchor>& a) {
    if (!a) return "none";
    return fmt(a->energy_mj) + "," + fmt(a->delay_us) + "," + fmt(a->area_mm2) + "," + fmt(a->accuracy);
}

// ---------------------------------------------------------------------------
// Manifest

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string spec_hash;
    std::string profile_hash;
    std::string tool_version{kToolVersion};
    double duration_s = 0;
};

inline std::string hash_text(std::string_view text) { return hex64(fnv1a(text)); }

inline void write_manifest(const RunManifest& m, std::ostream& out) {
    out << "command=" << m.command << '\n'
        << "config_path=" << m.config_path << '\n'
        << "config_hash=" << m.config_hash << '\n'
        << "seed=" << m.seed << '\n'
        << "spec_hash=" << m.spec_hash << '\n'
        << "profile_hash=" << m.profile_hash << '\n'
        << "tool_version=" << m.tool_version << '\n'
        << "duration_s=" << fmt(m.duration_s) << '\n';
}

// ---------------------------------------------------------------------------
// Archive CSV

inline void write_archive_row(std::ostream& out, const ArchiveEntry& e) {
    const auto& m = e.eval.metrics;
    out << e.generation << ',' << e.order << ',' << e.hits << ',' << join_encoding(e.design.encoding) << ','
        << fmt(m.energy_mj) << ',' << fmt(m.delay_us) << ',' << fmt(m.area_mm2) << ',' << fmt(m.edap) << ','
        << fmt(e.eval.accuracy) << ',' << fmt(e.score) << ',' << (e.feasible ? "true" : "false") << '\n';
}

inline void write_archive_header(std::ostream& out, std::string_view manifest, const std::optional<Anchor>& anchor) {
    out << kArchiveSchema << '\n' << "# manifest=" << manifest << '\n' << "# anchor=" << anchor_text(anchor) << '\n'
        << kArchiveColumns << '\n';
}

inline void write_archive(const Archive& archive, std::ostream& out, std::string_view manifest) {
    write_archive_header(out, manifest, archive.anchor);
    for (const auto& e : archive.entries()) write_archive_row(out, e);
}

/// One parsed archive row (metrics that are not persisted stay zero).
struct ArchiveRow {
    int generation = 0;
    std::size_t order = 0;
    int hits = 0;
    std::vector<int> encoding;
    double energy_mj = 0, delay_us = 0, area_mm2 = 0, edap = 0, accuracy = 0, score = 0;
    bool feasible = false;
};

struct ArchiveFile {
    std::string manifest;
    std::string anchor;
    std::vector<ArchiveRow> rows;
};

inline ArchiveFile read_archive(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kArchiveSchema)
        throw Error(ErrorCode::SchemaMismatch, "expected '" + std::string(kArchiveSchema) + "', found '" + line + "'");
    ArchiveFile f;
    auto meta = [&](std::string_view key) {
        if (!std::getline(in, line) || line.rfind(std::string("# ") + std::string(key) + "=", 0) != 0)
            throw Error(ErrorCode::SchemaMismatch, "missing '" + std::string(key) + "' header line");
        return line.substr(key.size() + 3);
    };
    f.manifest = meta("manifest");
    f.anchor = meta("anchor");
    if (!std::getline(in, line) || line != kArchiveColumns)
        throw Error(ErrorCode::SchemaMismatch, "unexpected archive columns '" + line + "'");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 11) throw Error(ErrorCode::SchemaMismatch, "archive row has " + std::to_string(cells.size()) + " cells");
        ArchiveRow r;
        try {
            r.generation = std::stoi(cells[0]);
            r.order = std::stoul(cells[1]);
            r.hits = std::stoi(cells[2]);
            r.encoding = split_encoding(cells[3]);
            r.energy_mj = std::stod(cells[4]);
            r.delay_us = std::stod(cells[5]);
            r.area_mm2 = std::stod(cells[6]);
            r.edap = std::stod(cells[7]);
            r.accuracy = std::stod(cells[8]);
            r.score = std::stod(cells[9]);
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::SchemaMismatch, "unparsable archive row '" + line + "'");
        }
        if (cells[10] != "true" && cells[10] != "false") throw Error(ErrorCode::SchemaMismatch, "bad feasible flag");
        r.feasible = cells[10] == "true";
        f.rows.push_back(std::move(r));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Convergence, top-k and comparison tables

inline void write_convergence(const std::vector<GenerationStats>& stats, std::ostream& out, std::string_view manifest) {
    out << kConvergenceSchema << '\n' << "# manifest=" << manifest << '\n'
        << "generation,best_score,mean_score,feasible_fraction,evaluated,cache_hits\n";
    for (const auto& s : stats)
        out << s.generation << ',' << fmt(s.best_score) << ',' << fmt(s.mean_score) << ',' << fmt(s.feasible_fraction)
            << ',' << s.evaluated << ',' << s.cache_hits << '\n';
}

inline void write_top_k(const TopK& top, const Diversity& div, std::ostream& out, std::string_view manifest) {
    out << kTopKSchema << '\n' << "# manifest=" << manifest << '\n'
        << "# diversity=" << fmt(div.value) << (div.warning ? " (fewer than two designs)" : "") << '\n';
    if (top.short_of_k) out << "# warning=fewer feasible designs than requested\n";
    out << "rank," << kArchiveColumns << '\n';
    for (std::size_t i = 0; i < top.entries.size(); ++i) {
        out << i + 1 << ',';
        write_archive_row(out, top.entries[i]);
    }
}

/// One row of the method comparison (baselines and searchers).
struct CompareRow {
    std::string method;
    HardwareMetrics metrics;
    double edap = 0;
    double accuracy = 0;
    double score = 0;
    double diversity = 0;
    bool has_diversity = false;
};

inline constexpr std::string_view kCompareColumns =
    "method,energy_mj,delay_us,area_mm2,edap,accuracy,score,tops_per_w,tops_per_mm2,utilization,diversity,"
    "edap_ratio_baseline1,edap_ratio_baseline2";

/// Ratio columns are baseline EDAP divided by the row's EDAP.
inline void write_comparison(const std::vector<CompareRow>& rows, double baseline1_edap, double baseline2_edap,
                             std::ostream& out, std::string_view manifest, const ObjectiveSpec& objective) {
    out << kCompareSchema << '\n' << "# manifest=" << manifest << '\n' << "# objective=" << to_string(objective) << '\n'
        << "# anchor=" << anchor_text(objective.anchor) << '\n' << kCompareColumns << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << fmt(r.metrics.energy_mj) << ',' << fmt(r.metrics.delay_us) << ','
            << fmt(r.metrics.area_mm2) << ',' << fmt(r.edap) << ',' << fmt(r.accuracy) << ',' << fmt(r.score) << ','
            << fmt(r.metrics.tops_per_w) << ',' << fmt(r.metrics.tops_per_mm2) << ',' << fmt(r.metrics.utilization) << ','
            << (r.has_diversity ? fmt(r.diversity) : std::string("")) << ',' << fmt(baseline1_edap / r.edap) << ','
            << fmt(baseline2_edap / r.edap) << '\n';
    }
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << content;
}

} // namespace cimnas
