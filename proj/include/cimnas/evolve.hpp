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

// Evolutionary search core: objectives, real-coded operators on index
// vectors, the deduplicating archive, the generational loop with
// feasibility-filtered sampling, final selection, diversity, the two staged
// comparators and the two baselines.

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cimnas/error.hpp"
#include "cimnas/evaluator.hpp"
#include "cimnas/rng.hpp"
#include "cimnas/space.hpp"

namespace cimnas {

// ---------------------------------------------------------------------------
// Objectives

enum class ObjectiveMode { EdapAcc, DelayAcc, EnergyAreaAcc, Priority };

/// Normalization point for the priority objective.
struct Anchor {
    double energy_mj = 0;
    double delay_us = 0;
    double area_mm2 = 0;
    double accuracy = 0;
};

struct ObjectiveSpec {
    ObjectiveMode mode = ObjectiveMode::EdapAcc;
    double a = 1, b = 1, c = 1, d = 1;  // priority exponents for E, D, A, Acc
    std::optional<Anchor> anchor;

    bool needs_anchor() const { return mode == ObjectiveMode::Priority; }
};

/// Accepts "edap", "delay", "energy_area" and "priority:a=..,b=..,c=..,d=..".
inline ObjectiveSpec parse_objective(std::string_view text) {
    ObjectiveSpec o;
    if (text == "edap") return o;
    if (text == "delay") {
        o.mode = ObjectiveMode::DelayAcc;
        return o;
    }
    if (text == "energy_area") {
        o.mode = ObjectiveMode::EnergyAreaAcc;
        return o;
    }
    constexpr std::string_view prefix = "priority";
    if (text.substr(0, prefix.size()) != prefix) throw Error(ErrorCode::InvalidSpec, "unknown objective '" + std::string(text) + "'");
    o.mode = ObjectiveMode::Priority;
    std::string_view rest = text.substr(prefix.size());
    if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq != 1)
            throw Error(ErrorCode::InvalidSpec, "bad priority coefficient '" + std::string(item) + "'");
        double v = 0;
        try {
            v = std::stod(std::string(item.substr(2)));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidSpec, "bad priority coefficient '" + std::string(item) + "'");
        }
        if (v < 0 || v > 1) throw Error(ErrorCode::InvalidSpec, "priority coefficients must lie in [0, 1]");
        switch (item[0]) {
        case 'a': o.a = v; break;
        case 'b': o.b = v; break;
        case 'c': o.c = v; break;
        case 'd': o.d = v; break;
        default: throw Error(ErrorCode::InvalidSpec, "unknown priority coefficient '" + std::string(item) + "'");
        }
    }
    return o;
}

inline std::string to_string(const ObjectiveSpec& o) {
    switch (o.mode) {
    case ObjectiveMode::EdapAcc: return "edap";
    case ObjectiveMode::DelayAcc: return "delay";
    case ObjectiveMode::EnergyAreaAcc: return "energy_area";
    case ObjectiveMode::Priority: break;
    }
    std::ostringstream os;
    os << "priority:a=" << o.a << ",b=" << o.b << ",c=" << o.c << ",d=" << o.d;
    return os.str();
}

inline Anchor anchor_of(const HardwareMetrics& m, double accuracy) {
    return {m.energy_mj, m.delay_us, m.area_mm2, accuracy};
}

/// Search score, lower is better.
///
///   edap         E[mJ] * D[ms] * A[mm^2] / Acc[%]
///   delay        D[ns] / Acc[%]   (the unit convention of the published D/Acc values)
///   energy_area  E[mJ] * A[mm^2] / Acc[%]
///   priority     (E/E0)^a (D/D0)^b (A/A0)^c / (Acc/Acc0)^d
inline double score(const HardwareMetrics& m, double accuracy, const ObjectiveSpec& o) {
    if (!(accuracy > 0)) throw Error(ErrorCode::ZeroAccuracy, "accuracy must be > 0");
    switch (o.mode) {
    case ObjectiveMode::EdapAcc: return m.energy_mj * (m.delay_us / 1000.0) * m.area_mm2 / accuracy;
    case ObjectiveMode::DelayAcc: return m.delay_us * 1000.0 / accuracy;
    case ObjectiveMode::EnergyAreaAcc: return m.energy_mj * m.area_mm2 / accuracy;
    case ObjectiveMode::Priority: break;
    }
    if (!o.anchor) throw Error(ErrorCode::UnsetAnchor, "priority objective used before the first sample was evaluated");
    const Anchor& n = *o.anchor;
    return std::pow(m.energy_mj / n.energy_mj, o.a) * std::pow(m.delay_us / n.delay_us, o.b) *
           std::pow(m.area_mm2 / n.area_mm2, o.c) / std::pow(accuracy / n.accuracy, o.d);
}

// ---------------------------------------------------------------------------
// Configuration

struct SearchConfig {
    int population = 150;
    int generations = 70;
    double crossover_prob = 0.95;
    double mutation_prob = 0.95;
    double eta_c = 3.0;
    double eta_m = 3.0;
    std::uint64_t seed = 0;
    int workers = 1;
    ObjectiveSpec objective;
    double area_constraint = 800.0;  // mm^2
    long long max_sampling_attempts = 200000;
    int max_repair_attempts = 64;
    int max_duplicate_retries = 32;  // regenerations of an offspring that repeats a known design
};

inline void validate(const SearchConfig& c) {
    if (c.population < 2) throw Error(ErrorCode::InvalidSpec, "search.population must be >= 2");
    if (c.generations < 0) throw Error(ErrorCode::InvalidSpec, "search.generations must be >= 0");
    if (c.crossover_prob < 0 || c.crossover_prob > 1 || c.mutation_prob < 0 || c.mutation_prob > 1)
        throw Error(ErrorCode::InvalidSpec, "search probabilities must lie in [0, 1]");
    if (!(c.eta_c > 0) || !(c.eta_m > 0)) throw Error(ErrorCode::InvalidSpec, "distribution indices must be > 0");
    if (!(c.area_constraint > 0)) throw Error(ErrorCode::InvalidSpec, "search.area_constraint must be > 0");
    if (c.workers < 1) throw Error(ErrorCode::InvalidSpec, "search.workers must be >= 1");
}

// ---------------------------------------------------------------------------
// Variation operators (continuous index space, round and clamp)

/// SBX spread factor for a uniform draw u in [0, 1).
inline double sbx_beta(double u, double eta) {
    if (u <= 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0));
    return std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

/// Unrounded children 0.5[(1 + beta) pa + (1 - beta) pb] and 0.5[(1 - beta) pa + (1 + beta) pb].
inline std::pair<double, double> sbx_children(double pa, double pb, double beta) {
    return {0.5 * ((1.0 + beta) * pa + (1.0 - beta) * pb), 0.5 * ((1.0 - beta) * pa + (1.0 + beta) * pb)};
}

inline int round_clamp(double v, int max_index) {
    if (!(v > 0)) return 0;  // also maps NaN to 0
    if (v >= max_index) return max_index;
    return static_cast<int>(std::lround(v));
}

/// Polynomial mutation step in units of the gene range.
inline double poly_delta(double u, double eta) {
    if (u < 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0)) - 1.0;
    return 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (eta + 1.0));
}

/// Largest valid index per gene.
inline std::vector<int> gene_bounds(const SearchSpaceSpec& spec) {
    std::vector<int> out;
    out.reserve(spec.genes.size());
    for (const auto& g : spec.genes) out.push_back(static_cast<int>(g.choices) - 1);
    return out;
}

/// Gene-wise SBX. Each gene pair is crossed with probability `prob`;
/// genes with `free[i] == false` (when a mask is given) are copied.
inline std::pair<std::vector<int>, std::vector<int>> sbx_crossover(const std::vector<int>& pa, const std::vector<int>& pb,
                                                                   double eta, double prob, RngStream& rng,
                                                                   const std::vector<int>& bounds,
                                                                   const std::vector<bool>& free = {}) {
    if (pa.size() != pb.size() || pa.size() != bounds.size())
        throw Error(ErrorCode::LengthMismatch, "parents and bounds must have equal length");
    std::vector<int> ca = pa, cb = pb;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (!free.empty() && !free[i]) continue;
        if (rng.uniform() >= prob) continue;
        const double beta = sbx_beta(rng.uniform(), eta);
        const auto [x, y] = sbx_children(pa[i], pb[i], beta);
        ca[i] = round_clamp(x, bounds[i]);
        cb[i] = round_clamp(y, bounds[i]);
    }
    return {std::move(ca), std::move(cb)};
}

inline std::vector<int> polynomial_mutation(std::vector<int> genome, double eta, double prob, RngStream& rng,
                                            const std::vector<int>& bounds, const std::vector<bool>& free = {}) {
    if (genome.size() != bounds.size()) throw Error(ErrorCode::LengthMismatch, "genome and bounds differ in length");
    for (std::size_t i = 0; i < genome.size(); ++i) {
        if (!free.empty() && !free[i]) continue;
        if (rng.uniform() >= prob) continue;
        const double delta = poly_delta(rng.uniform(), eta);
        genome[i] = round_clamp(genome[i] + delta * bounds[i], bounds[i]);
    }
    return genome;
}

// ---------------------------------------------------------------------------
// Archive

struct ArchiveEntry {
    DesignPoint design;  // canonical (inactive-block genes zeroed)
    Evaluation eval;
    double score = 0;
    int generation = 0;
    bool feasible = false;  // capacity fit and area constraint
    int hits = 1;
    std::size_t order = 0;  // insertion index
};

inline std::string encoding_key(const std::vector<int>& idx) {
    std::string key;
    key.reserve(idx.size() * 2);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) key += '-';
        key += std::to_string(idx[i]);
    }
    return key;
}

/// Every evaluated design, once per canonical encoding.
class Archive {
public:
    const ArchiveEntry* find(const std::vector<int>& canonical) const {
        const auto it = index_.find(encoding_key(canonical));
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    const ArchiveEntry& insert(ArchiveEntry e) {
        const std::string key = encoding_key(e.design.encoding);
        if (const auto it = index_.find(key); it != index_.end()) {
            ++entries_[it->second].hits;
            return entries_[it->second];
        }
        e.order = entries_.size();
        index_.emplace(key, entries_.size());
        entries_.push_back(std::move(e));
        return entries_.back();
    }

    void record_hit(const std::vector<int>& canonical) {
        if (const auto it = index_.find(encoding_key(canonical)); it != index_.end()) ++entries_[it->second].hits;
    }

    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::optional<Anchor> anchor;

private:
    std::vector<ArchiveEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct GenerationStats {
    int generation = 0;
    double best_score = 0;       // best feasible archived score so far
    double mean_score = 0;       // mean over the current population
    double feasible_fraction = 0;  // share of generated candidates that passed the fit test
    std::size_t evaluated = 0;   // new archive entries this generation
    std::size_t cache_hits = 0;
};

struct SearchResult {
    Archive archive;
    std::vector<GenerationStats> convergence;
    std::size_t rejections = 0;  // initial-sampling rejections
    ObjectiveSpec objective;     // with the anchor used, if any
};

struct TopK {
    std::vector<ArchiveEntry> entries;
    bool short_of_k = false;  // fewer eligible entries than requested
};

/// Best k entries over the whole archive; ties go to the earlier generation,
/// then to the earlier insertion.
inline TopK select_top_k(const Archive& archive, std::size_t k, bool feasible_only = true) {
    std::vector<const ArchiveEntry*> pool;
    for (const auto& e : archive.entries())
        if (!feasible_only || e.feasible) pool.push_back(&e);
    std::stable_sort(pool.begin(), pool.end(), [](const ArchiveEntry* x, const ArchiveEntry* y) {
        if (x->score != y->score) return x->score < y->score;
        if (x->generation != y->generation) return x->generation < y->generation;
        return x->order < y->order;
    });
    TopK out;
    out.short_of_k = pool.size() < k;
    for (std::size_t i = 0; i < std::min(k, pool.size()); ++i) out.entries.push_back(*pool[i]);
    return out;
}

struct Diversity {
    double value = 0;
    bool warning = false;  // fewer than two designs
};

/// Mean pairwise normalized Hamming distance between index vectors.
inline Diversity diversity(const std::vector<std::vector<int>>& designs) {
    if (designs.size() < 2) return {0.0, true};
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < designs.size(); ++i) {
        for (std::size_t j = i + 1; j < designs.size(); ++j) {
            if (designs[i].size() != designs[j].size())
                throw Error(ErrorCode::LengthMismatch, "designs have different gene counts");
            std::size_t diff = 0;
            for (std::size_t g = 0; g < designs[i].size(); ++g) diff += designs[i][g] != designs[j][g];
            sum += designs[i].empty() ? 0.0 : static_cast<double>(diff) / static_cast<double>(designs[i].size());
            ++pairs;
        }
    }
    return {sum / static_cast<double>(pairs), false};
}

inline Diversity diversity(const std::vector<ArchiveEntry>& entries) {
    std::vector<std::vector<int>> enc;
    for (const auto& e : entries) enc.push_back(e.design.encoding);
    return diversity(enc);
}

// ---------------------------------------------------------------------------
// Parallel evaluation

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; exceptions are rethrown for the lowest index.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < n; i += step) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, std::min<int>(workers, static_cast<int>(n))));
    if (threads <= 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Generational engine

/// One evolutionary run over a subset of genes. The joint search frees every
/// gene; the staged comparators freeze groups and swap in their own scores.
struct StageSetup {
    std::vector<bool> free;  // empty: every gene is searchable
    std::vector<int> base;   // values of frozen genes
    bool enforce_fit = true; // capacity fit and area constraint on every candidate
    int generations = 0;
    std::uint64_t seed = 0;
    /// Score of an evaluation; receives the run's anchor (set from the first
    /// feasible evaluated sample when `needs_anchor`).
    std::function<double(const Evaluation&, const std::optional<Anchor>&)> score;
    bool needs_anchor = false;
    std::optional<Anchor> anchor;
};

namespace detail {

class Engine {
public:
    Engine(const SearchSpaceSpec& spec, const SearchConfig& config, const DesignEvaluator& evaluator,
           const StageSetup& setup)
        : spec_(spec), config_(config), eval_(evaluator), setup_(setup), bounds_(gene_bounds(spec)),
          sampling_(RngStream::named(setup.seed, "sampling")), selection_(RngStream::named(setup.seed, "selection")),
          crossover_(RngStream::named(setup.seed, "crossover")), mutation_(RngStream::named(setup.seed, "mutation")) {
        if (!setup_.free.empty() && setup_.free.size() != spec.genes.size())
            throw Error(ErrorCode::LengthMismatch, "gene mask length differs from spec");
        if (!setup_.base.empty() && setup_.base.size() != spec.genes.size())
            throw Error(ErrorCode::LengthMismatch, "base encoding length differs from spec");
        result_.archive.anchor = setup_.anchor;
    }

    SearchResult run() {
        std::vector<std::vector<int>> population = initial_population();
        std::vector<double> scores = evaluate(population, 0, static_cast<double>(population.size()) /
                                                                 static_cast<double>(population.size() + result_.rejections));
        for (int g = 1; g <= setup_.generations; ++g) {
            double feasible_fraction = 1.0;
            population = next_generation(population, scores, feasible_fraction);
            scores = evaluate(population, g, feasible_fraction);
        }
        return std::move(result_);
    }

private:
    bool is_free(std::size_t i) const { return setup_.free.empty() || setup_.free[i]; }

    bool acceptable(const std::vector<int>& idx) const {
        if (!setup_.enforce_fit) return true;
        const FitCheck f = eval_.fits(decode(spec_, idx));
        return f.memory_fit && f.area_mm2 <= config_.area_constraint;
    }

    std::vector<std::vector<int>> initial_population() {
        std::vector<std::vector<int>> pop;
        long long attempts = 0;
        while (pop.size() < static_cast<std::size_t>(config_.population)) {
            if (attempts >= config_.max_sampling_attempts)
                throw Error(ErrorCode::ExhaustedSampling,
                            "no feasible design after " + std::to_string(attempts) + " draws (" +
                                std::to_string(pop.size()) + " of " + std::to_string(config_.population) + " found)");
            ++attempts;
            std::vector<int> idx(spec_.genes.size());
            for (std::size_t i = 0; i < idx.size(); ++i)
                idx[i] = is_free(i) ? static_cast<int>(sampling_.below(spec_.genes[i].choices)) : setup_.base.at(i);
            if (!acceptable(idx)) {
                ++result_.rejections;
                continue;
            }
            pop.push_back(std::move(idx));
        }
        return pop;
    }

    /// Evaluates uncached candidates (in parallel), archives them in candidate
    /// order, and returns the population's scores.
    std::vector<double> evaluate(const std::vector<std::vector<int>>& pop, int generation, double feasible_fraction) {
        std::vector<std::vector<int>> canon(pop.size());
        std::vector<std::size_t> fresh;
        std::unordered_map<std::string, std::size_t> seen;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            canon[i] = canonical_encoding(spec_, pop[i]);
            const std::string key = encoding_key(canon[i]);
            if (result_.archive.find(canon[i]) || seen.count(key)) {
                ++hits;
                continue;
            }
            seen.emplace(key, i);
            fresh.push_back(i);
        }
        std::vector<DesignPoint> designs(fresh.size());
        std::vector<Evaluation> evals(fresh.size());
        parallel_for(fresh.size(), config_.workers, [&](std::size_t j) {
            designs[j] = decode(spec_, canon[fresh[j]]);
            try {
                evals[j] = eval_.evaluate(designs[j]);
            } catch (const Error& e) {
                throw Error(e.code(), "generation " + std::to_string(generation) + ", candidate " +
                                          std::to_string(fresh[j]) + ": " + e.what());
            }
        });
        for (std::size_t j = 0; j < fresh.size(); ++j) {
            const auto& m = evals[j].metrics;
            const bool feasible = m.feasible && m.area_mm2 <= config_.area_constraint;
            if (setup_.needs_anchor && !result_.archive.anchor && feasible)
                result_.archive.anchor = anchor_of(m, evals[j].accuracy);
        }
        std::size_t next = 0;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (next < fresh.size() && fresh[next] == i) {
                const auto& ev = evals[next];
                const bool feasible = ev.metrics.feasible && ev.metrics.area_mm2 <= config_.area_constraint;
                ArchiveEntry e;
                e.design = std::move(designs[next]);
                e.eval = ev;
                e.generation = generation;
                e.feasible = feasible;
                e.score = (setup_.enforce_fit && !feasible) ? std::numeric_limits<double>::infinity()
                                                            : setup_.score(ev, result_.archive.anchor);
                result_.archive.insert(std::move(e));
                ++next;
            } else {
                result_.archive.record_hit(canon[i]);
            }
        }

        std::vector<double> scores(pop.size());
        double sum = 0;
        std::size_t finite = 0;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            scores[i] = result_.archive.find(canon[i])->score;
            if (std::isfinite(scores[i])) {
                sum += scores[i];
                ++finite;
            }
        }
        GenerationStats st;
        st.generation = generation;
        st.best_score = std::numeric_limits<double>::infinity();
        for (const auto& e : result_.archive.entries())
            if (e.feasible || !setup_.enforce_fit) st.best_score = std::min(st.best_score, e.score);
        st.mean_score = finite ? sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
        st.feasible_fraction = feasible_fraction;
        st.evaluated = fresh.size();
        st.cache_hits = hits;
        result_.convergence.push_back(st);
        return scores;
    }

    /// Top-half truncation selection over distinct designs, SBX + polynomial
    /// mutation; infeasible offspring are replaced by feasible mutants of
    /// elite parents.
    std::vector<std::vector<int>> next_generation(const std::vector<std::vector<int>>& pop,
                                                  const std::vector<double>& scores, double& feasible_fraction) {
        std::vector<std::size_t> order(pop.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
        const std::size_t elite_target = (pop.size() + 1) / 2;
        elites_.clear();
        std::unordered_map<std::string, bool> taken;
        for (std::size_t i : order) {
            if (elites_.size() >= elite_target) break;
            if (taken.emplace(encoding_key(canonical_encoding(spec_, pop[i])), true).second) elites_.push_back(pop[i]);
        }
        const std::size_t elite_count = elites_.size();
        std::vector<std::vector<int>> next = elites_;
        next.reserve(pop.size());
        auto pick = [&]() -> const std::vector<int>& { return elites_[selection_.below(elite_count)]; };

        std::size_t generated = 0, passed = 0;
        int retries = 0;
        while (next.size() < pop.size()) {
            const auto& pa = pick();
            const auto& pb = pick();
            auto [ca, cb] = sbx_crossover(pa, pb, config_.eta_c, config_.crossover_prob, crossover_, bounds_, setup_.free);
            for (auto* child : {&ca, &cb}) {
                if (next.size() >= pop.size()) break;
                std::vector<int> c = polynomial_mutation(std::move(*child), config_.eta_m, config_.mutation_prob,
                                                         mutation_, bounds_, setup_.free);
                ++generated;
                if (acceptable(c)) {
                    ++passed;
                } else {
                    c = repair();
                }
                const auto canon = canonical_encoding(spec_, c);
                const bool repeat = result_.archive.find(canon) || taken.count(encoding_key(canon));
                if (repeat && retries < config_.max_duplicate_retries) {
                    ++retries;
                    continue;
                }
                retries = 0;
                taken.emplace(encoding_key(canon), true);
                next.push_back(std::move(c));
            }
        }
        feasible_fraction = generated ? static_cast<double>(passed) / static_cast<double>(generated) : 1.0;
        return next;
    }

    std::vector<int> repair() {
        std::vector<int> parent;
        for (int attempt = 0; attempt < config_.max_repair_attempts; ++attempt) {
            parent = elites_[selection_.below(elites_.size())];
            std::vector<int> m = polynomial_mutation(parent, config_.eta_m, config_.mutation_prob, mutation_, bounds_, setup_.free);
            if (acceptable(m)) return m;
        }
        return parent;
    }

    const SearchSpaceSpec& spec_;
    const SearchConfig& config_;
    const DesignEvaluator& eval_;
    const StageSetup& setup_;
    std::vector<int> bounds_;
    RngStream sampling_, selection_, crossover_, mutation_;
    std::vector<std::vector<int>> elites_;
    SearchResult result_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Searchers

inline std::vector<bool> group_mask(const SearchSpaceSpec& spec, std::initializer_list<GeneGroup> groups) {
    std::vector<bool> mask(spec.genes.size(), false);
    for (std::size_t i = 0; i < spec.genes.size(); ++i)
        for (GeneGroup g : groups)
            if (spec.genes[i].group == g) mask[i] = true;
    return mask;
}

inline bool mask_empty(const std::vector<bool>& mask) {
    return std::none_of(mask.begin(), mask.end(), [](bool b) { return b; });
}

/// Joint search over every gene (the full evolutionary loop).
inline SearchResult run_search(const SearchSpaceSpec& spec, const SearchConfig& config, const DesignEvaluator& evaluator) {
    validate(config);
    StageSetup setup;
    setup.generations = config.generations;
    setup.seed = config.seed;
    setup.needs_anchor = config.objective.needs_anchor();
    setup.anchor = config.objective.anchor;
    const ObjectiveSpec objective = config.objective;
    setup.score = [objective](const Evaluation& e, const std::optional<Anchor>& anchor) {
        ObjectiveSpec o = objective;
        o.anchor = anchor;
        return score(e.metrics, e.accuracy, o);
    };
    SearchResult r = detail::Engine(spec, config, evaluator, setup).run();
    r.objective = objective;
    r.objective.anchor = r.archive.anchor;
    return r;
}

/// Final outcome of one search method, scored under the configured objective.
struct MethodResult {
    std::string method;
    std::vector<SearchResult> stages;
    ArchiveEntry best;
    double score = 0;  // configured objective
    TopK top;          // top-5 of the final stage
    Diversity diversity;
};

inline constexpr std::size_t kTopK = 5;

namespace detail {

inline MethodResult summarize(std::string method, std::vector<SearchResult> stages, const ObjectiveSpec& objective) {
    MethodResult m;
    m.method = std::move(method);
    m.stages = std::move(stages);
    const Archive& last = m.stages.back().archive;
    m.top = select_top_k(last, kTopK);
    if (m.top.entries.empty()) throw Error(ErrorCode::ExhaustedSampling, m.method + ": no feasible design in the final archive");
    m.best = m.top.entries.front();
    m.diversity = diversity(m.top.entries);
    ObjectiveSpec o = objective;
    if (o.needs_anchor() && !o.anchor) o.anchor = last.anchor ? last.anchor : anchor_of(m.best.eval.metrics, m.best.eval.accuracy);
    m.score = score(m.best.eval.metrics, m.best.eval.accuracy, o);
    return m;
}

inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view method) { return mix64(fnv1a(method, seed)); }

inline std::vector<int> best_encoding(const SearchResult& r, bool feasible_only) {
    const TopK top = select_top_k(r.archive, 1, feasible_only);
    if (top.entries.empty()) throw Error(ErrorCode::ExhaustedSampling, "stage 1 produced no usable design");
    return top.entries.front().design.encoding;
}

} // namespace detail

inline MethodResult summarize_joint(const SearchResult& r, const ObjectiveSpec& objective) {
    return detail::summarize("joint", {r}, objective);
}

/// Stage 1: model and quantization genes for accuracy on the median hardware.
/// Stage 2: hardware genes for the configured objective under the constraints.
inline MethodResult run_two_stage(const SearchSpaceSpec& spec, const SearchConfig& config, const DesignEvaluator& evaluator) {
    validate(config);
    const std::vector<int> zero(spec.genes.size(), 0);

    StageSetup s1;
    s1.free = group_mask(spec, {GeneGroup::Model, GeneGroup::Quant});
    s1.base = median_hardware_encoding(spec, zero);
    s1.enforce_fit = false;
    s1.generations = config.generations / 2;
    s1.seed = config.seed;
    s1.score = [](const Evaluation& e, const std::optional<Anchor>&) { return 100.0 - e.accuracy; };
    SearchResult r1 = detail::Engine(spec, config, evaluator, s1).run();

    StageSetup s2;
    s2.free = group_mask(spec, {GeneGroup::Hardware});
    s2.base = detail::best_encoding(r1, false);
    s2.generations = config.generations - config.generations / 2;
    s2.seed = detail::stage_seed(config.seed, "two_stage");
    s2.needs_anchor = config.objective.needs_anchor();
    s2.anchor = config.objective.anchor;
    const ObjectiveSpec objective = config.objective;
    s2.score = [objective](const Evaluation& e, const std::optional<Anchor>& anchor) {
        ObjectiveSpec o = objective;
        o.anchor = anchor;
        return score(e.metrics, e.accuracy, o);
    };
    SearchResult r2 = detail::Engine(spec, config, evaluator, s2).run();
    return detail::summarize("two_stage", {std::move(r1), std::move(r2)}, objective);
}

/// Stage 1: model and hardware genes for the objective's hardware terms with
/// quantization frozen at the largest precision. Stage 2: quantization genes
/// for accuracy (and energy where the objective has it).
///
///   objective     stage 1          stage 2
///   edap          D * A            E / Acc
///   delay         D                1 / Acc
///   energy_area   A                E / Acc
///   priority      Dn^b * An^c      En^a / Accn^d
inline MethodResult run_xpert_like(const SearchSpaceSpec& spec, const SearchConfig& config, const DesignEvaluator& evaluator) {
    validate(config);
    const ObjectiveSpec objective = config.objective;
    const bool priority = objective.needs_anchor();

    StageSetup s1;
    s1.free = group_mask(spec, {GeneGroup::Model, GeneGroup::Hardware});
    s1.base = with_group(spec, std::vector<int>(spec.genes.size(), 0), GeneGroup::Quant,
                         [](const GeneInfo& g) { return static_cast<int>(g.choices) - 1; });
    s1.generations = config.generations / 2;
    s1.seed = config.seed;
    s1.needs_anchor = priority;
    s1.anchor = objective.anchor;
    s1.score = [objective](const Evaluation& e, const std::optional<Anchor>& anchor) {
        const auto& m = e.metrics;
        switch (objective.mode) {
        case ObjectiveMode::EdapAcc: return m.delay_us * m.area_mm2;
        case ObjectiveMode::DelayAcc: return m.delay_us;
        case ObjectiveMode::EnergyAreaAcc: return m.area_mm2;
        case ObjectiveMode::Priority: break;
        }
        if (!anchor) throw Error(ErrorCode::UnsetAnchor, "priority objective used before the first sample was evaluated");
        return std::pow(m.delay_us / anchor->delay_us, objective.b) * std::pow(m.area_mm2 / anchor->area_mm2, objective.c);
    };
    SearchResult r1 = detail::Engine(spec, config, evaluator, s1).run();

    StageSetup s2;
    s2.free = group_mask(spec, {GeneGroup::Quant});
    s2.base = detail::best_encoding(r1, true);
    s2.generations = config.generations - config.generations / 2;
    s2.seed = detail::stage_seed(config.seed, "xpert_like");
    s2.needs_anchor = priority;
    s2.anchor = objective.anchor ? objective.anchor : r1.archive.anchor;
    s2.score = [objective](const Evaluation& e, const std::optional<Anchor>& anchor) {
        if (!(e.accuracy > 0)) throw Error(ErrorCode::ZeroAccuracy, "accuracy must be > 0");
        const auto& m = e.metrics;
        switch (objective.mode) {
        case ObjectiveMode::EdapAcc:
        case ObjectiveMode::EnergyAreaAcc: return m.energy_mj / e.accuracy;
        case ObjectiveMode::DelayAcc: return 1.0 / e.accuracy;
        case ObjectiveMode::Priority: break;
        }
        if (!anchor) throw Error(ErrorCode::UnsetAnchor, "priority objective used before the first sample was evaluated");
        return std::pow(m.energy_mj / anchor->energy_mj, objective.a) / std::pow(e.accuracy / anchor->accuracy, objective.d);
    };
    if (mask_empty(s2.free)) {
        s2.generations = 0;
        SearchConfig single = config;
        single.population = 2;
        SearchResult r2 = detail::Engine(spec, single, evaluator, s2).run();
        return detail::summarize("xpert_like", {std::move(r1), std::move(r2)}, objective);
    }
    SearchResult r2 = detail::Engine(spec, config, evaluator, s2).run();
    return detail::summarize("xpert_like", {std::move(r1), std::move(r2)}, objective);
}

// ---------------------------------------------------------------------------
// Baselines

struct BaselineRow {
    HardwareMetrics metrics;  // means for the random baseline
    double accuracy = 0;
    double edap = 0;          // per-sample mean for the random baseline
    double score = 0;
    std::size_t samples = 0;
};

struct BaselineResult {
    DesignPoint median_design;
    BaselineRow median;
    BaselineRow random_mean;
};

/// Reference network on the median hardware, and the mean over random
/// hardware configurations that hold the reference network.
inline BaselineResult baselines(const SearchSpaceSpec& spec, const DesignEvaluator& evaluator, ObjectiveSpec objective,
                                std::uint64_t seed, std::size_t samples = 1000, long long max_attempts = 1000000) {
    const std::vector<int> model = reference_model_encoding(spec, std::vector<int>(spec.genes.size(), 0));
    BaselineResult out;
    out.median_design = decode(spec, median_hardware_encoding(spec, model));
    const Evaluation med = evaluator.evaluate(out.median_design);
    if (objective.needs_anchor() && !objective.anchor) objective.anchor = anchor_of(med.metrics, med.accuracy);
    out.median = {med.metrics, med.accuracy, med.metrics.edap, score(med.metrics, med.accuracy, objective), 1};

    RngStream rng = RngStream::named(seed, "baselines");
    BaselineRow& mean = out.random_mean;
    mean.metrics.feasible = true;
    long long attempts = 0;
    auto update = [](double& m, double x, std::size_t k) { m += (x - m) / static_cast<double>(k); };
    while (mean.samples < samples) {
        if (attempts++ >= max_attempts)
            throw Error(ErrorCode::ExhaustedSampling, "random baseline found only " + std::to_string(mean.samples) +
                                                          " hardware configurations that hold the reference network");
        const std::vector<int> idx = with_group(spec, model, GeneGroup::Hardware,
                                                [&](const GeneInfo& g) { return static_cast<int>(rng.below(g.choices)); });
        const DesignPoint d = decode(spec, idx);
        if (!evaluator.fits(d).memory_fit) continue;
        const Evaluation e = evaluator.evaluate(d);
        const std::size_t k = ++mean.samples;
        auto& m = mean.metrics;
        update(m.energy_mj, e.metrics.energy_mj, k);
        update(m.delay_us, e.metrics.delay_us, k);
        update(m.area_mm2, e.metrics.area_mm2, k);
        update(m.tops_per_w, e.metrics.tops_per_w, k);
        update(m.tops_per_mm2, e.metrics.tops_per_mm2, k);
        update(m.utilization, e.metrics.utilization, k);
        update(mean.accuracy, e.accuracy, k);
        update(mean.edap, e.metrics.edap, k);
        update(mean.score, score(e.metrics, e.accuracy, objective), k);
    }
    mean.metrics.edap = mean.edap;
    return out;
}

} // namespace cimnas
