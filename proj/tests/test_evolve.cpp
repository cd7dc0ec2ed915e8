#include <algorithm>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "cimnas/evolve.hpp"
#include "cimnas/report.hpp"
#include "test_support.hpp"

namespace cimnas {
namespace {

using test::error_of;

HardwareMetrics metrics(double e, double d, double a) {
    HardwareMetrics m;
    m.energy_mj = e;
    m.delay_us = d;
    m.area_mm2 = a;
    m.edap = edap(e, d, a);
    m.feasible = true;
    return m;
}

class ConstantAccuracy final : public AccuracyModel {
public:
    double accuracy(const DesignPoint&) const override { return 70.0; }
};

/// Tiny space with the oracle and the RRAM profile.
struct TinyFixture {
    SearchSpaceSpec spec;
    OracleAccuracy oracle;
    DesignEvaluator evaluator;

    explicit TinyFixture(SearchSpaceSpec s = test::tiny_spec())
        : spec(std::move(s)), oracle(spec, test::tiny_oracle()),
          evaluator(spec, load_template_file(spec.template_table), test::rram(), oracle) {}

    SearchConfig config(std::uint64_t seed, int generations = 10) const {
        SearchConfig c;
        c.population = 20;
        c.generations = generations;
        c.seed = seed;
        return c;
    }
};

std::string archive_text(const SearchResult& r) {
    std::ostringstream out;
    write_archive(r.archive, out, "test");
    return out.str();
}

/// Every distinct canonical design of a space with its evaluation.
struct Enumerated {
    std::vector<int> encoding;
    Evaluation eval;
    bool feasible = false;
};

std::vector<Enumerated> enumerate(const TinyFixture& f, double area_constraint = 800) {
    std::vector<Enumerated> out;
    std::set<std::vector<int>> seen;
    test::for_each_encoding(f.spec, [&](const std::vector<int>& idx) {
        const auto canon = canonical_encoding(f.spec, idx);
        if (!seen.insert(canon).second) return;
        const auto ev = f.evaluator.evaluate(decode(f.spec, canon));
        out.push_back({canon, ev, ev.metrics.feasible && ev.metrics.area_mm2 <= area_constraint});
    });
    return out;
}

double enumerated_optimum(const std::vector<Enumerated>& all, const ObjectiveSpec& o) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : all)
        if (e.feasible) best = std::min(best, score(e.eval.metrics, e.eval.accuracy, o));
    return best;
}

// ---------------------------------------------------------------------------
// Objectives

TEST(Score, PublishedScoreIdentities) {
    const auto base = metrics(0.95, 6.94, 3691);
    const double edap_acc = score(base, 73.00, parse_objective("edap"));
    EXPECT_NEAR(edap_acc, 24.33 / 73.00, 1e-3);
    EXPECT_NEAR(edap_acc, 0.34, 0.02 * 0.34);
    EXPECT_NEAR(score(base, 73.00, parse_objective("energy_area")), 48.02, 0.1);
    EXPECT_NEAR(score(base, 73.00, parse_objective("delay")), 95.1, 0.05);
    EXPECT_NEAR(score(metrics(0.33, 1.47, 234), 73.71, parse_objective("delay")), 19.9, 0.05);
}

TEST(Score, Errors) {
    EXPECT_EQ(error_of([] { score(metrics(1, 1, 1), 0.0, {}); }), ErrorCode::ZeroAccuracy);
    EXPECT_EQ(error_of([] { score(metrics(1, 1, 1), 70.0, parse_objective("priority:a=1,b=1,c=1,d=1")); }),
              ErrorCode::UnsetAnchor);
}

TEST(Score, PriorityAgainstAnchor) {
    auto o = parse_objective("priority:a=0.5,b=1,c=0,d=1");
    o.anchor = Anchor{2, 10, 100, 70};
    EXPECT_DOUBLE_EQ(score(metrics(2, 10, 100), 70, o), 1.0);
    EXPECT_DOUBLE_EQ(score(metrics(8, 5, 7), 35, o), std::sqrt(4.0) * 0.5 / 0.5);
}

TEST(Score, ParseObjective) {
    EXPECT_EQ(parse_objective("delay").mode, ObjectiveMode::DelayAcc);
    const auto p = parse_objective("priority:a=0.3,b=0.3,c=1,d=1");
    EXPECT_EQ(p.mode, ObjectiveMode::Priority);
    EXPECT_DOUBLE_EQ(p.a, 0.3);
    EXPECT_DOUBLE_EQ(p.c, 1.0);
    EXPECT_EQ(to_string(parse_objective("priority:a=1,b=1,c=1,d=1")), "priority:a=1,b=1,c=1,d=1");
    EXPECT_EQ(error_of([] { parse_objective("priority:a=1.5"); }), ErrorCode::InvalidSpec);
    EXPECT_EQ(error_of([] { parse_objective("priority:e=1"); }), ErrorCode::InvalidSpec);
    EXPECT_EQ(error_of([] { parse_objective("latency"); }), ErrorCode::InvalidSpec);
}

TEST(Score, PriorityUnitCoefficientsRankLikeEdap) {
    TinyFixture f;
    const auto all = enumerate(f);
    RngStream rng(41);
    const auto edap_o = parse_objective("edap");
    for (int set = 0; set < 100; ++set) {
        std::vector<const Enumerated*> pick;
        for (int i = 0; i < 30; ++i) pick.push_back(&all[rng.below(all.size())]);
        auto pr = parse_objective("priority:a=1,b=1,c=1,d=1");
        const auto& first = *pick.front();
        pr.anchor = anchor_of(first.eval.metrics, first.eval.accuracy);
        std::stable_sort(pick.begin(), pick.end(), [&](const Enumerated* x, const Enumerated* y) {
            return score(x->eval.metrics, x->eval.accuracy, edap_o) < score(y->eval.metrics, y->eval.accuracy, edap_o);
        });
        for (std::size_t i = 1; i < pick.size(); ++i) {
            const double a = score(pick[i - 1]->eval.metrics, pick[i - 1]->eval.accuracy, pr);
            const double b = score(pick[i]->eval.metrics, pick[i]->eval.accuracy, pr);
            EXPECT_LE(a, b * (1 + 1e-12));
        }
    }
}

// ---------------------------------------------------------------------------
// Operators

TEST(Operators, SbxClosedForm) {
    EXPECT_DOUBLE_EQ(sbx_beta(0.5, 3), 1.0);
    const auto [a, b] = sbx_children(3, 7, sbx_beta(0.5, 3));
    EXPECT_DOUBLE_EQ(a, 3.0);
    EXPECT_DOUBLE_EQ(b, 7.0);
    const double beta = sbx_beta(0.2, 3);
    EXPECT_NEAR(beta, std::pow(0.4, 0.25), 1e-15);
    EXPECT_NEAR(beta, 0.7953, 1e-4);
    const auto [x, y] = sbx_children(0, 10, beta);
    EXPECT_NEAR(x, 1.0235, 1e-3);
    EXPECT_NEAR(y, 8.9765, 1e-3);
    EXPECT_EQ(round_clamp(x, 10), 1);
    EXPECT_EQ(round_clamp(y, 10), 9);
}

TEST(Operators, SbxIdenticalParents) {
    RngStream rng(42);
    const std::vector<int> bounds(20, 9);
    std::vector<int> p(20);
    for (auto& v : p) v = static_cast<int>(rng.below(10));
    for (int n = 0; n < 100; ++n) {
        const auto [a, b] = sbx_crossover(p, p, 3, 1.0, rng, bounds);
        EXPECT_EQ(a, p);
        EXPECT_EQ(b, p);
    }
}

TEST(Operators, MutationClosedForm) {
    EXPECT_DOUBLE_EQ(poly_delta(0.5, 3), 0.0);
    EXPECT_DOUBLE_EQ(poly_delta(1.0, 3), 1.0);
    EXPECT_EQ(round_clamp(4 + poly_delta(1.0, 3) * 9, 9), 9);
    EXPECT_NEAR(poly_delta(0.1, 3), std::pow(0.2, 0.25) - 1, 1e-15);
    EXPECT_NEAR(poly_delta(0.1, 3), -0.3313, 1e-4);
    EXPECT_EQ(round_clamp(5 + poly_delta(0.1, 3) * 9, 9), 2);
}

TEST(Operators, ZeroProbabilityAndMasks) {
    RngStream rng(43);
    const std::vector<int> bounds(10, 5);
    const std::vector<int> a(10, 0), b(10, 5);
    const auto [c, d] = sbx_crossover(a, b, 3, 0.0, rng, bounds);
    EXPECT_EQ(c, a);
    EXPECT_EQ(d, b);
    EXPECT_EQ(polynomial_mutation(b, 3, 0.0, rng, bounds), b);
    std::vector<bool> free(10, false);
    free[3] = true;
    for (int n = 0; n < 200; ++n) {
        const auto m = polynomial_mutation(a, 3, 1.0, rng, bounds, free);
        for (std::size_t i = 0; i < m.size(); ++i)
            if (i != 3) {
                EXPECT_EQ(m[i], 0);
            }
    }
}

TEST(Operators, LengthMismatch) {
    RngStream rng(44);
    EXPECT_EQ(error_of([&] { sbx_crossover({1, 2}, {1}, 3, 1, rng, {3, 3}); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(error_of([&] { polynomial_mutation({1, 2}, 3, 1, rng, {3}); }), ErrorCode::LengthMismatch);
}

TEST(Operators, OffspringAlwaysDecode) {
    const auto spec = test::reference_spec();
    const auto bounds = gene_bounds(spec);
    RngStream rng(45);
    for (int n = 0; n < 2000; ++n) {
        const auto pa = sample_uniform(spec, rng).encoding;
        const auto pb = sample_uniform(spec, rng).encoding;
        const auto [a, b] = sbx_crossover(pa, pb, 3, 0.95, rng, bounds);
        for (const auto& child : {a, b, polynomial_mutation(a, 3, 0.95, rng, bounds)})
            EXPECT_NO_THROW(decode(spec, child));
    }
}

// ---------------------------------------------------------------------------
// Search

TEST(Search, AllFeasibleSpaceHasNoRejections) {
    TinyFixture f(test::singleton_spec());
    auto cfg = f.config(1, 0);
    cfg.population = 6;
    const auto r = run_search(f.spec, cfg, f.evaluator);
    EXPECT_EQ(r.rejections, 0u);
    EXPECT_EQ(r.archive.size(), 1u);
    EXPECT_EQ(r.archive.entries()[0].hits, 6);
}

TEST(Search, NoFeasibleDesignExhaustsSampling) {
    TinyFixture f;
    auto cfg = f.config(1);
    cfg.area_constraint = 1e-3;
    cfg.max_sampling_attempts = 2000;
    std::string msg;
    EXPECT_EQ(error_of([&] { run_search(f.spec, cfg, f.evaluator); }, &msg), ErrorCode::ExhaustedSampling);
    EXPECT_NE(msg.find("2000"), std::string::npos);
}

TEST(Search, RejectionCountReproducibleOnReferenceSpace) {
    const auto spec = test::reference_spec();
    const OracleAccuracy oracle(spec, test::tiny_oracle());
    const DesignEvaluator ev(spec, load_template_file(spec.template_table), test::rram(), oracle);
    SearchConfig cfg;
    cfg.population = 4;
    cfg.generations = 0;
    cfg.seed = 17;
    const auto a = run_search(spec, cfg, ev);
    const auto b = run_search(spec, cfg, ev);
    EXPECT_EQ(a.rejections, b.rejections);
    EXPECT_EQ(archive_text(a), archive_text(b));
}

TEST(Search, ZeroGenerationsArchivesInitialPopulation) {
    TinyFixture f;
    const auto r = run_search(f.spec, f.config(3, 0), f.evaluator);
    ASSERT_EQ(r.convergence.size(), 1u);
    int hits = 0;
    for (const auto& e : r.archive.entries()) {
        EXPECT_EQ(e.generation, 0);
        EXPECT_TRUE(e.feasible);
        hits += e.hits;
    }
    EXPECT_EQ(hits, 20);
}

TEST(Search, WorkerCountDoesNotChangeArchive) {
    TinyFixture f;
    auto cfg = f.config(7, 10);
    const auto one = archive_text(run_search(f.spec, cfg, f.evaluator));
    cfg.workers = 8;
    EXPECT_EQ(archive_text(run_search(f.spec, cfg, f.evaluator)), one);
}

TEST(Search, ArchiveInvariants) {
    TinyFixture f;
    const auto cfg = f.config(11, 15);
    const auto r = run_search(f.spec, cfg, f.evaluator);
    // Elitism.
    for (std::size_t g = 1; g < r.convergence.size(); ++g)
        EXPECT_LE(r.convergence[g].best_score, r.convergence[g - 1].best_score);
    std::set<std::string> keys;
    int hits = 0;
    for (const auto& e : r.archive.entries()) {
        EXPECT_TRUE(keys.insert(encoding_key(e.design.encoding)).second);
        EXPECT_EQ(e.design.encoding, canonical_encoding(f.spec, e.design.encoding));
        hits += e.hits;
        // Constraint safety.
        if (e.feasible) {
            const auto fit = f.evaluator.fits(e.design);
            EXPECT_TRUE(fit.memory_fit);
            EXPECT_LE(fit.area_mm2, cfg.area_constraint);
        }
        // Cache correctness.
        const auto again = f.evaluator.evaluate(e.design);
        EXPECT_EQ(again.metrics.energy_mj, e.eval.metrics.energy_mj);
        EXPECT_EQ(again.metrics.delay_us, e.eval.metrics.delay_us);
        EXPECT_EQ(again.accuracy, e.eval.accuracy);
        EXPECT_EQ(e.eval.metrics.edap, e.eval.metrics.energy_mj * (e.eval.metrics.delay_us / 1000) * e.eval.metrics.area_mm2);
    }
    EXPECT_EQ(hits, cfg.population * (cfg.generations + 1));
}

TEST(Search, FindsTinyOptimum) {
    TinyFixture f;
    const auto all = enumerate(f);
    const double best = enumerated_optimum(all, {});
    const auto r = run_search(f.spec, f.config(7, 30), f.evaluator);
    const auto top = select_top_k(r.archive, 1);
    ASSERT_FALSE(top.entries.empty());
    EXPECT_LE(top.entries[0].score, best * 1.01);
    EXPECT_GE(top.entries[0].score, best);
}

TEST(Search, RejectsInvalidConfig) {
    TinyFixture f;
    auto cfg = f.config(1);
    cfg.population = 1;
    EXPECT_EQ(error_of([&] { run_search(f.spec, cfg, f.evaluator); }), ErrorCode::InvalidSpec);
    cfg = f.config(1);
    cfg.mutation_prob = 1.5;
    EXPECT_EQ(error_of([&] { run_search(f.spec, cfg, f.evaluator); }), ErrorCode::InvalidSpec);
}

// ---------------------------------------------------------------------------
// Top-k and diversity

ArchiveEntry entry(std::vector<int> enc, double s, int generation, bool feasible = true) {
    ArchiveEntry e;
    e.design.encoding = std::move(enc);
    e.score = s;
    e.generation = generation;
    e.feasible = feasible;
    return e;
}

TEST(TopK, HandBuiltArchive) {
    Archive a;
    a.insert(entry({0}, 0.3, 0));
    a.insert(entry({1}, 0.2, 0));
    a.insert(entry({2}, 0.5, 0));
    a.insert(entry({3}, 0.1, 1, false));
    const auto top = select_top_k(a, 1);
    ASSERT_EQ(top.entries.size(), 1u);
    EXPECT_EQ(top.entries[0].design.encoding, std::vector<int>{1});
    const auto all = select_top_k(a, 5);
    EXPECT_TRUE(all.short_of_k);
    EXPECT_EQ(all.entries.size(), 3u);
    EXPECT_EQ(select_top_k(a, 1, false).entries[0].design.encoding, std::vector<int>{3});
}

TEST(TopK, TiesGoToEarlierGeneration) {
    Archive a;
    a.insert(entry({0}, 0.1, 2));
    a.insert(entry({1}, 0.1, 1));
    a.insert(entry({2}, 0.1, 1));
    const auto top = select_top_k(a, 3);
    EXPECT_EQ(top.entries[0].design.encoding, std::vector<int>{1});
    EXPECT_EQ(top.entries[1].design.encoding, std::vector<int>{2});
    EXPECT_EQ(top.entries[2].design.encoding, std::vector<int>{0});
    EXPECT_FALSE(top.short_of_k);
}

TEST(TopK, MatchesEnumerationOnTinySpace) {
    TinyFixture f;
    const auto all = enumerate(f);
    Archive a;
    std::vector<std::pair<double, std::vector<int>>> ranked;
    for (const auto& e : all) {
        const double s = score(e.eval.metrics, e.eval.accuracy, {});
        a.insert(entry(e.encoding, s, 0, e.feasible));
        if (e.feasible) ranked.emplace_back(s, e.encoding);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    const auto top = select_top_k(a, 5);
    ASSERT_EQ(top.entries.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(top.entries[i].design.encoding, ranked[i].second);
}

TEST(Diversity, HandCases) {
    EXPECT_DOUBLE_EQ(diversity(std::vector<std::vector<int>>(5, {1, 2, 3})).value, 0.0);
    EXPECT_DOUBLE_EQ(diversity(std::vector<std::vector<int>>{{0, 0, 0}, {1, 1, 1}}).value, 1.0);
    EXPECT_NEAR(diversity(std::vector<std::vector<int>>{{0, 0, 0}, {0, 1, 1}, {1, 0, 1}}).value, 2.0 / 3.0, 1e-15);
    const auto one = diversity(std::vector<std::vector<int>>{{1, 2}});
    EXPECT_EQ(one.value, 0.0);
    EXPECT_TRUE(one.warning);
    EXPECT_EQ(error_of([] { diversity(std::vector<std::vector<int>>{{1, 2}, {1}}); }), ErrorCode::LengthMismatch);
}

// ---------------------------------------------------------------------------
// Comparators

TEST(TwoStage, ConstantAccuracyReducesToHardwareSearch) {
    auto spec = test::tiny_spec();
    const ConstantAccuracy flat;
    const DesignEvaluator ev(spec, load_template_file(spec.template_table), test::rram(), flat);
    SearchConfig cfg;
    cfg.population = 10;
    cfg.generations = 6;
    cfg.seed = 2;
    const auto r = run_two_stage(spec, cfg, ev);
    ASSERT_EQ(r.stages.size(), 2u);
    for (const auto& e : r.stages[0].archive.entries()) EXPECT_EQ(e.score, 30.0);
    const auto base = r.stages[1].archive.entries().front().design.encoding;
    for (const auto& e : r.stages[1].archive.entries())
        for (std::size_t i = 0; i < spec.genes.size(); ++i)
            if (spec.genes[i].group != GeneGroup::Hardware) {
                EXPECT_EQ(e.design.encoding[i], base[i]);
            }
}

TEST(TwoStage, ReportsConstraintFailure) {
    TinyFixture f;
    auto cfg = f.config(3, 4);
    // Enough area for small networks only.
    cfg.area_constraint = 4.0;
    cfg.max_sampling_attempts = 3000;
    EXPECT_NO_THROW(run_search(f.spec, cfg, f.evaluator));
    EXPECT_EQ(error_of([&] { run_two_stage(f.spec, cfg, f.evaluator); }), ErrorCode::ExhaustedSampling);
}

TEST(Comparators, NeverBeatEnumeratedOptimum) {
    TinyFixture f;
    const double best = enumerated_optimum(enumerate(f), {});
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto cfg = f.config(seed, 30);
        const auto two = run_two_stage(f.spec, cfg, f.evaluator);
        const auto xp = run_xpert_like(f.spec, cfg, f.evaluator);
        EXPECT_GE(two.score, best);
        EXPECT_GE(xp.score, best);
        EXPECT_TRUE(two.best.feasible);
        EXPECT_TRUE(xp.best.feasible);
    }
}

TEST(XpertLike, SingletonQuantizationMakesSecondStageNoOp) {
    test::SpecDoc doc;
    doc.dw_in = "[8]";
    doc.pw_w = "[8]";
    TinyFixture f(doc.load());
    const auto r = run_xpert_like(f.spec, f.config(4, 6), f.evaluator);
    const auto stage1 = select_top_k(r.stages[0].archive, 1).entries.front();
    EXPECT_EQ(r.stages[1].archive.size(), 1u);
    EXPECT_EQ(r.best.design.encoding, stage1.design.encoding);
}

TEST(XpertLike, HardwareFirstLosesAccuracy) {
    TinyFixture f;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto cfg = f.config(seed, 30);
        const auto joint = summarize_joint(run_search(f.spec, cfg, f.evaluator), cfg.objective);
        const auto xp = run_xpert_like(f.spec, cfg, f.evaluator);
        const auto stage1 = select_top_k(xp.stages[0].archive, 1).entries.front();
        const auto& jm = joint.best.eval.metrics;
        EXPECT_LE(stage1.eval.metrics.delay_us * stage1.eval.metrics.area_mm2, jm.delay_us * jm.area_mm2);
        EXPECT_LE(xp.best.eval.accuracy, joint.best.eval.accuracy);
    }
}

TEST(XpertLike, Deterministic) {
    TinyFixture f;
    const auto a = run_xpert_like(f.spec, f.config(9, 8), f.evaluator);
    const auto b = run_xpert_like(f.spec, f.config(9, 8), f.evaluator);
    for (std::size_t s = 0; s < 2; ++s) EXPECT_EQ(archive_text(a.stages[s]), archive_text(b.stages[s]));
}

// ---------------------------------------------------------------------------
// Baselines

TEST(Baselines, MedianDesignUsesMedianHardware) {
    TinyFixture f;
    const auto b = baselines(f.spec, f.evaluator, {}, 1, 50);
    EXPECT_EQ(b.median_design.hardware, median_hardware(f.spec));
    EXPECT_EQ(b.random_mean.samples, 50u);
    EXPECT_DOUBLE_EQ(b.median.edap, b.median.metrics.edap);
}

TEST(Baselines, SingletonHardwareGivesEqualBaselines) {
    TinyFixture f(test::singleton_spec());
    const auto b = baselines(f.spec, f.evaluator, {}, 1, 20);
    EXPECT_EQ(b.random_mean.metrics.energy_mj, b.median.metrics.energy_mj);
    EXPECT_EQ(b.random_mean.metrics.delay_us, b.median.metrics.delay_us);
    EXPECT_EQ(b.random_mean.metrics.area_mm2, b.median.metrics.area_mm2);
    EXPECT_EQ(b.random_mean.edap, b.median.edap);
    EXPECT_EQ(b.random_mean.score, b.median.score);
}

TEST(Baselines, MeanEdapIsNotProductOfMeans) {
    test::SpecDoc doc;
    doc.hardware["Bits_cell"] = "[4]";
    doc.hardware["Xbar_rows"] = "[64, 256]";
    doc.hardware["Xbar_cols"] = "[64, 256]";
    doc.hardware["C_per_tile"] = "[16]";
    TinyFixture f(doc.load());
    const auto model = reference_model_encoding(f.spec, std::vector<int>(f.spec.genes.size(), 0));
    std::vector<HardwareMetrics> two;
    for (int c = 0; c < 2; ++c) {
        const auto idx = with_group(f.spec, model, GeneGroup::Hardware,
                                    [&](const GeneInfo& g) { return g.choices > 1 ? c : 0; });
        two.push_back(f.evaluator.evaluate(decode(f.spec, idx)).metrics);
        ASSERT_TRUE(two.back().feasible);
    }
    const double mean_edap = (two[0].edap + two[1].edap) / 2;
    const double product = (two[0].energy_mj + two[1].energy_mj) / 2 * ((two[0].delay_us + two[1].delay_us) / 2000) *
                           ((two[0].area_mm2 + two[1].area_mm2) / 2);
    EXPECT_GT(std::abs(mean_edap - product) / mean_edap, 1e-3);

    const auto b = baselines(f.spec, f.evaluator, {}, 5, 200);
    EXPECT_GE(b.random_mean.edap, std::min(two[0].edap, two[1].edap));
    EXPECT_LE(b.random_mean.edap, std::max(two[0].edap, two[1].edap));
    const auto& m = b.random_mean.metrics;
    EXPECT_GT(std::abs(b.random_mean.edap - m.energy_mj * (m.delay_us / 1000) * m.area_mm2) / b.random_mean.edap, 1e-4);
}

TEST(ParallelFor, RunsEveryIndexAndRethrowsLowest) {
    std::vector<int> hit(100, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] += 1; });
    EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 100);
    std::string msg;
    EXPECT_EQ(error_of([] {
                  parallel_for(50, 4, [](std::size_t i) {
                      if (i == 7 || i == 30) throw Error(ErrorCode::InvalidGenome, "index " + std::to_string(i));
                  });
              }, &msg),
              ErrorCode::InvalidGenome);
    EXPECT_NE(msg.find("index 7"), std::string::npos);
}

} // namespace
} // namespace cimnas
