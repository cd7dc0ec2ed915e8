#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "cimnas/report.hpp"
#include "test_support.hpp"

namespace cimnas {
namespace {

using test::error_of;

TEST(Fmt, RoundTripsDoubles) {
    RngStream rng(1);
    for (int n = 0; n < 10000; ++n) {
        const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(200)) - 100);
        EXPECT_EQ(std::strtod(fmt(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(1.0), "1");
}

TEST(Encoding, JoinSplit) {
    const std::vector<int> idx{0, 3, 12, 1};
    EXPECT_EQ(join_encoding(idx), "0-3-12-1");
    EXPECT_EQ(split_encoding(join_encoding(idx)), idx);
    EXPECT_EQ(error_of([] { split_encoding("1-x-2"); }), ErrorCode::SchemaMismatch);
}

Archive sample_archive() {
    const auto spec = test::tiny_spec();
    const OracleAccuracy oracle(spec, OracleParams{});
    const DesignEvaluator ev(spec, load_template_file(spec.template_table), test::rram(), oracle);
    SearchConfig cfg;
    cfg.population = 8;
    cfg.generations = 3;
    cfg.seed = 4;
    return run_search(spec, cfg, ev).archive;
}

TEST(ArchiveCsv, RoundTrip) {
    const Archive a = sample_archive();
    std::stringstream s;
    write_archive(a, s, "run.manifest");
    const auto f = read_archive(s);
    EXPECT_EQ(f.manifest, "run.manifest");
    EXPECT_EQ(f.anchor, "none");
    ASSERT_EQ(f.rows.size(), a.size());
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const auto& e = a.entries()[i];
        const auto& r = f.rows[i];
        EXPECT_EQ(r.encoding, e.design.encoding);
        EXPECT_EQ(r.generation, e.generation);
        EXPECT_EQ(r.order, e.order);
        EXPECT_EQ(r.hits, e.hits);
        EXPECT_EQ(r.energy_mj, e.eval.metrics.energy_mj);
        EXPECT_EQ(r.delay_us, e.eval.metrics.delay_us);
        EXPECT_EQ(r.area_mm2, e.eval.metrics.area_mm2);
        EXPECT_EQ(r.edap, e.eval.metrics.edap);
        EXPECT_EQ(r.accuracy, e.eval.accuracy);
        EXPECT_EQ(r.score, e.score);
        EXPECT_EQ(r.feasible, e.feasible);
    }
}

TEST(ArchiveCsv, AnchorLine) {
    Archive a;
    a.anchor = Anchor{1.5, 2, 3, 70};
    std::stringstream s;
    write_archive(a, s, "m");
    EXPECT_EQ(read_archive(s).anchor, "1.5,2,3,70");
}

TEST(ArchiveCsv, SchemaErrors) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return error_of([&] { read_archive(in); });
    };
    const std::string head = std::string(kArchiveSchema) + "\n# manifest=m\n# anchor=none\n" + std::string(kArchiveColumns) + "\n";
    EXPECT_EQ(parse("# cimnas-archive v2\n"), ErrorCode::SchemaMismatch);
    EXPECT_EQ(parse(std::string(kArchiveSchema) + "\n# anchor=none\n"), ErrorCode::SchemaMismatch);
    EXPECT_EQ(parse(head + "0,0,1,0-1,1,2\n"), ErrorCode::SchemaMismatch);
    EXPECT_EQ(parse(head + "0,0,1,0-1,1,2,3,4,5,6,maybe\n"), ErrorCode::SchemaMismatch);
    EXPECT_EQ(parse(head + "0,0,1,0-1,x,2,3,4,5,6,true\n"), ErrorCode::SchemaMismatch);
    EXPECT_FALSE(parse(head + "0,0,1,0-1,1,2,3,4,5,6,true\n").has_value());
}

TEST(Manifest, ListsEveryKey) {
    RunManifest m;
    m.command = "search";
    m.config_path = "configs/tiny.yaml";
    m.config_hash = hash_text("x");
    m.seed = 7;
    std::ostringstream out;
    write_manifest(m, out);
    for (const char* key : {"command=search", "config_path=", "config_hash=", "seed=7", "spec_hash=", "profile_hash=",
                            "tool_version=", "duration_s="})
        EXPECT_NE(out.str().find(key), std::string::npos) << key;
    EXPECT_EQ(hash_text("x"), hash_text("x"));
    EXPECT_NE(hash_text("x"), hash_text("y"));
    EXPECT_EQ(hash_text("x").size(), 16u);
}

TEST(Comparison, RatioColumns) {
    CompareRow r;
    r.method = "joint";
    r.edap = 2.0;
    r.accuracy = 70;
    std::ostringstream out;
    write_comparison({r}, 8.0, 5.0, out, "m", parse_objective("edap"));
    std::istringstream in(out.str());
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    EXPECT_EQ(last.substr(0, 6), "joint,");
    EXPECT_EQ(last.substr(last.size() - 6), ",4,2.5");
    EXPECT_NE(out.str().find("# objective=edap"), std::string::npos);
}

TEST(TopKTable, WarnsWhenShort) {
    TopK top;
    top.short_of_k = true;
    std::ostringstream out;
    write_top_k(top, Diversity{0, true}, out, "m");
    EXPECT_NE(out.str().find("# warning="), std::string::npos);
    EXPECT_NE(out.str().find("fewer than two designs"), std::string::npos);
}

} // namespace
} // namespace cimnas
