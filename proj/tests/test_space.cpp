#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace cimnas {
namespace {

using test::error_of;
using test::SpecDoc;

TEST(SpaceLoad, ReferenceSpaceShape) {
    const auto spec = test::reference_spec();
    EXPECT_EQ(spec.stage_count, 6);
    std::size_t hw = 0;
    for (const auto& g : spec.genes) hw += g.group == GeneGroup::Hardware;
    EXPECT_EQ(hw, 9u);
    EXPECT_EQ(spec.genes.back().name, "GLB");
}

TEST(SpaceLoad, MissingKeyIsNamed) {
    SpecDoc doc;
    doc.drop = {"kernel_choices"};
    std::string msg;
    EXPECT_EQ(error_of([&] { doc.load(); }, &msg), ErrorCode::MissingKey);
    EXPECT_NE(msg.find("kernel_choices"), std::string::npos);
}

TEST(SpaceLoad, MissingHardwareGeneIsNamed) {
    SpecDoc doc;
    doc.hardware.erase("Xbar_cols");
    std::string msg;
    EXPECT_EQ(error_of([&] { doc.load(); }, &msg), ErrorCode::MissingKey);
    EXPECT_NE(msg.find("hardware.Xbar_cols"), std::string::npos);
}

TEST(SpaceLoad, EmptyChoiceList) {
    SpecDoc doc;
    doc.kernels = "[]";
    EXPECT_EQ(error_of([&] { doc.load(); }), ErrorCode::EmptyChoiceList);
    SpecDoc hw;
    hw.hardware["GLB"] = "[]";
    EXPECT_EQ(error_of([&] { hw.load(); }), ErrorCode::EmptyChoiceList);
}

TEST(SpaceLoad, UnknownTemplate) {
    SpecDoc doc;
    doc.template_name = "VGGLike";
    EXPECT_EQ(error_of([&] { doc.load(); }), ErrorCode::UnknownTemplate);
}

TEST(SpaceLoad, RejectsUnsortedAndDuplicateLists) {
    SpecDoc unsorted;
    unsorted.kernels = "[5, 3]";
    EXPECT_EQ(error_of([&] { unsorted.load(); }), ErrorCode::InvalidSpec);
    SpecDoc dup;
    dup.hardware["Xbar_rows"] = "[64, 64]";
    EXPECT_EQ(error_of([&] { dup.load(); }), ErrorCode::InvalidSpec);
}

TEST(SpaceLoad, RejectsUnknownHardwareGeneAndBadValues) {
    SpecDoc extra;
    extra.hardware["Xbar_depth"] = "[1]";
    EXPECT_EQ(error_of([&] { extra.load(); }), ErrorCode::InvalidSpec);
    SpecDoc bad;
    bad.kernels = "[three]";
    EXPECT_EQ(error_of([&] { bad.load(); }), ErrorCode::InvalidSpec);
    EXPECT_EQ(error_of([] { load_spec_text("template: [unclosed"); }), ErrorCode::InvalidSpec);
}

TEST(SpaceLoad, MissingFile) {
    std::string msg;
    EXPECT_EQ(error_of([] { load_spec_file("/nonexistent/space.yaml"); }, &msg), ErrorCode::Io);
    EXPECT_NE(msg.find("spec not found"), std::string::npos);
}

TEST(Cardinality, Singleton) {
    const auto c = cardinality(test::singleton_spec());
    EXPECT_EQ(c.model, 1);
    EXPECT_EQ(c.quant, 1);
    EXPECT_EQ(c.hardware, 1);
    EXPECT_EQ(c.total, 1);
}

TEST(Cardinality, OneStageTwoDepthsTwoKernels) {
    SpecDoc doc;  // depths {1,2}, kernels {3,5}, one expansion
    const auto c = cardinality(doc.load());
    EXPECT_EQ(c.model, 6);  // 2 + 2^2
}

// Independent count: distinct (active network, quant vector, hardware vector)
// triples over every raw index vector.
void expect_matches_enumeration(const SearchSpaceSpec& spec) {
    const auto c = cardinality(spec);
    const auto e = test::enumerate_counts(spec);
    EXPECT_EQ(c.model, e.model);
    EXPECT_EQ(c.quant, e.quant);
    EXPECT_EQ(c.hardware, e.hardware);
    EXPECT_EQ(c.total, e.total);
}

TEST(Cardinality, MatchesEnumerationTinySpace) {
    const auto spec = test::tiny_spec();
    EXPECT_EQ(cardinality(spec).total, 5184);
    expect_matches_enumeration(spec);
}

TEST(Cardinality, MatchesEnumerationThreeDepths) {
    SpecDoc doc;
    doc.depths = "[1, 2, 3]";
    doc.kernels = "[3, 5]";
    doc.expansions = "[3, 6]";
    doc.dw_in = "[8]";
    doc.pw_w = "[8]";
    doc.hardware = {{"V_op", "[0.6, 0.7]"}, {"Bits_cell", "[4]"}, {"T_cycle", "[4]"}, {"Xbar_rows", "[128]"},
                    {"Xbar_cols", "[128]"}, {"C_per_tile", "[4, 8]"}, {"T_per_router", "[2]"},
                    {"G_per_chip", "[2]"},  {"GLB", "[1]"}};
    expect_matches_enumeration(doc.load());
}

TEST(Cardinality, MatchesEnumerationResNetPerStageDepths) {
    SpecDoc doc;
    doc.template_name = "ResNet50Like";
    doc.table = "templates/resnet50.yaml";
    doc.resolution = 64;
    doc.stages = 4;
    doc.depths = "[[1, 2], [1], [1], [1]]";
    doc.kernels = "[3]";
    doc.expansions = "[0.25]";
    doc.width = "[0.5, 1.0]";
    doc.dw_w = "[8]";
    doc.dw_in = "[8]";
    doc.pw_w = "[4, 8]";
    doc.pw_in = "[8]";
    doc.hardware = {{"V_op", "[0.7]"},       {"Bits_cell", "[1]"}, {"T_cycle", "[4]"},
                    {"Xbar_rows", "[128]"},  {"Xbar_cols", "[128]"}, {"C_per_tile", "[4]"},
                    {"T_per_router", "[2]"}, {"G_per_chip", "[2, 4]"}, {"GLB", "[1]"}};
    expect_matches_enumeration(doc.load());
}

TEST(Cardinality, ReferenceProductIsExact) {
    const auto c = cardinality(test::reference_spec());
    EXPECT_EQ(c.model * c.quant * c.hardware, c.total);
    EXPECT_GT(c.total, BigInt(1) << 200);
    // (9^2 + 9^3 + 9^4)^6 distinct networks.
    EXPECT_EQ(c.model, boost::multiprecision::pow(BigInt(81 + 729 + 6561), 6));
    EXPECT_EQ(c.hardware, BigInt(9) * 4 * 7 * 4 * 4 * 6 * 6 * 6 * 4);
}

TEST(Cardinality, PublishedMagnitudeIdentity) {
    // Model, quantization and hardware counts of the published space.
    const double total = 5.9e38 * 1.2e40 * 1.4e7;
    EXPECT_NEAR(total / 1e85, 9.9, 0.05);
}

TEST(Cardinality, ScientificRendering) {
    EXPECT_EQ(to_scientific(BigInt(1)), "1.0e+0");
    EXPECT_EQ(to_scientific(BigInt(5184)), "5.2e+3");
    EXPECT_EQ(to_scientific(BigInt(99123)), "9.9e+4");
    EXPECT_EQ(to_scientific(BigInt(99623)), "1.0e+5");
    EXPECT_EQ(to_scientific(BigInt(12)), "1.2e+1");
}

TEST(Sampling, DeterministicPerSeed) {
    const auto spec = test::reference_spec();
    RngStream a = RngStream::named(11, "sampling");
    RngStream b = RngStream::named(11, "sampling");
    RngStream c = RngStream::named(12, "sampling");
    bool any_diff = false;
    for (int i = 0; i < 50; ++i) {
        const auto da = sample_uniform(spec, a);
        EXPECT_EQ(da, sample_uniform(spec, b));
        any_diff |= da.encoding != sample_uniform(spec, c).encoding;
    }
    EXPECT_TRUE(any_diff);
}

TEST(Sampling, TwoChoiceGeneIsBalanced) {
    const auto spec = test::tiny_spec();
    std::size_t gene = 0;
    for (std::size_t i = 0; i < spec.genes.size(); ++i)
        if (spec.genes[i].name == "Bits_cell") gene = i;
    ASSERT_EQ(spec.genes[gene].choices, 2u);
    RngStream rng(3);
    const int n = 100000;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        const auto d = sample_uniform(spec, rng);
        for (std::size_t g = 0; g < d.encoding.size(); ++g) {
            ASSERT_GE(d.encoding[g], 0);
            ASSERT_LT(static_cast<std::size_t>(d.encoding[g]), spec.genes[g].choices);
        }
        ones += d.encoding[gene];
    }
    const double sigma = std::sqrt(n * 0.25);
    EXPECT_LE(std::abs(ones - n / 2.0), 3 * sigma);
}

TEST(Encoding, RoundTrip) {
    const auto spec = test::reference_spec();
    RngStream rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto d = sample_uniform(spec, rng);
        EXPECT_EQ(encode(spec, d), d.encoding);
        EXPECT_EQ(decode(spec, encode(spec, d)), d);
    }
}

TEST(Encoding, AllZeroIsFirstChoices) {
    const auto spec = test::reference_spec();
    const auto d = decode(spec, std::vector<int>(spec.genes.size(), 0));
    for (int s = 0; s < spec.stage_count; ++s) EXPECT_EQ(d.model.depths[static_cast<std::size_t>(s)], 2);
    EXPECT_EQ(d.model.kernels[0][0], 3);
    EXPECT_DOUBLE_EQ(d.model.expansions[5][3], 3.0);
    EXPECT_EQ(d.quant.blocks[2][1].weight_bits[0], 4);
    EXPECT_DOUBLE_EQ(d.hardware.v_op, 0.5);
    EXPECT_EQ(d.hardware.bits_cell, 1);
    EXPECT_EQ(d.hardware.xbar_rows, 64);
    EXPECT_EQ(d.hardware.g_per_chip, 2);
    EXPECT_DOUBLE_EQ(d.hardware.glb_mb, 1.0);
}

TEST(Encoding, OutOfRangeNamesGene) {
    const auto spec = test::reference_spec();
    std::vector<int> idx(spec.genes.size(), 0);
    std::size_t rows = 0;
    for (std::size_t i = 0; i < spec.genes.size(); ++i)
        if (spec.genes[i].name == "Xbar_rows") rows = i;
    idx[rows] = 4;
    std::string msg;
    EXPECT_EQ(error_of([&] { decode(spec, idx); }, &msg), ErrorCode::IndexOutOfRange);
    EXPECT_NE(msg.find("Xbar_rows"), std::string::npos);
    idx[rows] = -1;
    EXPECT_EQ(error_of([&] { decode(spec, idx); }), ErrorCode::IndexOutOfRange);
    idx.pop_back();
    EXPECT_EQ(error_of([&] { decode(spec, idx); }), ErrorCode::LengthMismatch);
}

TEST(Encoding, CanonicalZeroesInactiveBlocksOnly) {
    const auto spec = test::tiny_spec();
    // depth index 0 -> one block; second block genes are inactive.
    std::vector<int> idx(spec.genes.size(), 1);
    idx[0] = 0;
    const auto canon = canonical_encoding(spec, idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const bool inactive = spec.genes[i].block == 1;
        EXPECT_EQ(canon[i], inactive ? 0 : idx[i]) << spec.genes[i].name;
        EXPECT_EQ(gene_active(spec, idx, i), !inactive);
    }
    idx[0] = 1;
    EXPECT_EQ(canonical_encoding(spec, idx), idx);
}

TEST(Encoding, MedianHardwareOfReferenceLists) {
    const auto hw = median_hardware(test::reference_spec());
    EXPECT_DOUBLE_EQ(hw.v_op, 0.7);
    EXPECT_EQ(hw.bits_cell, 4);
    EXPECT_DOUBLE_EQ(hw.t_cycle_ns, 4);
    EXPECT_EQ(hw.xbar_rows, 256);
    EXPECT_EQ(hw.xbar_cols, 256);
    EXPECT_EQ(hw.c_per_tile, 16);
    EXPECT_EQ(hw.t_per_router, 8);
    EXPECT_EQ(hw.g_per_chip, 16);
    EXPECT_DOUBLE_EQ(hw.glb_mb, 4);
}

TEST(Encoding, ReferenceModelIsFullDepthEightBit) {
    const auto spec = test::reference_spec();
    const auto d = decode(spec, reference_model_encoding(spec, std::vector<int>(spec.genes.size(), 0)));
    for (std::size_t s = 0; s < 6; ++s) {
        EXPECT_EQ(d.model.depths[s], 4);
        for (const auto& b : d.quant.blocks[s]) {
            EXPECT_EQ(b.weight_bits, (std::array<int, 2>{8, 8}));
            EXPECT_EQ(b.input_bits, (std::array<int, 2>{8, 8}));
        }
    }
}

} // namespace
} // namespace cimnas
