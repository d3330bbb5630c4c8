#include <qens/ensemble.hpp>
#include <qens/selection.hpp>
#include <qens/selftest.hpp>

#include <gtest/gtest.h>

using namespace qens;

namespace {

std::size_t count_kind(const SelectionProgram& p, SelectionGateKind k) {
    return static_cast<std::size_t>(
        std::count_if(p.gates.begin(), p.gates.end(), [k](const SelectionGate& g) { return g.kind == k; }));
}

using RQ = RegisterQubit;
constexpr auto kIdx = DataRegister::index;
constexpr auto kFeat = DataRegister::feature;

}  // namespace

TEST(SelectionProgram, OneControlQubitTwoByTwo) {
    const auto p = build_selection_program(2, 2, 1, ClassifierKind::distance);
    const std::vector<SelectionGate> want{
        {SelectionGateKind::cswap, 0, {RQ{kIdx, 0}, RQ{kIdx, 1}}},
        {SelectionGateKind::cswap, 0, {RQ{kFeat, 0}, RQ{kFeat, 1}}},
        {SelectionGateKind::cnot, 0, {RQ{kIdx, 0}}},
        {SelectionGateKind::cnot, 0, {RQ{kFeat, 0}}},
        {SelectionGateKind::ccx, -1, {RQ{kIdx, 0}, RQ{kFeat, 0}}},
    };
    EXPECT_EQ(p.gates, want);
}

TEST(SelectionProgram, NoControlQubitsLeavesOnlyToffoli) {
    const auto p = build_selection_program(3, 2, 0, ClassifierKind::cosine);
    ASSERT_EQ(p.gates.size(), 1u);
    EXPECT_EQ(p.gates[0].kind, SelectionGateKind::ccx);
}

TEST(SelectionProgram, SecondLoopPairs) {
    // First loop for d = 2, n = m = 4: per idx one CSWAP and one CNOT per register.
    const auto p = build_selection_program(4, 4, 2, ClassifierKind::distance);
    const std::size_t first_loop = 2 * 2 * 2;
    const std::size_t second_loop = p.gates.size() - 1 - first_loop;
    EXPECT_EQ(second_loop, 4u);
    EXPECT_EQ(count_kind(p, SelectionGateKind::cswap), 4u + 4u);
    EXPECT_EQ(count_kind(p, SelectionGateKind::cnot), 4u);
}

TEST(SelectionProgram, SwapKindMirrorsFeatureGatesOnTestRegister) {
    const auto p = build_selection_program(2, 2, 2, ClassifierKind::swap);
    std::size_t feature = 0, test = 0;
    for (const auto& g : p.gates) {
        if (g.kind == SelectionGateKind::ccx) continue;
        feature += g.targets[0].reg == DataRegister::feature;
        test += g.targets[0].reg == DataRegister::test;
    }
    EXPECT_GT(feature, 0u);
    EXPECT_EQ(feature, test);
    // The Toffoli never looks at the test register.
    EXPECT_EQ(p.gates.back().targets[1].reg, DataRegister::feature);
}

TEST(SelectionProgram, RequiresDataQubits) {
    EXPECT_THROW(build_selection_program(0, 2, 1, ClassifierKind::distance), UsageError);
    EXPECT_THROW(build_selection_program(2, 0, 1, ClassifierKind::distance), UsageError);
}

TEST(SelectionProgram, WideControlOnNarrowRegisters) {
    // d exceeds both register widths; every emitted gate still addresses real qubits.
    const auto p = build_selection_program(2, 1, 3, ClassifierKind::swap);
    for (const auto& g : p.gates) {
        for (const auto& t : g.targets) EXPECT_LT(t.bit, t.reg == DataRegister::index ? 2 : 1);
        if (g.kind != SelectionGateKind::ccx) EXPECT_LT(g.control_bit, 3);
    }
    const auto layout = make_ensemble_layout(ClassifierKind::swap, 2, 1, 3);
    Circuit c{layout.num_qubits, {}};
    for (auto& op : to_gates(p, layout)) EXPECT_NO_THROW(c.add(op));
}

TEST(ClassicalOracle, ZeroControlIsIdentity) {
    const auto p = build_selection_program(2, 2, 2, ClassifierKind::distance);
    const auto a = classical_selection_oracle(p, 0, 1, 1);
    EXPECT_EQ(a.index, 1u);
    EXPECT_EQ(a.feature, 1u);
    EXPECT_FALSE(a.kept);
    const auto b = classical_selection_oracle(p, 0, 0, 1);
    EXPECT_EQ(b.index, 0u);
    EXPECT_TRUE(b.kept);
    EXPECT_THROW(classical_selection_oracle(p, 4, 0, 0), UsageError);
}

TEST(ClassicalOracle, TracedBranchOne) {
    // c = 1: CSWAP(0, 1) leaves 00 alone, CNOT flips bit 0 -> 01.
    const auto p = build_selection_program(2, 2, 1, ClassifierKind::distance);
    EXPECT_EQ(classical_selection_oracle(p, 1, 0, 0).index, 1u);
    // 01 -> swap -> 10 -> CNOT -> 11
    EXPECT_EQ(classical_selection_oracle(p, 1, 1, 0).index, 3u);
    // The complementary outcome keeps exactly the marked quarter.
    std::size_t kept0 = 0, kept1 = 0;
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) {
            kept0 += classical_selection_oracle(p, 1, i, j, 0).kept;
            kept1 += classical_selection_oracle(p, 1, i, j, 1).kept;
        }
    EXPECT_EQ(kept0, 12u);
    EXPECT_EQ(kept1, 4u);
}

TEST(ClassicalOracle, GeometrySweep) {
    const auto r = selftest::selection_geometry(41);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(ClassicalOracle, KeptFractionForWiderRegisters) {
    for (int d = 0; d <= 4; ++d)
        for (int n = 1; n <= 4; ++n)
            for (int m = 1; m <= 4; ++m) {
                const auto p = build_selection_program(n, m, d, ClassifierKind::cosine);
                for (Index c = 0; c < (Index{1} << d); ++c) {
                    std::size_t kept = 0;
                    for (Index i = 0; i < (Index{1} << n); ++i)
                        for (Index j = 0; j < (Index{1} << m); ++j) kept += classical_selection_oracle(p, c, i, j).kept;
                    EXPECT_EQ(4 * kept, 3u << (n + m)) << d << n << m << c;
                }
            }
}

TEST(ClassicalOracle, TestRegisterFollowsFeatureRegister) {
    for (int d = 1; d <= 3; ++d) {
        const auto p = build_selection_program(2, 3, d, ClassifierKind::swap);
        for (Index c = 0; c < (Index{1} << d); ++c)
            for (Index t = 0; t < 8; ++t) EXPECT_EQ(map_test_feature(p, c, t), classical_selection_oracle(p, c, 0, t).feature);
    }
}

TEST(SelectionSuccess, UniformDataIsThreeQuarters) {
    for (auto kind : {ClassifierKind::distance, ClassifierKind::cosine}) {
        Dataset d;
        for (int i = 0; i < 4; ++i) {
            d.features.push_back(Vector(4, 1.0));
            d.labels.push_back(i % 2 ? -1 : 1);
        }
        EnsembleConfig cfg;
        cfg.d = 2;
        cfg.kind = kind;
        EXPECT_NEAR(selection_success_probability(cfg, encode_training_set(d), Vector(4, 0.5)), 0.75, 1e-9);
    }
}

TEST(SelectionSuccess, ConcentratedDataIsCertain) {
    // Every amplitude sits on an even feature, so bit0(j) = 0 and nothing is marked.
    Dataset d;
    d.features = {{1, 0, 0, 0}, {0, 0, 1, 0}, {1, 0, 1, 0}, {0, 0, 1, 0}};
    d.labels = {1, -1, -1, 1};
    EnsembleConfig cfg;
    cfg.d = 0;
    EXPECT_NEAR(selection_success_probability(cfg, encode_training_set(d), Vector{1, 0, 0, 0}), 1.0, 1e-12);
}
