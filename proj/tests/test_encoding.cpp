#include <qens/encoding.hpp>
#include <qens/selftest.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace qens;

namespace {

Dataset column(std::initializer_list<double> values) {
    Dataset d;
    for (double v : values) {
        d.features.push_back({v});
        d.labels.push_back(1);
    }
    return d;
}

// Tensor product of single-register kets; factors[k] spans register k whose
// lowest qubit is offsets[k].
std::vector<double> ket_product(const std::vector<std::vector<double>>& factors, const std::vector<int>& offsets,
                                int num_qubits) {
    std::vector<double> out(std::size_t{1} << num_qubits, 0.0);
    std::vector<std::size_t> digit(factors.size(), 0);
    for (;;) {
        double amp = 1.0;
        Index basis = 0;
        for (std::size_t r = 0; r < factors.size(); ++r) {
            amp *= factors[r][digit[r]];
            basis |= Index{digit[r]} << offsets[r];
        }
        out[basis] += amp;
        std::size_t r = 0;
        while (r < factors.size() && ++digit[r] == factors[r].size()) digit[r++] = 0;
        if (r == factors.size()) break;
    }
    return out;
}

std::vector<double> one_hot(std::size_t size, std::size_t k) {
    std::vector<double> v(size, 0.0);
    v[k] = 1.0;
    return v;
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double f) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f * v[k];
}

}  // namespace

TEST(Normalization, NoneIsEmptyAndIdentity) {
    const auto spec = fit_normalization(column({1, 2}), NormalizationKind::none);
    EXPECT_TRUE(spec.first.empty());
    EXPECT_EQ(apply_normalization(spec, Vector{5.0}), Vector{5.0});
}

TEST(Normalization, MinmaxFitAndClip) {
    const auto spec = fit_normalization(column({2, 4, 6}), NormalizationKind::minmax);
    EXPECT_EQ(spec.first[0], 2.0);
    EXPECT_EQ(spec.second[0], 6.0);
    EXPECT_EQ(apply_normalization(spec, Vector{8.0})[0], 1.0);
    EXPECT_EQ(apply_normalization(spec, Vector{0.0})[0], 0.0);
    EXPECT_EQ(apply_normalization(spec, Vector{3.0})[0], 0.25);
}

TEST(Normalization, StandardUsesPopulationSigma) {
    const auto spec = fit_normalization(column({1, 2, 3}), NormalizationKind::standard);
    EXPECT_DOUBLE_EQ(spec.first[0], 2.0);
    EXPECT_NEAR(spec.second[0], 0.816496580927726, 1e-15);
    const double want[] = {-1.224744871391589, 0.0, 1.224744871391589};
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(apply_normalization(spec, Vector{1.0 + k})[0], want[k], 1e-12);
}

TEST(Normalization, StandardOnMeanIsZero) {
    Dataset d;
    d.features = {{1, 10, 5}, {3, 20, 5}, {5, 60, 5}};
    d.labels = {1, -1, 1};
    const auto spec = fit_normalization(d, NormalizationKind::standard);
    for (double v : apply_normalization(spec, spec.first)) EXPECT_NEAR(v, 0.0, 1e-15);
    // Constant third column has sigma 0 and maps to 0.
    EXPECT_EQ(spec.second[2], 0.0);
    EXPECT_EQ(apply_normalization(spec, Vector{0, 0, 99})[2], 0.0);
}

TEST(Normalization, NeedsTwoRows) {
    EXPECT_THROW(fit_normalization(column({1}), NormalizationKind::standard), UsageError);
}

TEST(Normalization, MinmaxIdempotentOnRange) {
    selftest::Rng rng(21);
    std::uniform_real_distribution<double> u(-5, 5);
    Dataset d;
    for (int i = 0; i < 20; ++i) {
        d.features.push_back({u(rng), u(rng), u(rng)});
        d.labels.push_back(1);
    }
    const auto spec = fit_normalization(d, NormalizationKind::minmax);
    for (const auto& row : d.features) {
        const auto once = apply_normalization(spec, row);
        for (double v : once) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        // In-range data stays in range: a second pass through the unit-range spec is a no-op.
        NormalizationSpec unit{NormalizationKind::minmax, Vector(3, 0.0), Vector(3, 1.0)};
        EXPECT_EQ(apply_normalization(unit, once), once);
    }
}

TEST(Normalization, ParametersDependOnTrainingRowsOnly) {
    Dataset train = column({1, 4, 9});
    const auto before = fit_normalization(train, NormalizationKind::standard);
    Dataset test = column({100, -3});
    test.features[0][0] = 1e6;  // mutate the test partition
    const auto after = fit_normalization(train, NormalizationKind::standard);
    EXPECT_EQ(before.first, after.first);
    EXPECT_EQ(before.second, after.second);
}

TEST(UnitNormalize, Basics) {
    const auto v = unit_normalize(Vector{3, 4});
    EXPECT_DOUBLE_EQ(v[0], 0.6);
    EXPECT_DOUBLE_EQ(v[1], 0.8);
    const Vector u{0.6, 0.8};
    EXPECT_EQ(unit_normalize(u), u);
    EXPECT_THROW(unit_normalize(Vector{0, 0}), ZeroVector);
}

TEST(EncodeTrainingSet, SinglePoint) {
    Dataset d;
    d.features = {{1, 0}};
    d.labels = {1};
    const auto enc = encode_training_set(d);
    EXPECT_EQ(enc.n, 0);
    EXPECT_EQ(enc.m, 1);
    EXPECT_EQ(enc.alpha, (std::vector<double>{1, 0}));
    EXPECT_EQ(enc.labels, (std::vector<std::uint8_t>{0}));
}

TEST(EncodeTrainingSet, PaddingAndLabels) {
    Dataset d;
    d.features = {{1, 2, 2}, {0, 3, 4}, {5, 0, 0}};
    d.labels = {1, -1, -1};
    const auto enc = encode_training_set(d);
    EXPECT_EQ(enc.n, 2);
    EXPECT_EQ(enc.m, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(l2_norm(enc.row(i)), 1.0, 1e-12);
        EXPECT_EQ(enc.at(i, 3), 0.0);
    }
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(enc.at(3, j), 0.0);
    EXPECT_EQ(enc.labels, (std::vector<std::uint8_t>{0, 1, 1, 0}));
    EXPECT_EQ(label_bit(-1), 1);
    EXPECT_EQ(label_bit(1), 0);
}

TEST(EncodeTrainingSet, RoundTripRecoversUnitRows) {
    selftest::Rng rng(22);
    std::normal_distribution<double> g;
    Dataset d;
    for (int i = 0; i < 7; ++i) {
        d.features.push_back({g(rng), g(rng), g(rng)});
        d.labels.push_back(i % 2 ? 1 : -1);
    }
    const auto enc = encode_training_set(d);
    for (std::size_t i = 0; i < 7; ++i) {
        const auto u = unit_normalize(d.features[i]);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(enc.at(i, j), u[j]);
    }
}

TEST(EncodeTrainingSet, ZeroRowPropagates) {
    Dataset d;
    d.features = {{1, 0}, {0, 0}};
    d.labels = {1, -1};
    EXPECT_THROW(encode_training_set(d), ZeroVector);
}

TEST(InitialState, DistanceSingleIdenticalPoint) {
    Dataset d;
    d.features = {{0.6, 0.8}};
    d.labels = {1};
    const auto enc = encode_training_set(d);
    auto [state, layout] = build_initial_state(ClassifierKind::distance, enc, Vector{0.6, 0.8});
    EXPECT_NEAR(state.norm(), 1.0, 1e-12);
    apply_gate_inplace(state, GateOp::h(layout.ancilla));
    EXPECT_NEAR(probability(state, layout.ancilla, 0), 1.0, 1e-12);
}

TEST(InitialState, DimensionAndNormChecks) {
    Dataset d;
    d.features = {{1, 0, 0}};
    d.labels = {1};
    const auto enc = encode_training_set(d);
    EXPECT_THROW(build_initial_state(ClassifierKind::swap, enc, Vector{1, 0}), UsageError);
    EXPECT_THROW(build_initial_state(ClassifierKind::swap, enc, Vector{1, 1, 0}), UsageError);
}

TEST(InitialState, SwapTestRegisterHoldsX) {
    selftest::Rng rng(23);
    const auto d = selftest::random_dataset(rng, 5, 4);
    const auto x = selftest::random_unit_vector(rng, 4);
    const auto enc = encode_training_set(d);
    const auto [state, layout] = build_initial_state(ClassifierKind::swap, enc, x);
    // Product state: amplitude / (amplitude summed coefficient) factorizes, so
    // the reduced density on the test register is |x><x|. Check <x| rho |x> = 1.
    std::vector<double> rho(16, 0.0);
    for (Index a = 0; a < state.dimension(); ++a) {
        const Index rest = a & ~(Index{3} << layout.test.offset);
        for (Index t = 0; t < 4; ++t) {
            const Index b = rest | layout.test.place(t);
            rho[layout.test.extract(a) * 4 + t] += (state[a] * std::conj(state[b])).real();
        }
    }
    double fidelity = 0.0;
    for (Index r = 0; r < 4; ++r)
        for (Index c = 0; c < 4; ++c) fidelity += x[r] * rho[r * 4 + c] * x[c];
    EXPECT_NEAR(fidelity, 1.0, 1e-12);
}

// Injected amplitudes against kets assembled register by register.
TEST(InitialState, MatchesRegisterwiseConstruction) {
    selftest::Rng rng(24);
    for (int t = 0; t < 20; ++t) {
        const auto N = static_cast<std::size_t>(selftest::uniform_int(rng, 1, 6));
        const auto M = static_cast<std::size_t>(selftest::uniform_int(rng, 2, 4));
        const auto d = selftest::random_dataset(rng, N, M);
        const auto x = selftest::random_unit_vector(rng, M);
        const auto enc = encode_training_set(d);
        const Vector xv = padded_test_vector(enc, x);
        const double s2 = M_SQRT1_2;
        const std::vector<double> zero{1, 0}, one{0, 1}, plus{s2, s2}, minus{s2, -s2};

        for (auto kind : {ClassifierKind::cosine, ClassifierKind::distance, ClassifierKind::swap}) {
            const auto [state, L] = build_initial_state(kind, enc, x);
            std::vector<double> want(state.dimension(), 0.0);
            for (std::size_t i = 0; i < N; ++i) {
                const auto idx = one_hot(enc.rows(), i);
                const Vector xi(enc.row(i).begin(), enc.row(i).end());
                const auto& li = enc.labels[i] ? one : zero;
                switch (kind) {
                    case ClassifierKind::cosine: {
                        const double f = 1.0 / std::sqrt(2.0 * static_cast<double>(N));
                        add_scaled(want,
                                   ket_product({zero, plus, zero, li, xi, idx},
                                               {L.swap_control, L.aux_plus, L.ancilla, L.label, L.feature.offset,
                                                L.index.offset},
                                               L.num_qubits),
                                   f);
                        add_scaled(want,
                                   ket_product({zero, plus, one, minus, xv, idx},
                                               {L.swap_control, L.aux_plus, L.ancilla, L.label, L.feature.offset,
                                                L.index.offset},
                                               L.num_qubits),
                                   f);
                        break;
                    }
                    case ClassifierKind::distance: {
                        const double f = 1.0 / std::sqrt(2.0 * static_cast<double>(N));
                        add_scaled(want,
                                   ket_product({zero, li, xv, idx}, {L.ancilla, L.label, L.feature.offset, L.index.offset},
                                               L.num_qubits),
                                   f);
                        add_scaled(want,
                                   ket_product({one, li, xi, idx}, {L.ancilla, L.label, L.feature.offset, L.index.offset},
                                               L.num_qubits),
                                   f);
                        break;
                    }
                    case ClassifierKind::swap:
                        add_scaled(want,
                                   ket_product({zero, li, xi, idx, xv},
                                               {L.swap_control, L.label, L.feature.offset, L.index.offset,
                                                L.test.offset},
                                               L.num_qubits),
                                   1.0 / std::sqrt(static_cast<double>(N)));
                        break;
                }
            }
            for (Index k = 0; k < state.dimension(); ++k) {
                ASSERT_NEAR(state[k].real(), want[k], 1e-12) << to_string(kind) << " basis " << k;
                ASSERT_EQ(state[k].imag(), 0.0);
            }
            EXPECT_NEAR(state.norm(), 1.0, 1e-12);
        }
    }
}

TEST(Layout, RegisterOrderAndDistinctQubits) {
    const auto c = make_layout(ClassifierKind::cosine, 2, 1);
    EXPECT_EQ(c.swap_control, 0);
    EXPECT_EQ(c.aux_plus, 1);
    EXPECT_EQ(c.ancilla, 2);
    EXPECT_EQ(c.label, 3);
    EXPECT_EQ(c.feature.offset, 4);
    EXPECT_EQ(c.index.offset, 5);
    EXPECT_EQ(c.num_qubits, 7);

    const auto s = make_layout(ClassifierKind::swap, 3, 2);
    EXPECT_EQ(s.test.offset, 1 + 1 + 2 + 3);
    EXPECT_EQ(s.num_qubits, 1 + 1 + 2 + 3 + 2);

    for (auto kind : {ClassifierKind::cosine, ClassifierKind::distance, ClassifierKind::swap}) {
        auto q = make_layout(kind, 3, 2).all_qubits();
        std::sort(q.begin(), q.end());
        EXPECT_EQ(std::adjacent_find(q.begin(), q.end()), q.end());
        EXPECT_EQ(static_cast<int>(q.size()), make_layout(kind, 3, 2).num_qubits);
    }
}
