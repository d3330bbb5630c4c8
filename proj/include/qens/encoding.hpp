// Datasets, feature normalization and amplitude encoding of the training set.

#pragma once

#include <qens/errors.hpp>
#include <qens/layout.hpp>
#include <qens/statevector.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qens {

using Vector = std::vector<double>;

struct Dataset {
    std::vector<Vector> features;  // N rows of M entries
    std::vector<int> labels;       // +1 / -1
    std::vector<std::string> feature_names;

    std::size_t size() const noexcept { return features.size(); }
    std::size_t num_features() const noexcept { return features.empty() ? 0 : features.front().size(); }

    Dataset subset(std::span<const std::size_t> rows) const {
        Dataset out;
        out.feature_names = feature_names;
        for (auto r : rows) {
            out.features.push_back(features.at(r));
            out.labels.push_back(labels.at(r));
        }
        return out;
    }

    void validate() const {
        if (features.size() != labels.size()) throw UsageError("feature and label counts differ");
        const std::size_t m = num_features();
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (features[i].size() != m) throw UsageError("row " + std::to_string(i) + " has wrong width");
            for (double v : features[i])
                if (!std::isfinite(v)) throw UsageError("row " + std::to_string(i) + " has a non-finite entry");
            if (labels[i] != 1 && labels[i] != -1) throw UsageError("labels must be +1 or -1");
        }
    }
};

enum class NormalizationKind { none, standard, minmax };

inline std::string to_string(NormalizationKind k) {
    switch (k) {
        case NormalizationKind::none: return "none";
        case NormalizationKind::standard: return "std";
        case NormalizationKind::minmax: return "minmax";
    }
    return "?";
}

inline NormalizationKind parse_normalization(const std::string& s) {
    if (s == "none") return NormalizationKind::none;
    if (s == "std") return NormalizationKind::standard;
    if (s == "minmax") return NormalizationKind::minmax;
    throw ConfigError("unknown normalization '" + s + "' (expected none, std or minmax)");
}

// Per-feature parameters fitted on training rows: (mean, population sigma)
// for std, (min, max) for minmax.
struct NormalizationSpec {
    NormalizationKind kind = NormalizationKind::none;
    Vector first;
    Vector second;
};

inline NormalizationSpec fit_normalization(const Dataset& train, NormalizationKind kind) {
    NormalizationSpec spec{kind, {}, {}};
    if (kind == NormalizationKind::none) return spec;
    const std::size_t n = train.size(), m = train.num_features();
    if (n < 2) throw UsageError("normalization needs at least two training rows");
    spec.first.assign(m, 0.0);
    spec.second.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (kind == NormalizationKind::standard) {
            double mean = 0.0;
            for (const auto& row : train.features) mean += row[j];
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (const auto& row : train.features) var += (row[j] - mean) * (row[j] - mean);
            spec.first[j] = mean;
            spec.second[j] = std::sqrt(var / static_cast<double>(n));
        } else {
            double lo = train.features[0][j], hi = lo;
            for (const auto& row : train.features) {
                lo = std::min(lo, row[j]);
                hi = std::max(hi, row[j]);
            }
            spec.first[j] = lo;
            spec.second[j] = hi;
        }
    }
    return spec;
}

inline Vector apply_normalization(const NormalizationSpec& spec, std::span<const double> x) {
    Vector out(x.begin(), x.end());
    if (spec.kind == NormalizationKind::none) return out;
    if (x.size() != spec.first.size()) throw UsageError("feature dimension does not match normalization");
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (spec.kind == NormalizationKind::standard) {
            out[j] = spec.second[j] > 0.0 ? (x[j] - spec.first[j]) / spec.second[j] : 0.0;
        } else {
            const double range = spec.second[j] - spec.first[j];
            const double v = range > 0.0 ? (x[j] - spec.first[j]) / range : 0.0;
            out[j] = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

inline Dataset apply_normalization(const NormalizationSpec& spec, const Dataset& data) {
    Dataset out = data;
    for (auto& row : out.features) row = apply_normalization(spec, row);
    return out;
}

inline constexpr double kNormEpsilon = 1e-12;

inline double l2_norm(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
}

inline Vector unit_normalize(std::span<const double> x) {
    const double norm = l2_norm(x);
    if (!(norm > kNormEpsilon)) throw ZeroVector("cannot amplitude-encode a zero vector");
    Vector out(x.begin(), x.end());
    for (auto& v : out) v /= norm;
    return out;
}

inline int ceil_log2(std::size_t v) {
    int bits = 0;
    while ((std::size_t{1} << bits) < v) ++bits;
    return bits;
}

// alpha holds the unit-normalized training rows, zero-padded to 2^n x 2^m.
struct EncodedTrainingSet {
    std::size_t N = 0;
    std::size_t M = 0;
    int n = 0;
    int m = 0;
    std::vector<double> alpha;          // row-major 2^n x 2^m
    std::vector<std::uint8_t> labels;   // 2^n label bits, (1 - y) / 2

    std::size_t rows() const noexcept { return std::size_t{1} << n; }
    std::size_t cols() const noexcept { return std::size_t{1} << m; }
    double at(std::size_t i, std::size_t j) const { return alpha[i * cols() + j]; }
    std::span<const double> row(std::size_t i) const { return {alpha.data() + i * cols(), cols()}; }
};

inline std::uint8_t label_bit(int y) { return static_cast<std::uint8_t>((1 - y) / 2); }
inline int label_sign(std::uint8_t l) { return 1 - 2 * static_cast<int>(l); }

// `min_index_qubits` / `min_feature_qubits` widen the registers beyond
// ceil(log2) when a caller (the ensemble) needs at least one qubit in each.
inline EncodedTrainingSet encode_training_set(const Dataset& train, int min_index_qubits = 0,
                                              int min_feature_qubits = 0) {
    train.validate();
    if (train.size() == 0 || train.num_features() == 0) throw UsageError("cannot encode an empty training set");
    EncodedTrainingSet enc;
    enc.N = train.size();
    enc.M = train.num_features();
    enc.n = std::max(ceil_log2(enc.N), min_index_qubits);
    enc.m = std::max(ceil_log2(enc.M), min_feature_qubits);
    enc.alpha.assign(enc.rows() * enc.cols(), 0.0);
    enc.labels.assign(enc.rows(), 0);
    for (std::size_t i = 0; i < enc.N; ++i) {
        const Vector u = unit_normalize(train.features[i]);
        std::copy(u.begin(), u.end(), enc.alpha.begin() + static_cast<std::ptrdiff_t>(i * enc.cols()));
        enc.labels[i] = label_bit(train.labels[i]);
    }
    return enc;
}

// Test vector zero-padded to the feature register width.
inline Vector padded_test_vector(const EncodedTrainingSet& enc, std::span<const double> x) {
    if (x.size() != enc.M) {
        throw UsageError("test vector has " + std::to_string(x.size()) + " features, training set has " +
                         std::to_string(enc.M));
    }
    Vector v(enc.cols(), 0.0);
    std::copy(x.begin(), x.end(), v.begin());
    return v;
}

// Amplitudes of the classifier's initial state (no selection ancilla or
// control register), indexed by basis label under `layout`.
inline std::vector<complex> initial_amplitudes(ClassifierKind kind, const EncodedTrainingSet& enc,
                                               std::span<const double> x, const ClassifierLayout& layout) {
    const Vector xv = padded_test_vector(enc, x);
    if (std::abs(l2_norm(xv) - 1.0) > 1e-9) throw UsageError("test vector must be unit norm");

    std::vector<complex> amps(std::size_t{1} << layout.num_qubits);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const auto N = static_cast<double>(enc.N);

    for (std::size_t i = 0; i < enc.N; ++i) {
        const Index li = enc.labels[i];
        const Index base = layout.index.place(i);
        for (std::size_t j = 0; j < enc.cols(); ++j) {
            const Index fj = base | layout.feature.place(j);
            const double a = enc.at(i, j);
            switch (kind) {
                case ClassifierKind::cosine: {
                    // (|i>|x_i>|l_i>|0>_a + |i>|x>|->|1>_a) / sqrt(2N), auxiliary in |+>, SWAP control in |0>.
                    const double f = inv_sqrt2 / std::sqrt(2.0 * N);
                    const Index plus0 = 0, plus1 = Index{1} << layout.aux_plus;
                    const Index a1 = Index{1} << layout.ancilla;
                    const Index lbit = Index{1} << layout.label;
                    for (Index aux : {plus0, plus1}) {
                        amps[fj | (li ? lbit : 0) | aux] += f * a;
                        amps[fj | a1 | aux] += f * xv[j] * inv_sqrt2;
                        amps[fj | a1 | lbit | aux] -= f * xv[j] * inv_sqrt2;
                    }
                    break;
                }
                case ClassifierKind::distance: {
                    // |i>(|0>_a|x> + |1>_a|x_i>)|l_i> / sqrt(2N)
                    const double f = 1.0 / std::sqrt(2.0 * N);
                    const Index lb = li ? Index{1} << layout.label : 0;
                    amps[fj | lb] += f * xv[j];
                    amps[fj | lb | (Index{1} << layout.ancilla)] += f * a;
                    break;
                }
                case ClassifierKind::swap: {
                    // |i>|x_i>|l_i>|x> / sqrt(N), SWAP control in |0>.
                    if (a == 0.0) break;
                    const double f = 1.0 / std::sqrt(N);
                    const Index lb = li ? Index{1} << layout.label : 0;
                    for (std::size_t t = 0; t < enc.cols(); ++t)
                        amps[fj | lb | layout.test.place(t)] += f * a * xv[t];
                    break;
                }
            }
        }
    }
    return amps;
}

struct InitialState {
    Statevector state;
    ClassifierLayout layout;
};

inline InitialState build_initial_state(ClassifierKind kind, const EncodedTrainingSet& enc, std::span<const double> x) {
    auto layout = make_layout(kind, enc.n, enc.m);
    auto amps = initial_amplitudes(kind, enc, x, layout);
    return {Statevector::from_amplitudes(layout.num_qubits, std::move(amps)), layout};
}

}  // namespace qens
