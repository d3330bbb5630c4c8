// The cosine, distance and SWAP-test classifiers: circuit construction,
// execution on the statevector, output decoding, and closed-form oracles.

#pragma once

#include <qens/encoding.hpp>
#include <qens/errors.hpp>
#include <qens/layout.hpp>
#include <qens/statevector.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace qens {

// sign(0) is +1.
inline int sign_with_tiebreak(double score) {
    if (std::isnan(score)) throw UsageError("sign of NaN");
    return score >= 0.0 ? 1 : -1;
}

struct ClassifierOutput {
    double raw = 0.0;          // cosine: P(1); distance: P(0|0); swap: <Z_a Z_l>
    double score = 0.0;        // decision value; label = sign(score)
    int label = 1;
    double output_zero = 0.0;  // probability of output bit 0 (conditioned on acceptance)
    double accept = 1.0;       // distance: P(a = 0); 1 for the other kinds
};

// Sign rules: cosine 1 - 4 P(1), distance P(0|0) - 1/2, swap the expectation itself.
inline ClassifierOutput make_output(ClassifierKind kind, double raw, double accept = 1.0) {
    ClassifierOutput out;
    out.raw = raw;
    out.accept = accept;
    switch (kind) {
        case ClassifierKind::cosine:
            out.score = 1.0 - 4.0 * raw;
            out.output_zero = 1.0 - raw;
            break;
        case ClassifierKind::distance:
            out.score = raw - 0.5;
            out.output_zero = raw;
            break;
        case ClassifierKind::swap:
            out.score = raw;
            out.output_zero = 0.5 * (1.0 + raw);
            break;
    }
    out.label = sign_with_tiebreak(out.score);
    return out;
}

inline Circuit append_classifier_circuit(Circuit circuit, const ClassifierLayout& layout) {
    switch (layout.kind) {
        case ClassifierKind::cosine:
            circuit.add(GateOp::h(layout.swap_control));
            circuit.add(GateOp::swap(layout.aux_plus, layout.ancilla, {layout.swap_control}));
            circuit.add(GateOp::h(layout.swap_control));
            break;
        case ClassifierKind::distance:
            circuit.add(GateOp::h(layout.ancilla));
            break;
        case ClassifierKind::swap:
            circuit.add(GateOp::h(layout.swap_control));
            for (int k = 0; k < layout.feature.width; ++k)
                circuit.add(GateOp::swap(layout.feature.qubit(k), layout.test.qubit(k), {layout.swap_control}));
            circuit.add(GateOp::h(layout.swap_control));
            break;
    }
    return circuit;
}

// Qubits read out by each kind, in key order: cosine {control};
// distance {ancilla, label}; swap {control, label}.
inline std::vector<int> output_qubits(const ClassifierLayout& layout) {
    switch (layout.kind) {
        case ClassifierKind::cosine: return {layout.swap_control};
        case ClassifierKind::distance: return {layout.ancilla, layout.label};
        case ClassifierKind::swap: return {layout.swap_control, layout.label};
    }
    return {};
}

// Decodes a joint distribution (or normalized counts) over output_qubits().
inline ClassifierOutput decode_output(ClassifierKind kind, std::span<const double> dist) {
    switch (kind) {
        case ClassifierKind::cosine: {
            const double total = dist[0] + dist[1];
            return make_output(kind, dist[1] / total);
        }
        case ClassifierKind::distance: {
            const double total = dist[0] + dist[1] + dist[2] + dist[3];
            const double accepted = dist[0] + dist[2];  // ancilla bit 0
            if (accepted <= kPostselectEpsilon * total) throw ImpossibleOutcome("distance classifier: ancilla never 0");
            return make_output(kind, dist[0] / accepted, accepted / total);
        }
        case ClassifierKind::swap: {
            const double total = dist[0] + dist[1] + dist[2] + dist[3];
            // key = control | label << 1
            const double p00 = dist[0], p10 = dist[1], p01 = dist[2], p11 = dist[3];
            return make_output(kind, (p00 - p01 - p10 + p11) / total);
        }
    }
    return {};
}

// Classifier circuit executed on the initial state; returns the final state.
inline Statevector execute_classifier(ClassifierKind kind, const EncodedTrainingSet& enc, std::span<const double> x,
                                      ClassifierLayout* layout_out = nullptr) {
    auto [state, layout] = build_initial_state(kind, enc, x);
    run_inplace(state, append_classifier_circuit(Circuit{layout.num_qubits, {}}, layout));
    if (layout_out) *layout_out = layout;
    return std::move(state);
}

// Exact expectation values from the final statevector.
inline ClassifierOutput run_classifier(ClassifierKind kind, const EncodedTrainingSet& enc, std::span<const double> x) {
    ClassifierLayout layout;
    Statevector state = execute_classifier(kind, enc, x, &layout);
    switch (kind) {
        case ClassifierKind::cosine:
            return make_output(kind, probability(state, layout.swap_control, 1));
        case ClassifierKind::distance: {
            const double p0 = postselect_inplace(state, layout.ancilla, 0);
            return make_output(kind, probability(state, layout.label, 0), p0);
        }
        case ClassifierKind::swap: {
            const auto q = output_qubits(layout);
            return decode_output(kind, marginal_distribution(state, q));
        }
    }
    return {};
}

// Shot-based estimate: `shots` executions measured on the output qubits.
template <class Rng>
ClassifierOutput run_classifier_sampled(ClassifierKind kind, const EncodedTrainingSet& enc, std::span<const double> x,
                                        std::size_t shots, Rng& rng) {
    ClassifierLayout layout;
    const Statevector state = execute_classifier(kind, enc, x, &layout);
    const auto q = output_qubits(layout);
    const auto counts = sample(state, std::span<const int>(q), shots, rng);
    std::vector<double> freq(std::size_t{1} << q.size(), 0.0);
    for (auto [key, c] : counts) freq[key] = static_cast<double>(c);
    return decode_output(kind, freq);
}

// One training instance as seen by the classifier: possibly non-unit
// training vector, the test vector it is paired with, and its label bit.
// For the cosine and distance kinds the test vector may differ per instance
// (data selection trims it together with the training row).
struct Instance {
    Vector train;
    Vector test;
    std::uint8_t label = 0;
};

struct AnalyticResult {
    ClassifierOutput output;
    // Unnormalized squared norm of the classifier state built from the
    // instances (before any in-classifier post-selection).
    double mass = 0.0;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}
}  // namespace detail

// Closed-form output probabilities with explicit norms:
//   cosine   P(1)   = 1/4 (1 - 2 sum y_i <x|x_i> / (sqrt2 sum (|x|^2 + |x_i|^2)))
//   distance P(k|0) = sum_{l_i=k} |x + x_i|^2 / sum_i |x + x_i|^2
//   swap     P(q,k) = 1/(2Z) sum_{l_i=k} |x|^2 |x_i|^2 + (-1)^q <x|x_i>^2,  Z = sum |x|^2 |x_i|^2
// The sign rules only carry their classical meaning for unit-norm inputs.
inline AnalyticResult analytic_oracle(ClassifierKind kind, std::span<const Instance> instances) {
    double mass = 0.0;
    for (const auto& in : instances) {
        if (in.train.size() != in.test.size()) throw UsageError("instance train/test dimension mismatch");
        const double nu = detail::dot(in.train, in.train), nv = detail::dot(in.test, in.test);
        mass += kind == ClassifierKind::swap ? nu * nv : nu + nv;
    }
    if (!(mass > kPostselectEpsilon)) throw ImpossibleOutcome("classifier state has zero norm");

    switch (kind) {
        case ClassifierKind::cosine: {
            double s = 0.0;
            for (const auto& in : instances) s += label_sign(in.label) * detail::dot(in.test, in.train);
            const double p1 = 0.25 * (1.0 - 2.0 * s / (std::sqrt(2.0) * mass));
            return {make_output(kind, p1), mass};
        }
        case ClassifierKind::distance: {
            double t[2] = {0.0, 0.0};
            for (const auto& in : instances) {
                double acc = 0.0;
                for (std::size_t k = 0; k < in.train.size(); ++k) {
                    const double v = in.test[k] + in.train[k];
                    acc += v * v;
                }
                t[in.label] += acc;
            }
            const double accept = 0.5 * (t[0] + t[1]) / mass;
            if (accept <= kPostselectEpsilon) throw ImpossibleOutcome("distance classifier: ancilla never 0");
            return {make_output(kind, t[0] / (t[0] + t[1]), accept), mass};
        }
        case ClassifierKind::swap: {
            double e = 0.0;
            for (const auto& in : instances) {
                const double ov = detail::dot(in.test, in.train);
                e += label_sign(in.label) * ov * ov;
            }
            return {make_output(kind, e / mass), mass};
        }
    }
    return {};
}

// Convenience form: one shared test vector, labels in {-1, +1}.
inline ClassifierOutput analytic_oracle(ClassifierKind kind, std::span<const Vector> train, std::span<const int> labels,
                                        std::span<const double> x) {
    if (train.size() != labels.size()) throw UsageError("training vectors and labels differ in count");
    std::vector<Instance> instances;
    instances.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i].size() != x.size()) throw UsageError("dimension mismatch");
        instances.push_back({train[i], Vector(x.begin(), x.end()), label_bit(labels[i])});
    }
    return analytic_oracle(kind, instances).output;
}

}  // namespace qens
