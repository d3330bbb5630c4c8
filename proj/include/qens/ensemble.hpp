// Weighted ensemble of homogeneous classifiers executed in superposition.
//
// Control register c (d qubits) carries sqrt(w_c) at test time or a uniform
// superposition at train time. The selection program permutes the data
// registers differently for every c, the Toffoli marks a quarter of the
// (index, feature) pairs, and post-selecting the ancilla leaves each control
// value entangled with its own 3/4-size data subset. The classifier circuit
// then runs once on the whole superposition.

#pragma once

#include <qens/classifiers.hpp>
#include <qens/encoding.hpp>
#include <qens/errors.hpp>
#include <qens/selection.hpp>
#include <qens/statevector.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qens {

enum class ExecutionMode { exact, sampled };

inline std::string to_string(ExecutionMode m) { return m == ExecutionMode::exact ? "exact" : "sampled"; }

inline ExecutionMode parse_mode(const std::string& s) {
    if (s == "exact") return ExecutionMode::exact;
    if (s == "sampled") return ExecutionMode::sampled;
    throw ConfigError("unknown mode '" + s + "' (expected exact or sampled)");
}

inline constexpr std::size_t kDefaultShots = 8192;

struct EnsembleConfig {
    int d = 0;
    ClassifierKind kind = ClassifierKind::distance;
    ExecutionMode mode = ExecutionMode::exact;
    std::size_t shots = kDefaultShots;
    int accept_outcome = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (d < 0 || d > 10) throw UsageError("control register size out of range");
        if (mode == ExecutionMode::sampled && shots < 1) throw UsageError("sampled mode needs at least one shot");
        if (accept_outcome != 0 && accept_outcome != 1) throw UsageError("accept outcome must be 0 or 1");
    }
};

// splitmix64 finalizer over the pair; stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Training set encoding with at least one index and one feature qubit, as the
// selection program requires.
inline EncodedTrainingSet encode_for_ensemble(const Dataset& train) { return encode_training_set(train, 1, 1); }

namespace detail {

inline void require_selectable(const EncodedTrainingSet& enc) {
    if (enc.n < 1 || enc.m < 1) throw UsageError("ensemble needs an encoding with n >= 1 and m >= 1");
}

// Control amplitudes tensored with the classifier's initial state; the
// selection ancilla starts in |0>.
inline Statevector prepare_state(const EnsembleLayout& layout, std::span<const double> control_amps,
                                 ClassifierKind kind, const EncodedTrainingSet& enc, std::span<const double> x) {
    const auto cl = initial_amplitudes(kind, enc, x, layout.classifier);
    std::vector<complex> amps(Index{1} << layout.num_qubits);
    for (Index c = 0; c < control_amps.size(); ++c) {
        if (control_amps[c] == 0.0) continue;
        const Index base = layout.control.place(c);
        for (Index k = 0; k < cl.size(); ++k) amps[base | k] = control_amps[c] * cl[k];
    }
    return Statevector::from_amplitudes(layout.num_qubits, std::move(amps));
}

inline Circuit ensemble_circuit(const EnsembleLayout& layout, const SelectionProgram& program, bool hadamard_control) {
    Circuit circuit{layout.num_qubits, {}};
    if (hadamard_control)
        for (int k = 0; k < layout.control.width; ++k) circuit.add(GateOp::h(layout.control.qubit(k)));
    for (auto& op : to_gates(program, layout)) circuit.add(std::move(op));
    return append_classifier_circuit(std::move(circuit), layout.classifier);
}

// Per-shot reading of the classifier output qubits (key from output_qubits()).
struct ShotReading {
    bool accepted;
    int bit;
};

inline ShotReading read_shot(ClassifierKind kind, Index key) {
    switch (kind) {
        case ClassifierKind::cosine: return {true, static_cast<int>(key & 1u)};
        case ClassifierKind::distance: return {(key & 1u) == 0, static_cast<int>((key >> 1) & 1u)};
        case ClassifierKind::swap: return {true, static_cast<int>((key ^ (key >> 1)) & 1u)};
    }
    return {false, 0};
}

}  // namespace detail

inline void validate_weights(std::span<const double> w, int d) {
    if (w.size() != (std::size_t{1} << d)) throw NonNormalizedWeights("weight vector must have 2^d entries");
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw NonNormalizedWeights("weights must be non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw NonNormalizedWeights("weights must sum to one");
}

struct EnsembleEstimate {
    double expectation = 0.0;            // probability of output bit 0 given acceptance
    double selection_probability = 0.0;  // exact P(ancilla = accept_outcome)
    std::size_t kept_shots = 0;          // sampled mode
    std::size_t total_shots = 0;
};

// Test-time circuit with the learned weights in the control amplitudes.
inline EnsembleEstimate run_test_mode(const EnsembleConfig& cfg, std::span<const double> w,
                                      const EncodedTrainingSet& enc, std::span<const double> x) {
    cfg.validate();
    detail::require_selectable(enc);
    validate_weights(w, cfg.d);
    const auto layout = make_ensemble_layout(cfg.kind, enc.n, enc.m, cfg.d);
    const auto program = build_selection_program(enc.n, enc.m, cfg.d, cfg.kind);

    std::vector<double> ctrl(w.size());
    for (std::size_t c = 0; c < w.size(); ++c) ctrl[c] = std::sqrt(w[c]);
    Statevector state = detail::prepare_state(layout, ctrl, cfg.kind, enc, x);
    const auto circuit = detail::ensemble_circuit(layout, program, false);
    const auto outputs = output_qubits(layout.classifier);

    EnsembleEstimate est;
    if (cfg.mode == ExecutionMode::exact) {
        const std::size_t n_selection = program.gates.size();
        for (std::size_t g = 0; g < n_selection; ++g) apply_gate_inplace(state, circuit.ops[g]);
        est.selection_probability = postselect_inplace(state, layout.selection_ancilla, cfg.accept_outcome);
        for (std::size_t g = n_selection; g < circuit.ops.size(); ++g) apply_gate_inplace(state, circuit.ops[g]);
        est.expectation = decode_output(cfg.kind, marginal_distribution(state, outputs)).output_zero;
        return est;
    }

    // The classifier gates never touch the selection ancilla, so measuring it
    // at the end draws from the same joint distribution as measuring it mid-circuit.
    run_inplace(state, circuit);
    est.selection_probability = probability(state, layout.selection_ancilla, cfg.accept_outcome);
    std::vector<int> measured{layout.selection_ancilla};
    measured.insert(measured.end(), outputs.begin(), outputs.end());
    std::mt19937_64 rng(cfg.seed);
    const auto counts = sample(state, std::span<const int>(measured), cfg.shots, rng);
    std::size_t zeros = 0;
    for (auto [key, n] : counts) {
        if (static_cast<int>(key & 1u) != cfg.accept_outcome) continue;
        const auto r = detail::read_shot(cfg.kind, key >> 1);
        if (!r.accepted) continue;
        est.kept_shots += n;
        if (r.bit == 0) zeros += n;
    }
    est.total_shots = cfg.shots;
    if (est.kept_shots == 0) throw ImpossibleOutcome("no shot survived data selection");
    est.expectation = static_cast<double>(zeros) / static_cast<double>(est.kept_shots);
    return est;
}

struct TrainOutputs {
    // Rows: validation samples; columns: control values c.
    std::vector<std::vector<double>> p;   // probability of branch c given successful selection
    std::vector<std::vector<double>> p0;  // probability of output bit 0 within branch c
    std::vector<std::vector<std::size_t>> k0, k1;  // sampled mode counts
    std::vector<std::size_t> failed;               // sampled mode: discarded shots per sample

    std::size_t samples() const noexcept { return p.size(); }
    std::size_t branches() const noexcept { return p.empty() ? 0 : p.front().size(); }
};

// Train-time circuit: H on the control register instead of the weights, then
// the control register is read together with the classifier output.
inline TrainOutputs run_train_mode(const EnsembleConfig& cfg, const EncodedTrainingSet& enc,
                                   std::span<const Vector> validation) {
    cfg.validate();
    detail::require_selectable(enc);
    const auto layout = make_ensemble_layout(cfg.kind, enc.n, enc.m, cfg.d);
    const auto program = build_selection_program(enc.n, enc.m, cfg.d, cfg.kind);
    const auto circuit = detail::ensemble_circuit(layout, program, true);
    const std::size_t branches = std::size_t{1} << cfg.d;
    const auto outputs = output_qubits(layout.classifier);

    // Key layout: bit 0 selection ancilla, then output qubits, then control bits.
    std::vector<int> measured{layout.selection_ancilla};
    measured.insert(measured.end(), outputs.begin(), outputs.end());
    const auto control_qubits = layout.control.qubits();
    measured.insert(measured.end(), control_qubits.begin(), control_qubits.end());
    const int out_shift = 1, ctrl_shift = 1 + static_cast<int>(outputs.size());
    const Index out_mask = (Index{1} << outputs.size()) - 1;

    TrainOutputs result;
    for (std::size_t s = 0; s < validation.size(); ++s) {
        std::vector<double> ctrl(branches, 0.0);
        ctrl[0] = 1.0;
        Statevector state = detail::prepare_state(layout, ctrl, cfg.kind, enc, validation[s]);
        run_inplace(state, circuit);
        const auto dist = marginal_distribution(state, measured);

        // mass[c][bit]: probability (or count) of an accepted shot in branch c with output bit.
        std::vector<std::array<double, 2>> mass(branches, {0.0, 0.0});
        std::vector<std::size_t> k0(branches, 0), k1(branches, 0);
        std::size_t failed = 0;

        auto accumulate = [&](Index key, double weight) -> bool {
            if (static_cast<int>(key & 1u) != cfg.accept_outcome) return false;
            const auto r = detail::read_shot(cfg.kind, (key >> out_shift) & out_mask);
            if (!r.accepted) return false;
            mass[key >> ctrl_shift][r.bit] += weight;
            return true;
        };

        if (cfg.mode == ExecutionMode::exact) {
            for (Index key = 0; key < dist.size(); ++key) accumulate(key, dist[key]);
        } else {
            std::mt19937_64 rng(derive_seed(cfg.seed, s));
            for (auto [key, n] : sample_distribution(std::span<const double>(dist), cfg.shots, rng)) {
                if (!accumulate(key, static_cast<double>(n))) failed += n;
            }
            for (std::size_t c = 0; c < branches; ++c) {
                k0[c] = static_cast<std::size_t>(mass[c][0]);
                k1[c] = static_cast<std::size_t>(mass[c][1]);
            }
        }

        double total = 0.0;
        for (const auto& m : mass) total += m[0] + m[1];
        std::vector<double> p(branches, 0.0), p0(branches, 0.5);
        for (std::size_t c = 0; c < branches; ++c) {
            const double mc = mass[c][0] + mass[c][1];
            if (mc <= (cfg.mode == ExecutionMode::exact ? kPostselectEpsilon : 0.0)) continue;
            p[c] = mc / total;
            p0[c] = mass[c][0] / mc;
        }
        result.p.push_back(std::move(p));
        result.p0.push_back(std::move(p0));
        result.k0.push_back(std::move(k0));
        result.k1.push_back(std::move(k1));
        result.failed.push_back(failed);
    }
    return result;
}

// Exact probability that the selection ancilla reads accept_outcome, with the
// control register in uniform superposition.
inline double selection_success_probability(const EnsembleConfig& cfg, const EncodedTrainingSet& enc,
                                            std::span<const double> x) {
    cfg.validate();
    detail::require_selectable(enc);
    const auto layout = make_ensemble_layout(cfg.kind, enc.n, enc.m, cfg.d);
    const auto program = build_selection_program(enc.n, enc.m, cfg.d, cfg.kind);
    const std::size_t branches = std::size_t{1} << cfg.d;
    const std::vector<double> ctrl(branches, 1.0 / std::sqrt(static_cast<double>(branches)));
    Statevector state = detail::prepare_state(layout, ctrl, cfg.kind, enc, x);
    for (const auto& op : to_gates(program, layout)) apply_gate_inplace(state, op);
    return probability(state, layout.selection_ancilla, cfg.accept_outcome);
}

// ---------------------------------------------------------------------------
// Circuit-free branch decomposition: the data each internal classifier sees,
// rebuilt from the classical selection oracle and evaluated in closed form.

// Instances seen by branch c after permutation and selection, indexed by the
// permuted training index.
inline std::vector<Instance> branch_instances(const SelectionProgram& program, ClassifierKind kind,
                                              const EncodedTrainingSet& enc, std::span<const double> x, Index c,
                                              int accept_outcome = 0) {
    const Vector xv = padded_test_vector(enc, x);
    const std::size_t cols = enc.cols();
    std::vector<Instance> rows(enc.rows(), Instance{Vector(cols, 0.0), Vector(cols, 0.0), 0});
    std::vector<bool> used(enc.rows(), false);

    Vector swap_test(cols, 0.0);
    if (kind == ClassifierKind::swap)
        for (std::size_t t = 0; t < cols; ++t) swap_test[map_test_feature(program, c, t)] = xv[t];

    for (std::size_t i = 0; i < enc.N; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const auto img = classical_selection_oracle(program, c, i, j, accept_outcome);
            auto& row = rows[img.index];
            used[img.index] = true;
            row.label = enc.labels[i];
            if (!img.kept) continue;
            row.train[img.feature] = enc.at(i, j);
            if (kind != ClassifierKind::swap) row.test[img.feature] = xv[j];
        }
    }
    std::vector<Instance> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!used[r]) continue;
        if (kind == ClassifierKind::swap) rows[r].test = swap_test;
        out.push_back(std::move(rows[r]));
    }
    return out;
}

// Output with a zero decision score, used for branches with no surviving data.
inline ClassifierOutput neutral_output(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::cosine: return make_output(kind, 0.25);
        case ClassifierKind::distance: return make_output(kind, 0.5, 0.0);
        case ClassifierKind::swap: return make_output(kind, 0.0);
    }
    return {};
}

struct BranchResult {
    ClassifierOutput output;
    double weight = 0.0;  // unnormalized probability mass of the accepted branch
};

inline BranchResult evaluate_branch(const SelectionProgram& program, ClassifierKind kind,
                                    const EncodedTrainingSet& enc, std::span<const double> x, Index c,
                                    int accept_outcome = 0) {
    const auto instances = branch_instances(program, kind, enc, x, c, accept_outcome);
    try {
        const auto r = analytic_oracle(kind, instances);
        return {r.output, r.mass * r.output.accept};
    } catch (const ImpossibleOutcome&) {
        return {neutral_output(kind), 0.0};
    }
}

inline std::vector<BranchResult> evaluate_branches(const EnsembleConfig& cfg, const EncodedTrainingSet& enc,
                                                   std::span<const double> x) {
    detail::require_selectable(enc);
    const auto program = build_selection_program(enc.n, enc.m, cfg.d, cfg.kind);
    std::vector<BranchResult> out;
    for (Index c = 0; c < (Index{1} << cfg.d); ++c)
        out.push_back(evaluate_branch(program, cfg.kind, enc, x, c, cfg.accept_outcome));
    return out;
}

// sum_c w_c m_c <O>_c / sum_c w_c m_c over branch results.
inline double combine_branches(std::span<const double> w, std::span<const BranchResult> branches) {
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < branches.size(); ++c) {
        num += w[c] * branches[c].weight * branches[c].output.output_zero;
        den += w[c] * branches[c].weight;
    }
    if (!(den > 0.0)) throw DegenerateCombination("all weighted branches are empty");
    return num / den;
}

}  // namespace qens
