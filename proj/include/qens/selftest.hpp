// Randomized invariant suites shared by the `selftest` command and the
// acceptance binary. Each suite draws its instances from a seeded generator
// and compares the production path against an independent oracle.

#pragma once

#include <qens/classifiers.hpp>
#include <qens/dense_oracle.hpp>
#include <qens/encoding.hpp>
#include <qens/ensemble.hpp>
#include <qens/selection.hpp>
#include <qens/statevector.hpp>
#include <qens/trainer.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qens::selftest {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Vector random_unit_vector(Rng& rng, std::size_t dim) {
    std::normal_distribution<double> g;
    for (;;) {
        Vector v(dim);
        for (auto& x : v) x = g(rng);
        if (l2_norm(v) > 1e-6) return unit_normalize(v);
    }
}

// N unit-norm rows of width M with random labels.
inline Dataset random_dataset(Rng& rng, std::size_t N, std::size_t M) {
    Dataset data;
    for (std::size_t i = 0; i < N; ++i) {
        data.features.push_back(random_unit_vector(rng, M));
        data.labels.push_back(uniform_int(rng, 0, 1) ? 1 : -1);
    }
    return data;
}

inline std::vector<double> random_simplex(Rng& rng, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& v : w) total += v = e(rng);
    for (auto& v : w) v /= total;
    return w;
}

inline Statevector random_state(Rng& rng, int n) {
    std::normal_distribution<double> g;
    std::vector<complex> amps(Index{1} << n);
    double norm = 0.0;
    for (auto& a : amps) {
        a = {g(rng), g(rng)};
        norm += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    return Statevector::from_amplitudes(n, std::move(amps));
}

inline GateOp random_gate(Rng& rng, int n) {
    std::vector<int> qubits(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) qubits[static_cast<std::size_t>(q)] = q;
    std::shuffle(qubits.begin(), qubits.end(), rng);
    const auto kind = static_cast<GateKind>(uniform_int(rng, 0, n >= 2 ? 2 : 1));
    const int targets = kind == GateKind::Swap ? 2 : 1;
    const int controls = uniform_int(rng, 0, std::min(2, n - targets));
    std::vector<int> ctrl(qubits.begin() + targets, qubits.begin() + targets + controls);
    if (kind == GateKind::Swap) return GateOp::swap(qubits[0], qubits[1], ctrl);
    return kind == GateKind::H ? GateOp::h(qubits[0], ctrl) : GateOp::x(qubits[0], ctrl);
}

inline std::string fmt_g(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

// Strided gate kernels against dense Kronecker-built unitaries.
inline CheckResult simulator_oracle(int circuits, int max_qubits, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < circuits; ++t) {
        const int n = uniform_int(rng, 2, max_qubits);
        const int depth = uniform_int(rng, 1, 12);
        Statevector fast = random_state(rng, n), dense = fast;
        for (int g = 0; g < depth; ++g) {
            const GateOp op = random_gate(rng, n);
            apply_gate_inplace(fast, op);
            dense = dense_oracle_apply(dense, op);
        }
        for (Index k = 0; k < fast.dimension(); ++k) worst = std::max(worst, std::abs(fast[k] - dense[k]));
    }
    return {"simulator vs dense unitaries", worst < 1e-10,
            std::to_string(circuits) + " circuits, max deviation " + fmt_g(worst)};
}

// Classifier circuits against the closed-form probabilities.
inline CheckResult circuit_formula(int datasets, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < datasets; ++t) {
        const auto N = static_cast<std::size_t>(uniform_int(rng, 1, 8));
        const auto M = static_cast<std::size_t>(uniform_int(rng, 2, 4));
        const Dataset data = random_dataset(rng, N, M);
        const Vector x = random_unit_vector(rng, M);
        const auto enc = encode_training_set(data);
        for (auto kind : {ClassifierKind::cosine, ClassifierKind::distance, ClassifierKind::swap}) {
            ClassifierOutput circuit, closed;
            bool circuit_failed = false, closed_failed = false;
            try {
                circuit = run_classifier(kind, enc, x);
            } catch (const ImpossibleOutcome&) {
                circuit_failed = true;
            }
            try {
                closed = analytic_oracle(kind, data.features, data.labels, x);
            } catch (const ImpossibleOutcome&) {
                closed_failed = true;
            }
            if (circuit_failed != closed_failed) return {"circuit vs closed form", false, "post-selection disagreement"};
            if (circuit_failed) continue;
            worst = std::max({worst, std::abs(circuit.raw - closed.raw), std::abs(circuit.accept - closed.accept)});
        }
    }
    return {"circuit vs closed form", worst < 1e-9,
            std::to_string(datasets) + " datasets x 3 kinds, max deviation " + fmt_g(worst)};
}

// The pre-Toffoli program permutes (index, feature) pairs for every control
// value, the Toffoli keeps exactly 3/4 of them, the gate-level circuit agrees
// with the classical trace, and uniform data passes selection with p = 0.75.
inline CheckResult selection_geometry(std::uint64_t seed) {
    Rng rng(seed);
    double worst_p = 0.0;
    for (auto kind : {ClassifierKind::distance, ClassifierKind::swap}) {
        for (int d = 1; d <= 3; ++d) {
            for (int n = 2; n <= 3; ++n) {
                for (int m = 2; m <= 3; ++m) {
                    const auto program = build_selection_program(n, m, d, kind);
                    const Index rows = Index{1} << n, cols = Index{1} << m;
                    for (Index c = 0; c < (Index{1} << d); ++c) {
                        std::set<std::pair<Index, Index>> images;
                        std::size_t kept = 0;
                        for (Index i = 0; i < rows; ++i) {
                            for (Index j = 0; j < cols; ++j) {
                                const auto img = classical_selection_oracle(program, c, i, j);
                                images.insert({img.index, img.feature});
                                kept += img.kept;
                            }
                        }
                        const std::string where = to_string(kind) + " d=" + std::to_string(d) + " n=" +
                                                  std::to_string(n) + " m=" + std::to_string(m) +
                                                  " c=" + std::to_string(c);
                        if (images.size() != rows * cols) return {"selection geometry", false, where + ": not a permutation"};
                        if (4 * kept != 3 * rows * cols) return {"selection geometry", false, where + ": kept " + std::to_string(kept)};
                    }

                    // Gate-level program on random basis states matches the trace.
                    const auto layout = make_ensemble_layout(kind, n, m, d);
                    const auto gates = to_gates(program, layout);
                    for (int probe = 0; probe < 8; ++probe) {
                        const Index c = static_cast<Index>(uniform_int(rng, 0, (1 << d) - 1));
                        const Index i = static_cast<Index>(uniform_int(rng, 0, static_cast<int>(rows) - 1));
                        const Index j = static_cast<Index>(uniform_int(rng, 0, static_cast<int>(cols) - 1));
                        const Index t = kind == ClassifierKind::swap
                                            ? static_cast<Index>(uniform_int(rng, 0, static_cast<int>(cols) - 1))
                                            : 0;
                        Index basis = layout.control.place(c) | layout.classifier.index.place(i) |
                                      layout.classifier.feature.place(j);
                        if (kind == ClassifierKind::swap) basis |= layout.classifier.test.place(t);
                        std::vector<complex> amps(Index{1} << layout.num_qubits);
                        amps[basis] = 1.0;
                        auto state = Statevector::from_amplitudes(layout.num_qubits, std::move(amps));
                        for (const auto& op : gates) apply_gate_inplace(state, op);
                        const auto expect = trace_selection(program, c, {i, j, t, false});
                        Index want = layout.control.place(c) | layout.classifier.index.place(expect.index) |
                                     layout.classifier.feature.place(expect.feature) |
                                     (expect.marked ? Index{1} << layout.selection_ancilla : 0);
                        if (kind == ClassifierKind::swap) want |= layout.classifier.test.place(expect.test);
                        if (std::abs(state[want] - complex(1.0)) > 1e-12)
                            return {"selection geometry", false, "circuit and trace disagree"};
                    }

                    // Uniform amplitudes over every (index, feature) pair.
                    if (kind != ClassifierKind::distance) continue;
                    Dataset uniform;
                    for (Index i = 0; i < rows; ++i) {
                        uniform.features.emplace_back(cols, 1.0);
                        uniform.labels.push_back(i % 2 ? -1 : 1);
                    }
                    const auto enc = encode_training_set(uniform);
                    const Vector x(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
                    EnsembleConfig cfg;
                    cfg.d = d;
                    cfg.kind = kind;
                    worst_p = std::max(worst_p, std::abs(selection_success_probability(cfg, enc, x) - 0.75));
                }
            }
        }
    }
    return {"selection geometry", worst_p < 1e-9, "permutation and 3/4 kept in every branch, |p0 - 0.75| <= " + fmt_g(worst_p)};
}

// Exact test-mode circuit against the circuit-free per-branch decomposition.
inline CheckResult ensemble_decomposition(int instances, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    int evaluated = 0;
    for (int t = 0; t < instances; ++t) {
        const auto N = static_cast<std::size_t>(uniform_int(rng, 2, 8));
        const auto M = static_cast<std::size_t>(uniform_int(rng, 2, 4));
        const Dataset data = random_dataset(rng, N, M);
        const Vector x = random_unit_vector(rng, M);
        EnsembleConfig cfg;
        cfg.d = uniform_int(rng, 1, 3);
        cfg.kind = static_cast<ClassifierKind>(uniform_int(rng, 0, 2));
        const auto enc = encode_for_ensemble(data);
        const auto w = random_simplex(rng, std::size_t{1} << cfg.d);
        const auto branches = evaluate_branches(cfg, enc, x);
        double expect = 0.0;
        bool oracle_failed = false, circuit_failed = false;
        try {
            expect = combine_branches(w, branches);
        } catch (const DegenerateCombination&) {
            oracle_failed = true;
        }
        EnsembleEstimate est;
        try {
            est = run_test_mode(cfg, w, enc, x);
        } catch (const ImpossibleOutcome&) {
            circuit_failed = true;
        }
        if (oracle_failed != circuit_failed) return {"ensemble decomposition", false, "degenerate-case disagreement"};
        if (oracle_failed) continue;
        ++evaluated;
        worst = std::max(worst, std::abs(est.expectation - expect));
    }
    return {"ensemble decomposition", worst < 1e-9 && evaluated > 0,
            std::to_string(evaluated) + " instances, max deviation " + fmt_g(worst)};
}

// Sampled train-mode estimates against exact values: share of (sample, branch)
// cells where both p and p0 fall within `sigmas` binomial standard deviations.
struct SampledAgreement {
    std::size_t cells = 0;
    std::size_t within = 0;
    double fraction() const { return cells ? static_cast<double>(within) / static_cast<double>(cells) : 0.0; }
};

inline SampledAgreement sampled_agreement(const EnsembleConfig& base, const EncodedTrainingSet& enc,
                                          std::span<const Vector> validation, double sigmas = 3.0) {
    EnsembleConfig exact = base, sampled = base;
    exact.mode = ExecutionMode::exact;
    sampled.mode = ExecutionMode::sampled;
    const auto ex = run_train_mode(exact, enc, validation);
    const auto sa = run_train_mode(sampled, enc, validation);
    auto within = [&](double est, double truth, double trials) {
        if (trials <= 0.0) return false;
        const double sd = std::sqrt(truth * (1.0 - truth) / trials);
        return std::abs(est - truth) <= sigmas * sd + 1e-12;
    };
    SampledAgreement out;
    for (std::size_t i = 0; i < ex.samples(); ++i) {
        double successes = 0.0;
        for (std::size_t c = 0; c < ex.branches(); ++c) successes += static_cast<double>(sa.k0[i][c] + sa.k1[i][c]);
        for (std::size_t c = 0; c < ex.branches(); ++c) {
            ++out.cells;
            const double in_branch = static_cast<double>(sa.k0[i][c] + sa.k1[i][c]);
            const bool p_ok = within(sa.p[i][c], ex.p[i][c], successes);
            // p0 is a ratio within the branch; an unvisited branch carries no estimate.
            const bool p0_ok = in_branch == 0.0 ? p_ok : within(sa.p0[i][c], ex.p0[i][c], in_branch);
            out.within += p_ok && p0_ok;
        }
    }
    return out;
}

// Log-loss gradient against central differences, monotone fitting, and
// invariance of the ensemble output under positive rescaling of w.
inline TrainOutputs random_train_outputs(Rng& rng, std::size_t samples, std::size_t branches) {
    TrainOutputs out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < samples; ++i) {
        out.p.push_back(random_simplex(rng, branches));
        std::vector<double> p0(branches);
        for (auto& v : p0) v = u(rng);
        out.p0.push_back(std::move(p0));
    }
    return out;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n) {
    std::vector<int> y(n);
    for (auto& v : y) v = uniform_int(rng, 0, 1) ? 1 : -1;
    y[0] = 1;
    y[1] = -1;
    return y;
}

inline CheckResult trainer_monotone(int instances, std::uint64_t seed) {
    Rng rng(seed);
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < instances; ++t) {
        const auto samples = static_cast<std::size_t>(uniform_int(rng, 4, 40));
        const std::size_t branches = std::size_t{1} << uniform_int(rng, 0, 3);
        const auto outputs = random_train_outputs(rng, samples, branches);
        const auto labels = random_labels(rng, samples);
        FitReport report;
        const auto model = fit_stacking(outputs, labels, {}, &report);
        const double refit = log_loss(model, outputs, logistic_targets(labels));
        worst_rise = std::max({worst_rise, report.final_loss - report.initial_loss, refit - report.initial_loss});
    }
    return {"fit never increases the loss", worst_rise <= 0.0,
            std::to_string(instances) + " fits, max(final - initial) = " + fmt_g(worst_rise)};
}

inline CheckResult trainer_gradient(int instances, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0), s(-2.0, 2.0);
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
        const auto samples = static_cast<std::size_t>(uniform_int(rng, 4, 30));
        const std::size_t branches = std::size_t{1} << uniform_int(rng, 0, 3);
        const auto outputs = random_train_outputs(rng, samples, branches);
        const auto targets = logistic_targets(random_labels(rng, samples));
        StackingModel model{std::vector<double>(branches), s(rng), 3.0 * s(rng)};
        for (auto& v : model.w) v = u(rng);

        std::vector<double> grad;
        log_loss(model, outputs, targets, &grad);
        std::vector<double> fd(grad.size());
        const double h = 1e-6;
        for (std::size_t k = 0; k < grad.size(); ++k) {
            auto bump = [&](double delta) {
                StackingModel m = model;
                if (k < branches) m.w[k] += delta;
                else if (k == branches) m.b += delta;
                else m.k += delta;
                return log_loss(m, outputs, targets);
            };
            fd[k] = (bump(h) - bump(-h)) / (2.0 * h);
        }
        double diff = 0.0, ref = 0.0;
        for (std::size_t k = 0; k < grad.size(); ++k) {
            diff += (grad[k] - fd[k]) * (grad[k] - fd[k]);
            ref += fd[k] * fd[k];
        }
        worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(ref), 1e-8));
    }
    return {"log-loss gradient vs central differences", worst < 1e-5,
            std::to_string(instances) + " models, max relative error " + fmt_g(worst)};
}

// Rescaling by powers of two is exact in floating point, so the ensemble
// output must be bit-identical; arbitrary positive factors must keep labels.
inline CheckResult trainer_rescaling(int instances, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.01, 1.0), lam(1e-3, 1e3), s(-1.0, 1.0);
    for (int t = 0; t < instances; ++t) {
        const std::size_t branches = std::size_t{1} << uniform_int(rng, 1, 3);
        const auto outputs = random_train_outputs(rng, 1, branches);
        std::vector<double> w(branches);
        for (auto& v : w) v = u(rng);
        const StackingModel model{w, s(rng), 10.0 * s(rng)};
        const double e = ensemble_output(w, outputs.p[0], outputs.p0[0]);
        for (int p2 : {-20, -3, 1, 7, 30}) {
            std::vector<double> scaled = w;
            for (auto& v : scaled) v = std::ldexp(v, p2);
            if (ensemble_output(scaled, outputs.p[0], outputs.p0[0]) != e)
                return {"rescaling invariance", false, "power-of-two rescaling changed the output"};
        }
        const double l = lam(rng);
        std::vector<double> scaled = w;
        for (auto& v : scaled) v *= l;
        const double es = ensemble_output(scaled, outputs.p[0], outputs.p0[0]);
        if (predict(model, es) != predict(model, e) && std::abs(model.k * e + model.b) > 1e-12)
            return {"rescaling invariance", false, "label changed under rescaling"};
    }
    return {"rescaling invariance", true, std::to_string(instances) + " weight vectors"};
}

// Quick versions of every suite, for the CLI.
inline std::vector<CheckResult> run_all(std::uint64_t seed) {
    std::vector<CheckResult> out;
    out.push_back(simulator_oracle(100, 6, derive_seed(seed, 1)));
    out.push_back(circuit_formula(30, derive_seed(seed, 2)));
    out.push_back(selection_geometry(derive_seed(seed, 3)));
    out.push_back(ensemble_decomposition(15, derive_seed(seed, 4)));
    {
        Rng rng(derive_seed(seed, 5));
        const Dataset data = random_dataset(rng, 6, 3);
        std::vector<Vector> validation;
        for (int k = 0; k < 6; ++k) validation.push_back(random_unit_vector(rng, 3));
        EnsembleConfig cfg;
        cfg.d = 2;
        cfg.seed = derive_seed(seed, 6);
        const auto agree = sampled_agreement(cfg, encode_for_ensemble(data), validation);
        out.push_back({"sampled vs exact train mode", agree.fraction() >= 0.95,
                       std::to_string(agree.within) + "/" + std::to_string(agree.cells) + " cells within 3 sd"});
    }
    out.push_back(trainer_monotone(20, derive_seed(seed, 7)));
    out.push_back(trainer_gradient(20, derive_seed(seed, 8)));
    out.push_back(trainer_rescaling(50, derive_seed(seed, 9)));
    return out;
}

}  // namespace qens::selftest
