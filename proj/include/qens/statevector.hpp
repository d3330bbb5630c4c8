// Exact statevector simulation for the small gate set the classifiers and the
// data-selection circuit need: Hadamard, NOT and SWAP, each with an arbitrary
// list of control-on-one qubits.
//
// Qubit k is bit k of the basis-state label (qubit 0 is the least significant).

#pragma once

#include <qens/errors.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qens {

using complex = std::complex<double>;
using Index = std::uint64_t;

inline constexpr double kPostselectEpsilon = 1e-12;
inline constexpr int kMaxQubits = 30;

class Statevector {
public:
    // |0...0>
    explicit Statevector(int num_qubits) : num_qubits_(checked_width(num_qubits)), amps_(Index{1} << num_qubits_) {
        amps_[0] = 1.0;
    }

    // Direct amplitude injection. The vector must already be normalized to
    // within 1e-9; it is renormalized exactly afterwards.
    static Statevector from_amplitudes(int num_qubits, std::vector<complex> amps) {
        Statevector s(num_qubits);
        if (amps.size() != s.amps_.size()) {
            throw UsageError("amplitude vector has " + std::to_string(amps.size()) + " entries, expected " +
                             std::to_string(s.amps_.size()));
        }
        s.amps_ = std::move(amps);
        const double norm = s.norm();
        if (std::abs(norm - 1.0) > 1e-9) {
            throw UsageError("injected amplitudes are not normalized (norm " + std::to_string(norm) + ")");
        }
        s.scale(1.0 / norm);
        return s;
    }

    int num_qubits() const noexcept { return num_qubits_; }
    Index dimension() const noexcept { return amps_.size(); }

    std::span<const complex> amplitudes() const noexcept { return amps_; }
    std::span<complex> amplitudes() noexcept { return amps_; }

    const complex& operator[](Index i) const { return amps_[i]; }
    complex& operator[](Index i) { return amps_[i]; }

    double norm() const {
        double acc = 0.0;
        for (const auto& a : amps_) acc += std::norm(a);
        return std::sqrt(acc);
    }

    void scale(double factor) {
        for (auto& a : amps_) a *= factor;
    }

private:
    static int checked_width(int n) {
        if (n < 0 || n > kMaxQubits) throw UsageError("qubit count " + std::to_string(n) + " out of range");
        return n;
    }

    int num_qubits_;
    std::vector<complex> amps_;
};

enum class GateKind { H, X, Swap };

struct GateOp {
    GateKind kind;
    std::vector<int> targets;
    std::vector<int> controls;

    static GateOp h(int target, std::vector<int> controls = {}) { return {GateKind::H, {target}, std::move(controls)}; }
    static GateOp x(int target, std::vector<int> controls = {}) { return {GateKind::X, {target}, std::move(controls)}; }
    static GateOp swap(int a, int b, std::vector<int> controls = {}) {
        return {GateKind::Swap, {a, b}, std::move(controls)};
    }

    friend bool operator==(const GateOp&, const GateOp&) = default;
};

inline std::string to_string(const GateOp& op) {
    std::string name;
    switch (op.kind) {
        case GateKind::H: name = "H"; break;
        case GateKind::X: name = "X"; break;
        case GateKind::Swap: name = "SWAP"; break;
    }
    name = std::string(op.controls.size(), 'C') + name;
    if (op.kind == GateKind::X && op.controls.size() == 1) name = "CNOT";
    std::string out = name + "(";
    for (std::size_t k = 0; k < op.controls.size(); ++k) out += (k ? "," : "") + std::to_string(op.controls[k]);
    out += op.controls.empty() ? "" : ";";
    for (std::size_t k = 0; k < op.targets.size(); ++k) out += (k ? "," : "") + std::to_string(op.targets[k]);
    return out + ")";
}

inline void validate(const GateOp& op, int num_qubits) {
    const std::size_t want = op.kind == GateKind::Swap ? 2 : 1;
    if (op.targets.size() != want) throw UsageError(to_string(op) + ": wrong number of targets");
    std::vector<int> all = op.targets;
    all.insert(all.end(), op.controls.begin(), op.controls.end());
    for (int q : all) {
        if (q < 0 || q >= num_qubits) {
            throw UsageError(to_string(op) + ": qubit " + std::to_string(q) + " out of range for " +
                             std::to_string(num_qubits) + " qubits");
        }
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw UsageError(to_string(op) + ": targets and controls must be distinct");
    }
}

struct Circuit {
    int num_qubits = 0;
    std::vector<GateOp> ops;

    Circuit& add(GateOp op) {
        validate(op, num_qubits);
        ops.push_back(std::move(op));
        return *this;
    }
};

namespace detail {

// Spread the bits of `k` so that a zero appears at position `bit`.
inline constexpr Index insert_zero(Index k, int bit) noexcept {
    const Index low = k & ((Index{1} << bit) - 1);
    return ((k >> bit) << (bit + 1)) | low;
}

inline Index mask_of(std::span<const int> qubits) noexcept {
    Index m = 0;
    for (int q : qubits) m |= Index{1} << q;
    return m;
}

}  // namespace detail

// In-place controlled gate application. Each pass walks the half (or quarter)
// of the basis that has the target bit(s) cleared and skips entries whose
// control bits are not all set.
inline void apply_gate_inplace(Statevector& state, const GateOp& op) {
    validate(op, state.num_qubits());
    auto amps = state.amplitudes();
    const Index cmask = detail::mask_of(op.controls);
    const int n = state.num_qubits();

    if (op.kind == GateKind::Swap) {
        const int lo = std::min(op.targets[0], op.targets[1]);
        const int hi = std::max(op.targets[0], op.targets[1]);
        const Index lo_bit = Index{1} << lo, hi_bit = Index{1} << hi;
        const Index count = Index{1} << (n - 2);
        for (Index k = 0; k < count; ++k) {
            const Index base = detail::insert_zero(detail::insert_zero(k, lo), hi);
            const Index i = base | lo_bit;
            if ((i & cmask) != cmask) continue;
            std::swap(amps[i], amps[base | hi_bit]);
        }
        return;
    }

    const int t = op.targets[0];
    const Index bit = Index{1} << t;
    const Index count = Index{1} << (n - 1);
    if (op.kind == GateKind::X) {
        for (Index k = 0; k < count; ++k) {
            const Index i0 = detail::insert_zero(k, t);
            if ((i0 & cmask) != cmask) continue;
            std::swap(amps[i0], amps[i0 | bit]);
        }
    } else {
        const double r = 1.0 / std::sqrt(2.0);
        for (Index k = 0; k < count; ++k) {
            const Index i0 = detail::insert_zero(k, t);
            if ((i0 & cmask) != cmask) continue;
            const complex a = amps[i0], b = amps[i0 | bit];
            amps[i0] = r * (a + b);
            amps[i0 | bit] = r * (a - b);
        }
    }
}

inline Statevector apply_gate(Statevector state, const GateOp& op) {
    apply_gate_inplace(state, op);
    return state;
}

inline void run_inplace(Statevector& state, const Circuit& circuit) {
    if (circuit.num_qubits != state.num_qubits()) throw UsageError("circuit width does not match state");
    for (const auto& op : circuit.ops) apply_gate_inplace(state, op);
}

inline double probability(const Statevector& state, int qubit, int outcome) {
    if (qubit < 0 || qubit >= state.num_qubits()) throw UsageError("qubit index out of range");
    const Index bit = Index{1} << qubit;
    const Index want = outcome ? bit : 0;
    double p = 0.0;
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i)
        if ((i & bit) == want) p += std::norm(amps[i]);
    return p;
}

// Joint marginal over `qubits`; entry `key` has bit k equal to the outcome of qubits[k].
inline std::vector<double> marginal_distribution(const Statevector& state, std::span<const int> qubits) {
    if (qubits.empty()) throw UsageError("marginal over an empty qubit list");
    if (qubits.size() > 24) throw UsageError("too many qubits in marginal");
    for (int q : qubits)
        if (q < 0 || q >= state.num_qubits()) throw UsageError("qubit index out of range");
    std::vector<double> dist(std::size_t{1} << qubits.size(), 0.0);
    const auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        if (p == 0.0) continue;
        std::size_t key = 0;
        for (std::size_t k = 0; k < qubits.size(); ++k) key |= ((i >> qubits[k]) & 1u) << k;
        dist[key] += p;
    }
    return dist;
}

// Projects onto `qubit == outcome` and renormalizes; returns the pre-collapse probability.
inline double postselect_inplace(Statevector& state, int qubit, int outcome) {
    const double p = probability(state, qubit, outcome);
    if (p <= kPostselectEpsilon) {
        throw ImpossibleOutcome("post-selection of qubit " + std::to_string(qubit) + " = " + std::to_string(outcome) +
                                " has probability " + std::to_string(p));
    }
    const Index bit = Index{1} << qubit;
    const Index want = outcome ? bit : 0;
    const double f = 1.0 / std::sqrt(p);
    auto amps = state.amplitudes();
    for (Index i = 0; i < amps.size(); ++i) amps[i] = (i & bit) == want ? amps[i] * f : complex{};
    return p;
}

struct Postselected {
    double probability;
    Statevector collapsed;
};

inline Postselected postselect(Statevector state, int qubit, int outcome) {
    const double p = postselect_inplace(state, qubit, outcome);
    return {p, std::move(state)};
}

using Counts = std::map<Index, std::size_t>;

// Draws `shots` joint outcomes of `qubits`. Keys follow marginal_distribution.
template <class Rng>
Counts sample_distribution(std::span<const double> dist, std::size_t shots, Rng& rng) {
    if (shots < 1) throw UsageError("shots must be at least 1");
    std::discrete_distribution<std::size_t> pick(dist.begin(), dist.end());
    Counts counts;
    for (std::size_t s = 0; s < shots; ++s) ++counts[pick(rng)];
    return counts;
}

template <class Rng>
Counts sample(const Statevector& state, std::span<const int> qubits, std::size_t shots, Rng& rng) {
    const auto dist = marginal_distribution(state, qubits);
    return sample_distribution(std::span<const double>(dist), shots, rng);
}

template <class Rng>
Counts sample(const Statevector& state, std::initializer_list<int> qubits, std::size_t shots, Rng& rng) {
    return sample(state, std::span<const int>(qubits.begin(), qubits.size()), shots, rng);
}

// Bitstring with qubits[0] as the rightmost character.
inline std::string format_outcome(Index key, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t k = 0; k < width; ++k)
        if ((key >> k) & 1u) s[width - 1 - k] = '1';
    return s;
}

}  // namespace qens
