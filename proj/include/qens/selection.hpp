// Data-selection program: control-dependent CSWAP/CNOT permutations of the
// index and feature registers followed by a Toffoli on index[0], feature[0]
// that marks the discarded quarter on the selection ancilla.

#pragma once

#include <qens/errors.hpp>
#include <qens/layout.hpp>
#include <qens/statevector.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace qens {

enum class DataRegister { index, feature, test };

struct RegisterQubit {
    DataRegister reg;
    int bit;

    friend bool operator==(const RegisterQubit&, const RegisterQubit&) = default;
};

enum class SelectionGateKind { cswap, cnot, ccx };

// cswap/cnot are controlled by control[control_bit]; ccx is controlled by
// both targets and flips the selection ancilla.
struct SelectionGate {
    SelectionGateKind kind;
    int control_bit = -1;
    std::vector<RegisterQubit> targets;

    friend bool operator==(const SelectionGate&, const SelectionGate&) = default;
};

struct SelectionProgram {
    int d = 0;
    int n = 0;
    int m = 0;
    bool mirror_test = false;  // swap kind: feature gates repeated on the test register
    std::vector<SelectionGate> gates;

    // Everything before the final Toffoli.
    std::span<const SelectionGate> permutation() const {
        return std::span<const SelectionGate>(gates).first(gates.size() - 1);
    }
};

inline SelectionProgram build_selection_program(int n, int m, int d, ClassifierKind kind) {
    if (n < 1 || m < 1) throw UsageError("data selection needs at least one index and one feature qubit");
    if (d < 0) throw UsageError("control register size must be non-negative");
    SelectionProgram p{d, n, m, kind == ClassifierKind::swap, {}};

    auto feature_gate = [&](SelectionGateKind k, int ctrl, std::vector<int> bits) {
        for (DataRegister reg : {DataRegister::feature, DataRegister::test}) {
            if (reg == DataRegister::test && !p.mirror_test) continue;
            std::vector<RegisterQubit> t;
            for (int b : bits) t.push_back({reg, b});
            p.gates.push_back({k, ctrl, std::move(t)});
        }
    };
    auto index_gate = [&](SelectionGateKind k, int ctrl, std::vector<int> bits) {
        std::vector<RegisterQubit> t;
        for (int b : bits) t.push_back({DataRegister::index, b});
        p.gates.push_back({k, ctrl, std::move(t)});
    };

    for (int idx = 0; idx < d; ++idx) {
        if (idx < n / 2) index_gate(SelectionGateKind::cswap, idx, {idx, idx + n / 2});
        if (idx < m / 2) feature_gate(SelectionGateKind::cswap, idx, {idx, idx + m / 2});
        if (idx < n) index_gate(SelectionGateKind::cnot, idx, {idx});
        if (idx < m) feature_gate(SelectionGateKind::cnot, idx, {idx});
    }
    // Pairwise swaps only between qubits that exist in the register.
    for (int idx = 0; idx < d; ++idx) {
        for (int idx1 = 0; idx1 < d; ++idx1) {
            if (idx == idx1) continue;
            if (idx < n && idx1 < n) index_gate(SelectionGateKind::cswap, idx, {idx, idx1});
            if (idx < m && idx1 < m) feature_gate(SelectionGateKind::cswap, idx, {idx, idx1});
        }
    }
    p.gates.push_back({SelectionGateKind::ccx, -1, {{DataRegister::index, 0}, {DataRegister::feature, 0}}});
    return p;
}

// Basis-state coordinates the selection program acts on.
struct SelectionCoords {
    Index index = 0;
    Index feature = 0;
    Index test = 0;
    bool marked = false;  // selection ancilla flipped to 1
};

namespace detail {

inline Index& coord(SelectionCoords& s, DataRegister r) {
    switch (r) {
        case DataRegister::index: return s.index;
        case DataRegister::feature: return s.feature;
        case DataRegister::test: return s.test;
    }
    return s.index;
}

inline bool bit_of(Index v, int b) { return (v >> b) & 1u; }

}  // namespace detail

// Classical bit-level interpretation of the program for one control value.
inline SelectionCoords trace_selection(const SelectionProgram& program, Index c, SelectionCoords s) {
    for (const auto& g : program.gates) {
        switch (g.kind) {
            case SelectionGateKind::cswap: {
                if (!detail::bit_of(c, g.control_bit)) break;
                Index& v = detail::coord(s, g.targets[0].reg);
                const int a = g.targets[0].bit, b = g.targets[1].bit;
                if (detail::bit_of(v, a) != detail::bit_of(v, b)) v ^= (Index{1} << a) | (Index{1} << b);
                break;
            }
            case SelectionGateKind::cnot:
                if (detail::bit_of(c, g.control_bit)) detail::coord(s, g.targets[0].reg) ^= Index{1} << g.targets[0].bit;
                break;
            case SelectionGateKind::ccx: {
                const bool on = detail::bit_of(detail::coord(s, g.targets[0].reg), g.targets[0].bit) &&
                                detail::bit_of(detail::coord(s, g.targets[1].reg), g.targets[1].bit);
                if (on) s.marked = !s.marked;
                break;
            }
        }
    }
    return s;
}

struct SelectionImage {
    Index index;
    Index feature;
    bool kept;
};

// Where the amplitude at (i, j) lands in branch c and whether it survives
// post-selection of the ancilla on `accept_outcome`.
inline SelectionImage classical_selection_oracle(const SelectionProgram& program, Index c, Index i, Index j,
                                                 int accept_outcome = 0) {
    if (c >= (Index{1} << program.d)) throw UsageError("control value out of range");
    const auto s = trace_selection(program, c, {i, j, 0, false});
    return {s.index, s.feature, static_cast<int>(s.marked) == accept_outcome};
}

// Test-register image of feature position t in branch c (swap kind).
inline Index map_test_feature(const SelectionProgram& program, Index c, Index t) {
    return trace_selection(program, c, {0, 0, t, false}).test;
}

// Qubit assignment of the ensemble circuit: classifier registers, then the
// selection ancilla, then the control register on top.
struct EnsembleLayout {
    ClassifierLayout classifier;
    int selection_ancilla = 0;
    Register control;
    int num_qubits = 0;
};

inline EnsembleLayout make_ensemble_layout(ClassifierKind kind, int n, int m, int d) {
    EnsembleLayout l;
    l.classifier = make_layout(kind, n, m);
    l.selection_ancilla = l.classifier.num_qubits;
    l.control = {l.selection_ancilla + 1, d};
    l.num_qubits = l.control.offset + d;
    return l;
}

inline std::vector<GateOp> to_gates(const SelectionProgram& program, const EnsembleLayout& layout) {
    auto qubit = [&](const RegisterQubit& q) {
        switch (q.reg) {
            case DataRegister::index: return layout.classifier.index.qubit(q.bit);
            case DataRegister::feature: return layout.classifier.feature.qubit(q.bit);
            case DataRegister::test: return layout.classifier.test.qubit(q.bit);
        }
        return -1;
    };
    std::vector<GateOp> ops;
    for (const auto& g : program.gates) {
        switch (g.kind) {
            case SelectionGateKind::cswap:
                ops.push_back(GateOp::swap(qubit(g.targets[0]), qubit(g.targets[1]), {layout.control.qubit(g.control_bit)}));
                break;
            case SelectionGateKind::cnot:
                ops.push_back(GateOp::x(qubit(g.targets[0]), {layout.control.qubit(g.control_bit)}));
                break;
            case SelectionGateKind::ccx:
                ops.push_back(GateOp::x(layout.selection_ancilla, {qubit(g.targets[0]), qubit(g.targets[1])}));
                break;
        }
    }
    return ops;
}

}  // namespace qens
