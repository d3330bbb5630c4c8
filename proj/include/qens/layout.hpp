// Register maps for the three classifier circuits.
//
// From qubit 0 upward: classifier-specific auxiliaries, label, feature
// register, index register, test register (swap only). The ensemble appends
// the selection ancilla and the control register above these.

#pragma once

#include <qens/errors.hpp>
#include <qens/statevector.hpp>

#include <string>
#include <vector>

namespace qens {

enum class ClassifierKind { cosine, distance, swap };

inline std::string to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::cosine: return "cosine";
        case ClassifierKind::distance: return "distance";
        case ClassifierKind::swap: return "swap";
    }
    return "?";
}

inline ClassifierKind parse_kind(const std::string& s) {
    if (s == "cosine") return ClassifierKind::cosine;
    if (s == "distance") return ClassifierKind::distance;
    if (s == "swap") return ClassifierKind::swap;
    throw ConfigError("unknown classifier kind '" + s + "' (expected cosine, distance or swap)");
}

// Contiguous block of qubits; qubit(k) is the k-th (least significant first).
struct Register {
    int offset = 0;
    int width = 0;

    int qubit(int k) const { return offset + k; }
    Index place(Index value) const { return value << offset; }
    Index extract(Index basis) const { return (basis >> offset) & ((Index{1} << width) - 1); }
    std::vector<int> qubits() const {
        std::vector<int> q(width);
        for (int k = 0; k < width; ++k) q[k] = offset + k;
        return q;
    }
};

// Unused single-qubit roles are -1.
struct ClassifierLayout {
    ClassifierKind kind = ClassifierKind::distance;
    int swap_control = -1;  // cosine, swap: control of the SWAP test, measured
    int aux_plus = -1;      // cosine: auxiliary prepared in |+>
    int ancilla = -1;       // cosine: branch ancilla a; distance: interference ancilla a
    int label = -1;
    Register feature;
    Register index;
    Register test;  // swap only
    int num_qubits = 0;

    std::vector<int> all_qubits() const {
        std::vector<int> q;
        for (int s : {swap_control, aux_plus, ancilla, label})
            if (s >= 0) q.push_back(s);
        for (const Register* r : {&feature, &index, &test})
            for (int k = 0; k < r->width; ++k) q.push_back(r->qubit(k));
        return q;
    }
};

inline ClassifierLayout make_layout(ClassifierKind kind, int n, int m) {
    ClassifierLayout l;
    l.kind = kind;
    int next = 0;
    switch (kind) {
        case ClassifierKind::cosine:
            l.swap_control = next++;
            l.aux_plus = next++;
            l.ancilla = next++;
            break;
        case ClassifierKind::distance:
            l.ancilla = next++;
            break;
        case ClassifierKind::swap:
            l.swap_control = next++;
            break;
    }
    l.label = next++;
    l.feature = {next, m};
    next += m;
    l.index = {next, n};
    next += n;
    if (kind == ClassifierKind::swap) {
        l.test = {next, m};
        next += m;
    } else {
        l.test = {next, 0};
    }
    l.num_qubits = next;
    return l;
}

}  // namespace qens
