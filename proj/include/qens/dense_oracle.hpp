// Reference gate application by explicit full-matrix construction.
//
// A controlled gate is built as  I - P + P*U  where P projects every control
// qubit on |1>, and SWAP is expanded as (II + XX + YY + ZZ)/2. Each term is a
// Kronecker product of 2x2 factors ordered qubit n-1 (left) ... qubit 0 (right).
// This shares no code with the strided kernel in statevector.hpp.

#pragma once

#include <qens/statevector.hpp>

#include <array>
#include <map>

namespace qens {

inline constexpr int kDenseOracleMaxQubits = 10;

namespace dense {

using Mat2 = std::array<complex, 4>;  // row-major
using Matrix = std::vector<complex>;  // row-major, dim x dim

inline const Mat2 kI{1, 0, 0, 1};
inline const Mat2 kX{0, 1, 1, 0};
inline const Mat2 kY{0, complex(0, -1), complex(0, 1), 0};
inline const Mat2 kZ{1, 0, 0, -1};
inline const Mat2 kP1{0, 0, 0, 1};
inline const Mat2 kH{M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2};

// Kronecker product of per-qubit factors; factors[q] acts on qubit q.
inline Matrix kron(const std::vector<Mat2>& factors) {
    Matrix m{1.0};
    std::size_t dim = 1;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
        const Mat2& f = *it;
        Matrix next(dim * 2 * dim * 2);
        const std::size_t nd = dim * 2;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c)
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b)
                        next[(r * 2 + a) * nd + (c * 2 + b)] = m[r * dim + c] * f[a * 2 + b];
        m = std::move(next);
        dim = nd;
    }
    return m;
}

inline void axpy(Matrix& acc, complex alpha, const Matrix& term) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += alpha * term[k];
}

// Full unitary of `op` on `n` qubits.
inline Matrix gate_matrix(const GateOp& op, int n) {
    validate(op, n);
    auto layer = [&](std::map<int, Mat2> placed) {
        std::vector<Mat2> f(n, kI);
        for (int c : op.controls) f[c] = kP1;
        for (auto& [q, m] : placed) f[q] = m;
        return kron(f);
    };

    const std::size_t dim = std::size_t{1} << n;
    Matrix identity(dim * dim);
    for (std::size_t k = 0; k < dim; ++k) identity[k * dim + k] = 1.0;

    Matrix u(dim * dim);
    if (op.kind == GateKind::Swap) {
        const int a = op.targets[0], b = op.targets[1];
        for (const Mat2* p : {&kI, &kX, &kY, &kZ}) axpy(u, 0.5, layer({{a, *p}, {b, *p}}));
    } else {
        u = layer({{op.targets[0], op.kind == GateKind::H ? kH : kX}});
    }
    if (op.controls.empty()) return u;

    Matrix m = identity;
    axpy(m, -1.0, layer({}));
    axpy(m, 1.0, u);
    return m;
}

}  // namespace dense

inline Statevector dense_oracle_apply(const Statevector& state, const GateOp& op) {
    const int n = state.num_qubits();
    if (n > kDenseOracleMaxQubits) throw UsageError("dense oracle limited to " + std::to_string(kDenseOracleMaxQubits) + " qubits");
    const auto m = dense::gate_matrix(op, n);
    const std::size_t dim = state.dimension();
    std::vector<complex> out(dim);
    const auto in = state.amplitudes();
    for (std::size_t r = 0; r < dim; ++r) {
        complex acc = 0.0;
        for (std::size_t c = 0; c < dim; ++c) acc += m[r * dim + c] * in[c];
        out[r] = acc;
    }
    Statevector result(n);
    std::copy(out.begin(), out.end(), result.amplitudes().begin());
    return result;
}

}  // namespace qens
