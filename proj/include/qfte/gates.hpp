// Gate and prepared-state catalog, including the general n-qubit QFT and
// the fractional-power gates.
#pragma once

#include <numbers>
#include <optional>
#include <string>

#include "qfte/qcore.hpp"

namespace qfte {

enum class GateKind {
    I,
    H,
    X,
    Y,
    Z,
    CNOT,
    CNOT_FLIPPED,
    SWAP,
    QFT,
    X_POW_HALF,
    X_POW_QUARTER,
    Z_POW_QUARTER,
    CONTROLLED,  // controlled single-qubit base gate, control = first target
};

struct GateName {
    GateKind kind = GateKind::I;
    int qft_qubits = 0;                 // QFT only
    GateKind base = GateKind::I;        // CONTROLLED only

    static GateName simple(GateKind k) { return {k, 0, GateKind::I}; }
    static GateName qft(int n) { return {GateKind::QFT, n, GateKind::I}; }
    static GateName controlled(GateKind b) { return {GateKind::CONTROLLED, 0, b}; }

    bool operator==(const GateName&) const = default;
};

enum class NamedState { PSI1, PSI2, PSI3, PSI4, KET0, KET1 };

namespace detail {

// m^t for a Hermitian involution (m² = I), principal root:
// m = P+ − P−  ⇒  m^t = P+ + e^{iπt} P− = ((1+e^{iπt})I + (1−e^{iπt})m)/2.
inline DenseMatrix involution_power(const DenseMatrix& m, double t) {
    const cplx w = std::exp(cplx{0.0, std::numbers::pi * t});
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = 0.5 * ((1.0 - w) * m(i, j) + (i == j ? (1.0 + w) : cplx{}));
    return out;
}

}  // namespace detail

inline DenseMatrix pauli_x() {
    DenseMatrix m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

inline DenseMatrix pauli_y() {
    DenseMatrix m(2, 2);
    m(0, 1) = cplx{0.0, -1.0};
    m(1, 0) = cplx{0.0, 1.0};
    return m;
}

inline DenseMatrix pauli_z() {
    DenseMatrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

inline DenseMatrix hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    DenseMatrix m(2, 2);
    m(0, 0) = s;
    m(0, 1) = s;
    m(1, 0) = s;
    m(1, 1) = -s;
    return m;
}

inline DenseMatrix qft_matrix(int n) {
    if (n < 1 || n > 12) throw std::invalid_argument("qft_matrix: n must be in [1,12]");
    const std::size_t dim = std::size_t{1} << n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    DenseMatrix m(dim, dim);
    for (std::size_t j = 0; j < dim; ++j)
        for (std::size_t k = 0; k < dim; ++k) {
            const double phase = 2.0 * std::numbers::pi *
                                 static_cast<double>((j * k) % dim) / static_cast<double>(dim);
            m(j, k) = scale * std::exp(cplx{0.0, phase});
        }
    return m;
}

// Controlled version of a single-qubit gate, control qubit first: diag(I, g).
inline DenseMatrix controlled(const DenseMatrix& g) {
    if (g.rows() != 2 || g.cols() != 2)
        throw std::invalid_argument("controlled: base gate must be 2x2");
    DenseMatrix m(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) m(2 + i, 2 + j) = g(i, j);
    return m;
}

inline DenseMatrix gate_matrix(const GateName& name) {
    switch (name.kind) {
        case GateKind::I: return DenseMatrix::identity(2);
        case GateKind::H: return hadamard();
        case GateKind::X: return pauli_x();
        case GateKind::Y: return pauli_y();
        case GateKind::Z: return pauli_z();
        case GateKind::CNOT: return controlled(pauli_x());
        case GateKind::CNOT_FLIPPED: {
            DenseMatrix m(4, 4);
            m(0, 0) = 1.0;
            m(1, 3) = 1.0;
            m(2, 2) = 1.0;
            m(3, 1) = 1.0;
            return m;
        }
        case GateKind::SWAP: {
            DenseMatrix m(4, 4);
            m(0, 0) = 1.0;
            m(1, 2) = 1.0;
            m(2, 1) = 1.0;
            m(3, 3) = 1.0;
            return m;
        }
        case GateKind::QFT: return qft_matrix(name.qft_qubits);
        case GateKind::X_POW_HALF: return detail::involution_power(pauli_x(), 0.5);
        case GateKind::X_POW_QUARTER: return detail::involution_power(pauli_x(), 0.25);
        case GateKind::Z_POW_QUARTER: return detail::involution_power(pauli_z(), 0.25);
        case GateKind::CONTROLLED:
            return controlled(gate_matrix(GateName::simple(name.base)));
    }
    throw std::invalid_argument("gate_matrix: unknown gate");
}

inline std::size_t gate_arity(const GateName& name) {
    switch (name.kind) {
        case GateKind::CNOT:
        case GateKind::CNOT_FLIPPED:
        case GateKind::SWAP:
        case GateKind::CONTROLLED: return 2;
        case GateKind::QFT: return static_cast<std::size_t>(name.qft_qubits);
        default: return 1;
    }
}

inline std::string gate_label(const GateName& name) {
    switch (name.kind) {
        case GateKind::I: return "I";
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CNOT_FLIPPED: return "CNOT_FLIPPED";
        case GateKind::SWAP: return "SWAP";
        case GateKind::QFT: return "QFT" + std::to_string(name.qft_qubits);
        case GateKind::X_POW_HALF: return "X^1/2";
        case GateKind::X_POW_QUARTER: return "X^1/4";
        case GateKind::Z_POW_QUARTER: return "Z^1/4";
        case GateKind::CONTROLLED:
            return "C-" + gate_label(GateName::simple(name.base));
    }
    throw std::invalid_argument("gate_label: unknown gate");
}

inline std::optional<GateName> parse_gate_label(const std::string& label) {
    if (label == "I") return GateName::simple(GateKind::I);
    if (label == "H") return GateName::simple(GateKind::H);
    if (label == "X") return GateName::simple(GateKind::X);
    if (label == "Y") return GateName::simple(GateKind::Y);
    if (label == "Z") return GateName::simple(GateKind::Z);
    if (label == "CNOT") return GateName::simple(GateKind::CNOT);
    if (label == "CNOT_FLIPPED") return GateName::simple(GateKind::CNOT_FLIPPED);
    if (label == "SWAP") return GateName::simple(GateKind::SWAP);
    if (label == "X^1/2") return GateName::simple(GateKind::X_POW_HALF);
    if (label == "X^1/4") return GateName::simple(GateKind::X_POW_QUARTER);
    if (label == "Z^1/4") return GateName::simple(GateKind::Z_POW_QUARTER);
    if (label.starts_with("QFT")) {
        try {
            const int n = std::stoi(label.substr(3));
            if (n >= 1 && n <= 12 && label == "QFT" + std::to_string(n))
                return GateName::qft(n);
        } catch (...) {
        }
        return std::nullopt;
    }
    if (label.starts_with("C-")) {
        const auto base = parse_gate_label(label.substr(2));
        if (base && gate_arity(*base) == 1)
            return GateName::controlled(base->kind);
        return std::nullopt;
    }
    return std::nullopt;
}

inline StateVector prepare_named_state(NamedState name) {
    const std::vector<cplx> ket0{1.0, 0.0};
    const std::vector<cplx> ket1{0.0, 1.0};
    switch (name) {
        case NamedState::KET0: return StateVector(1, ket0);
        case NamedState::KET1: return StateVector(1, ket1);
        case NamedState::PSI1:
            return StateVector(1, gate_matrix(GateName::simple(GateKind::X_POW_QUARTER)) * ket0);
        case NamedState::PSI2:
            return StateVector(1, gate_matrix(GateName::simple(GateKind::X_POW_QUARTER)) * ket1);
        case NamedState::PSI3:
            return StateVector(1, hadamard() * ket0);
        case NamedState::PSI4: {
            // The printed matrix sequence: X^{1/4} · Z^{1/4} · X^{1/2} onto |1⟩.
            const DenseMatrix m =
                gate_matrix(GateName::simple(GateKind::X_POW_QUARTER)) *
                gate_matrix(GateName::simple(GateKind::Z_POW_QUARTER)) *
                gate_matrix(GateName::simple(GateKind::X_POW_HALF));
            return StateVector(1, m * ket1);
        }
    }
    throw std::invalid_argument("prepare_named_state: unknown state");
}

}  // namespace qfte
