// Circuit representation and the line-oriented text format.
#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfte/gates.hpp"
#include "qfte/qcore.hpp"

namespace qfte {

struct CircuitOp {
    enum class Kind { Unitary, Measure, ClassicallyControlled };

    Kind kind = Kind::Unitary;
    std::optional<GateName> gate;       // named gate (Unitary, ClassicallyControlled)
    std::optional<DenseMatrix> raw;     // raw matrix (Unitary only)
    std::vector<std::size_t> targets;   // gate targets, or {qubit} for Measure
    std::size_t cbit = 0;               // Measure destination / control bit

    static CircuitOp unitary(GateName g, std::vector<std::size_t> targets) {
        CircuitOp op;
        op.kind = Kind::Unitary;
        op.gate = g;
        op.targets = std::move(targets);
        return op;
    }

    static CircuitOp unitary_raw(DenseMatrix m, std::vector<std::size_t> targets) {
        CircuitOp op;
        op.kind = Kind::Unitary;
        op.raw = std::move(m);
        op.targets = std::move(targets);
        return op;
    }

    static CircuitOp measure(std::size_t qubit, std::size_t cbit) {
        CircuitOp op;
        op.kind = Kind::Measure;
        op.targets = {qubit};
        op.cbit = cbit;
        return op;
    }

    static CircuitOp classically_controlled(std::size_t cbit, GateName g, std::size_t target) {
        CircuitOp op;
        op.kind = Kind::ClassicallyControlled;
        op.gate = g;
        op.targets = {target};
        op.cbit = cbit;
        return op;
    }

    DenseMatrix matrix() const {
        if (raw) return *raw;
        if (gate) return gate_matrix(*gate);
        throw std::logic_error("CircuitOp: unitary op carries neither gate nor matrix");
    }
};

struct Circuit {
    std::size_t n_qubits = 1;
    std::size_t n_cbits = 0;
    std::vector<CircuitOp> ops;

    Circuit() = default;
    Circuit(std::size_t qubits, std::size_t cbits) : n_qubits(qubits), n_cbits(cbits) {}

    void add(CircuitOp op) { ops.push_back(std::move(op)); }

    // Throws on out-of-range references, reads of never-written classical
    // bits, and non-unitary raw matrices.
    void validate() const {
        std::vector<bool> written(n_cbits, false);
        for (const auto& op : ops) {
            for (std::size_t q : op.targets)
                if (q >= n_qubits)
                    throw std::invalid_argument("circuit: qubit index out of range");
            switch (op.kind) {
                case CircuitOp::Kind::Unitary: {
                    const DenseMatrix m = op.matrix();
                    if (m.rows() != (std::size_t{1} << op.targets.size()))
                        throw std::invalid_argument("circuit: gate arity mismatch");
                    detail::check_targets(n_qubits, op.targets);
                    if (op.raw && !is_unitary(*op.raw))
                        throw std::invalid_argument("circuit: raw matrix is not unitary");
                    break;
                }
                case CircuitOp::Kind::Measure:
                    if (op.cbit >= n_cbits)
                        throw std::invalid_argument("circuit: classical bit out of range");
                    written[op.cbit] = true;
                    break;
                case CircuitOp::Kind::ClassicallyControlled:
                    if (op.cbit >= n_cbits || !written[op.cbit])
                        throw std::invalid_argument(
                            "circuit: classically-controlled op reads an unwritten bit");
                    if (!op.gate || gate_arity(*op.gate) != 1)
                        throw std::invalid_argument(
                            "circuit: classical control requires a named single-qubit gate");
                    break;
            }
        }
    }

    bool has_measurements() const {
        for (const auto& op : ops)
            if (op.kind != CircuitOp::Kind::Unitary) return true;
        return false;
    }
};

// --- text format -----------------------------------------------------------
//
//   qubits <n>
//   cbits <c>
//   U <gatename> q<i> [q<j> ...]
//   M q<i> c<k>
//   CIF c<k> <gatename> q<i>
//
// '#' starts a comment; blank lines are ignored.

inline std::string emit_circuit(const Circuit& c) {
    std::ostringstream out;
    out << "qubits " << c.n_qubits << "\n";
    out << "cbits " << c.n_cbits << "\n";
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::Unitary:
                if (!op.gate)
                    throw std::invalid_argument("emit_circuit: raw-matrix op has no text form");
                out << "U " << gate_label(*op.gate);
                for (std::size_t q : op.targets) out << " q" << q;
                out << "\n";
                break;
            case CircuitOp::Kind::Measure:
                out << "M q" << op.targets[0] << " c" << op.cbit << "\n";
                break;
            case CircuitOp::Kind::ClassicallyControlled:
                out << "CIF c" << op.cbit << " " << gate_label(*op.gate) << " q"
                    << op.targets[0] << "\n";
                break;
        }
    }
    return out.str();
}

namespace detail {

inline std::size_t parse_ref(const std::string& tok, char prefix, int line_no) {
    if (tok.size() < 2 || tok[0] != prefix)
        throw std::invalid_argument("circuit parse error at line " + std::to_string(line_no) +
                                    ": expected " + prefix + std::string("<index>, got '") +
                                    tok + "'");
    return std::stoul(tok.substr(1));
}

}  // namespace detail

inline Circuit parse_circuit(const std::string& text) {
    Circuit c(1, 0);
    bool saw_qubits = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;

        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);

        auto fail = [&](const std::string& why) -> Circuit& {
            throw std::invalid_argument("circuit parse error at line " +
                                        std::to_string(line_no) + ": " + why);
        };

        if (head == "qubits") {
            if (toks.size() != 1) fail("qubits takes one argument");
            c.n_qubits = std::stoul(toks[0]);
            saw_qubits = true;
        } else if (head == "cbits") {
            if (toks.size() != 1) fail("cbits takes one argument");
            c.n_cbits = std::stoul(toks[0]);
        } else if (head == "U") {
            if (toks.size() < 2) fail("U needs a gate name and at least one qubit");
            const auto gate = parse_gate_label(toks[0]);
            if (!gate) fail("unknown gate name '" + toks[0] + "'");
            std::vector<std::size_t> targets;
            for (std::size_t i = 1; i < toks.size(); ++i)
                targets.push_back(detail::parse_ref(toks[i], 'q', line_no));
            if (targets.size() != gate_arity(*gate)) fail("gate arity mismatch");
            c.add(CircuitOp::unitary(*gate, std::move(targets)));
        } else if (head == "M") {
            if (toks.size() != 2) fail("M needs one qubit and one classical bit");
            c.add(CircuitOp::measure(detail::parse_ref(toks[0], 'q', line_no),
                                     detail::parse_ref(toks[1], 'c', line_no)));
        } else if (head == "CIF") {
            if (toks.size() != 3) fail("CIF needs a classical bit, a gate name, and a qubit");
            const auto gate = parse_gate_label(toks[1]);
            if (!gate || gate_arity(*gate) != 1)
                fail("CIF requires a known single-qubit gate, got '" + toks[1] + "'");
            c.add(CircuitOp::classically_controlled(
                detail::parse_ref(toks[0], 'c', line_no), *gate,
                detail::parse_ref(toks[2], 'q', line_no)));
        } else {
            fail("unknown directive '" + head + "'");
        }
    }
    if (!saw_qubits)
        throw std::invalid_argument("circuit parse error: missing 'qubits' header");
    c.validate();
    return c;
}

}  // namespace qfte
