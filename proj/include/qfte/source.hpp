// Builder for the parallel entanglement source: one circuit producing M
// disjoint sets of N entangled particles, plus the checks that certify
// within-set entanglement and cross-set independence.
#pragma once

#include <vector>

#include "qfte/circuit.hpp"
#include "qfte/density.hpp"
#include "qfte/engine.hpp"
#include "qfte/fidelity.hpp"
#include "qfte/gates.hpp"

namespace qfte {

struct SourceSpec {
    std::size_t m_sets = 1;
    std::size_t set_size = 2;

    void validate(std::size_t qubit_limit = 24) const {
        if (m_sets < 1 || set_size < 2)
            throw std::invalid_argument("SourceSpec: need M >= 1 sets of N >= 2 particles");
        if (m_sets * set_size > qubit_limit)
            throw std::invalid_argument("SourceSpec: spec exceeds qubit budget");
    }
};

// assignment[m] lists set m's qubits; the first entry is that set's QFT
// control qubit. Sets are pairwise disjoint and cover qubits 0..M*N-1.
struct SetLayout {
    std::vector<std::vector<std::size_t>> assignment;

    void validate(const SourceSpec& spec) const {
        if (assignment.size() != spec.m_sets)
            throw std::invalid_argument("SetLayout: set count mismatch");
        std::vector<bool> seen(spec.m_sets * spec.set_size, false);
        for (const auto& set : assignment) {
            if (set.size() != spec.set_size)
                throw std::invalid_argument("SetLayout: set size mismatch");
            for (std::size_t q : set) {
                if (q >= seen.size() || seen[q])
                    throw std::invalid_argument("SetLayout: sets must disjointly cover the register");
                seen[q] = true;
            }
        }
    }
};

// Default layout following the {q[i], q[N+i]} pairing: controls come first,
// set m owns control m plus a contiguous block of fan-out qubits.
inline SetLayout default_layout(const SourceSpec& spec) {
    SetLayout layout;
    layout.assignment.resize(spec.m_sets);
    for (std::size_t m = 0; m < spec.m_sets; ++m) {
        auto& set = layout.assignment[m];
        set.push_back(m);
        for (std::size_t i = 0; i + 1 < spec.set_size; ++i)
            set.push_back(spec.m_sets + m * (spec.set_size - 1) + i);
    }
    return layout;
}

struct SourceCircuit {
    Circuit circuit;
    SetLayout layout;
};

// M-qubit QFT block on the control qubits, then a CNOT star from each
// control onto its set's fresh |0> qubits.
inline SourceCircuit build_source(const SourceSpec& spec, const SetLayout& layout) {
    spec.validate();
    layout.validate(spec);

    Circuit c(spec.m_sets * spec.set_size, 0);
    std::vector<std::size_t> controls;
    controls.reserve(spec.m_sets);
    for (const auto& set : layout.assignment) controls.push_back(set.front());
    c.add(CircuitOp::unitary(GateName::qft(static_cast<int>(spec.m_sets)), controls));
    for (const auto& set : layout.assignment)
        for (std::size_t i = 1; i < set.size(); ++i)
            c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {set.front(), set[i]}));
    return {std::move(c), layout};
}

inline SourceCircuit build_source(const SourceSpec& spec) {
    return build_source(spec, default_layout(spec));
}

inline StateVector ghz_state(std::size_t n) {
    StateVector s(n);
    auto& amps = s.amplitudes();
    const double r = 1.0 / std::sqrt(2.0);
    amps[0] = r;
    amps[amps.size() - 1] = r;
    return s;
}

struct DisjointReport {
    std::vector<double> set_ghz_fidelity;
    double max_cross_mutual_information = 0.0;
};

inline DisjointReport verify_disjoint(const StateVector& state, const SetLayout& layout) {
    std::size_t covered = 0;
    for (const auto& set : layout.assignment) covered += set.size();
    if (covered != state.n_qubits())
        throw std::invalid_argument("verify_disjoint: layout does not cover the state");

    DisjointReport report;
    for (const auto& set : layout.assignment) {
        const DensityMatrix reduced = reduced_from_state(state, set);
        const DensityMatrix target = DensityMatrix::from_state(ghz_state(set.size()));
        report.set_ghz_fidelity.push_back(uhlmann(target, reduced));
    }
    for (std::size_t a = 0; a < layout.assignment.size(); ++a)
        for (std::size_t b = a + 1; b < layout.assignment.size(); ++b)
            for (std::size_t qa : layout.assignment[a])
                for (std::size_t qb : layout.assignment[b])
                    report.max_cross_mutual_information =
                        std::max(report.max_cross_mutual_information,
                                 mutual_information(state, {qa}, {qb}));
    return report;
}

}  // namespace qfte
