// Builders and runners for the communication protocols: teleportation (plain,
// parallel, bidirectional), quantum secret sharing, entanglement swapping,
// forward-cascade repeaters, and the multi-orbit CBS relay.
#pragma once

#include <string>
#include <vector>

#include "qfte/circuit.hpp"
#include "qfte/density.hpp"
#include "qfte/engine.hpp"
#include "qfte/fidelity.hpp"
#include "qfte/gates.hpp"
#include "qfte/source.hpp"

namespace qfte {

enum class CorrectionMode { Feedback, Deferred };
enum class SwapVariant { TwoSources, QftSource };
enum class CascadeSource { PerHop, QftShared, GhzShared };

struct ProtocolRun {
    std::vector<StateVector> inputs;  // one single-qubit state per channel
    CorrectionMode mode = CorrectionMode::Feedback;
    NoiseModel noise{};
    std::uint64_t shots = 8192;
    Seed seed{};
};

struct ChannelReport {
    Histogram receiver_histogram;  // one-bit histogram at the receiver
    FidelityReport fidelity;
};

struct ProtocolReport {
    std::vector<ChannelReport> channels;
    std::vector<double> per_hop_f_ap;  // cascades and relays only
};

// Unitary preparing the given single-qubit state from |0>.
inline DenseMatrix state_prep_unitary(const StateVector& s) {
    if (s.n_qubits() != 1)
        throw std::invalid_argument("state_prep_unitary: expected a single-qubit state");
    if (std::abs(s.norm() - 1.0) > kNormTol)
        throw std::invalid_argument("state_prep_unitary: state is not normalized");
    const cplx a = s[0], b = s[1];
    DenseMatrix m(2, 2);
    m(0, 0) = a;
    m(1, 0) = b;
    m(0, 1) = -std::conj(b);
    m(1, 1) = std::conj(a);
    return m;
}

// A built protocol instance: the feedback-form circuit up to (but excluding)
// the terminal receiver measurements, plus the receiver wiring.
struct ProtocolCircuit {
    struct Channel {
        std::size_t receiver_qubit;
        StateVector input;
    };
    Circuit circuit;
    std::vector<Channel> channels;
};

namespace detail {

// Source ops on an arbitrary disjoint family of qubit sets; first qubit of
// each set is its QFT control.
inline void append_source(Circuit& c, const std::vector<std::vector<std::size_t>>& sets) {
    std::vector<std::size_t> controls;
    for (const auto& set : sets) controls.push_back(set.front());
    c.add(CircuitOp::unitary(GateName::qft(static_cast<int>(sets.size())), controls));
    for (const auto& set : sets)
        for (std::size_t i = 1; i < set.size(); ++i)
            c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {set.front(), set[i]}));
}

inline void append_bell_pair(Circuit& c, std::size_t a, std::size_t b) {
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {a}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {a, b}));
}

// CNOT + H + two measurements; the sender-side core of teleportation.
inline void append_bsm(Circuit& c, std::size_t message, std::size_t half,
                       std::size_t cbit_z, std::size_t cbit_x) {
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {message, half}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {message}));
    c.add(CircuitOp::measure(message, cbit_z));
    c.add(CircuitOp::measure(half, cbit_x));
}

inline void append_corrections(Circuit& c, std::size_t receiver, std::size_t cbit_z,
                               std::size_t cbit_x) {
    c.add(CircuitOp::classically_controlled(cbit_x, GateName::simple(GateKind::X), receiver));
    c.add(CircuitOp::classically_controlled(cbit_z, GateName::simple(GateKind::Z), receiver));
}

inline void append_prep(Circuit& c, std::size_t qubit, const StateVector& input) {
    c.add(CircuitOp::unitary_raw(state_prep_unitary(input), {qubit}));
}

inline const StateVector& single_input(const ProtocolRun& run) {
    if (run.inputs.size() != 1)
        throw std::invalid_argument("protocol expects exactly one input state");
    return run.inputs.front();
}

}  // namespace detail

// --- builders ----------------------------------------------------------------

inline ProtocolCircuit build_teleport(const StateVector& input) {
    // q0 message, q1 Alice's entangled half, q2 Bob
    ProtocolCircuit pc{Circuit(3, 2), {{2, input}}};
    detail::append_prep(pc.circuit, 0, input);
    detail::append_source(pc.circuit, {{1, 2}});
    detail::append_bsm(pc.circuit, 0, 1, 0, 1);
    detail::append_corrections(pc.circuit, 2, 0, 1);
    return pc;
}

// One source of k Bell pairs feeds k teleportation lanes; 3k qubits.
inline ProtocolCircuit build_parallel_teleport(const std::vector<StateVector>& inputs) {
    const std::size_t k = inputs.size();
    if (k < 1) throw std::invalid_argument("parallel teleport: need at least one input");
    ProtocolCircuit pc{Circuit(3 * k, 2 * k), {}};
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t i = 0; i < k; ++i) sets.push_back({i, k + i});
    detail::append_source(pc.circuit, sets);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t msg = 2 * k + i;
        detail::append_prep(pc.circuit, msg, inputs[i]);
        detail::append_bsm(pc.circuit, msg, i, 2 * i, 2 * i + 1);
        detail::append_corrections(pc.circuit, k + i, 2 * i, 2 * i + 1);
        pc.channels.push_back({k + i, inputs[i]});
    }
    return pc;
}

// Secret sharing over GHZ3: dealer BSM, middle-party X-basis measurement,
// recoverer applies X^b then Z^(a xor c).
inline void append_qss_lane(ProtocolCircuit& pc, const StateVector& input, std::size_t msg,
                            const std::vector<std::size_t>& ghz_triad, std::size_t cbit0) {
    Circuit& c = pc.circuit;
    const std::size_t dealer = ghz_triad[0], middle = ghz_triad[1], recover = ghz_triad[2];
    detail::append_prep(c, msg, input);
    detail::append_bsm(c, msg, dealer, cbit0, cbit0 + 1);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {middle}));
    c.add(CircuitOp::measure(middle, cbit0 + 2));
    c.add(CircuitOp::classically_controlled(cbit0 + 1, GateName::simple(GateKind::X), recover));
    c.add(CircuitOp::classically_controlled(cbit0, GateName::simple(GateKind::Z), recover));
    c.add(CircuitOp::classically_controlled(cbit0 + 2, GateName::simple(GateKind::Z), recover));
    pc.channels.push_back({recover, input});
}

inline ProtocolCircuit build_qss(const StateVector& input) {
    // q0 message; q1..q3 GHZ3 (dealer, middle, recoverer)
    ProtocolCircuit pc{Circuit(4, 3), {}};
    detail::append_source(pc.circuit, {{1, 2, 3}});
    append_qss_lane(pc, input, 0, {1, 2, 3}, 0);
    return pc;
}

inline ProtocolCircuit build_parallel_qss(const std::vector<StateVector>& inputs) {
    const std::size_t k = inputs.size();
    if (k < 1) throw std::invalid_argument("parallel QSS: need at least one input");
    ProtocolCircuit pc{Circuit(4 * k, 3 * k), {}};
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t i = 0; i < k; ++i)
        sets.push_back({i, k + 2 * i, k + 2 * i + 1});
    detail::append_source(pc.circuit, sets);
    for (std::size_t i = 0; i < k; ++i)
        append_qss_lane(pc, inputs[i], 3 * k + i, sets[i], 3 * i);
    return pc;
}

// Two crossed pairs from one source: pair 1 carries Alice->Bob, pair 2
// carries Bob->Alice.
inline ProtocolCircuit build_bidirectional(const StateVector& from_alice,
                                           const StateVector& from_bob) {
    // source on q0..q3: sets {0,2} and {1,3}; q4 Alice's message, q5 Bob's
    ProtocolCircuit pc{Circuit(6, 4), {}};
    detail::append_source(pc.circuit, {{0, 2}, {1, 3}});
    detail::append_prep(pc.circuit, 4, from_alice);
    detail::append_prep(pc.circuit, 5, from_bob);
    detail::append_bsm(pc.circuit, 4, 0, 0, 1);  // Alice holds q0
    detail::append_corrections(pc.circuit, 2, 0, 1);
    detail::append_bsm(pc.circuit, 5, 3, 2, 3);  // Bob holds q3
    detail::append_corrections(pc.circuit, 1, 2, 3);
    pc.channels.push_back({2, from_alice});  // reconstructed at Bob
    pc.channels.push_back({1, from_bob});    // reconstructed at Alice
    return pc;
}

inline ProtocolCircuit build_entanglement_swap(const StateVector& input, SwapVariant variant) {
    // q0 message; pair (q1,q2) and pair (q3,q4); BSM on the middle (q2,q3)
    ProtocolCircuit pc{Circuit(5, 4), {{4, input}}};
    detail::append_prep(pc.circuit, 0, input);
    if (variant == SwapVariant::TwoSources) {
        detail::append_bell_pair(pc.circuit, 1, 2);
        detail::append_bell_pair(pc.circuit, 3, 4);
    } else {
        detail::append_source(pc.circuit, {{1, 2}, {3, 4}});
    }
    detail::append_bsm(pc.circuit, 2, 3, 0, 1);
    detail::append_corrections(pc.circuit, 4, 0, 1);  // (q1,q4) is now a Bell pair
    detail::append_bsm(pc.circuit, 0, 1, 2, 3);
    detail::append_corrections(pc.circuit, 4, 2, 3);
    return pc;
}

// End-to-end pair state after the swap alone (no payload teleportation);
// used to check the post-swap pair against |beta00>.
inline DensityMatrix swap_end_pair_state(SwapVariant variant) {
    Circuit c(4, 2);
    if (variant == SwapVariant::TwoSources) {
        detail::append_bell_pair(c, 0, 1);
        detail::append_bell_pair(c, 2, 3);
    } else {
        detail::append_source(c, {{0, 1}, {2, 3}});
    }
    detail::append_bsm(c, 1, 2, 0, 1);
    detail::append_corrections(c, 3, 0, 1);
    return run_exact_pure(c).reduced({0, 3});
}

inline ProtocolCircuit build_forward_cascade(const StateVector& input, std::size_t hops,
                                             CascadeSource source) {
    if (hops < 1) throw std::invalid_argument("forward cascade: hops must be >= 1");
    // q0 message; hop i uses pair (1+2i, 2+2i)
    ProtocolCircuit pc{Circuit(1 + 2 * hops, 2 * hops), {{2 * hops, input}}};
    detail::append_prep(pc.circuit, 0, input);
    switch (source) {
        case CascadeSource::PerHop:
            for (std::size_t i = 0; i < hops; ++i)
                detail::append_bell_pair(pc.circuit, 1 + 2 * i, 2 + 2 * i);
            break;
        case CascadeSource::QftShared: {
            std::vector<std::vector<std::size_t>> sets;
            for (std::size_t i = 0; i < hops; ++i) sets.push_back({1 + 2 * i, 2 + 2 * i});
            detail::append_source(pc.circuit, sets);
            break;
        }
        case CascadeSource::GhzShared: {
            // one GHZ_{2*hops}, consecutive qubit pairs as hop channels
            pc.circuit.add(CircuitOp::unitary(GateName::simple(GateKind::H), {1}));
            for (std::size_t q = 2; q <= 2 * hops; ++q)
                pc.circuit.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {1, q}));
            break;
        }
    }
    std::size_t carrier = 0;
    for (std::size_t i = 0; i < hops; ++i) {
        detail::append_bsm(pc.circuit, carrier, 1 + 2 * i, 2 * i, 2 * i + 1);
        detail::append_corrections(pc.circuit, 2 + 2 * i, 2 * i, 2 * i + 1);
        carrier = 2 + 2 * i;
    }
    return pc;
}

// Reduced CBS-only teleport stage: single CNOT, single measurement, one
// classical bit, X correction. Valid for computational basis states only.
inline void append_cbs_stage(Circuit& c, std::size_t carrier, std::size_t pair_a,
                             std::size_t pair_b, std::size_t cbit) {
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {carrier, pair_a}));
    c.add(CircuitOp::measure(pair_a, cbit));
    c.add(CircuitOp::classically_controlled(cbit, GateName::simple(GateKind::X), pair_b));
}

inline ProtocolCircuit build_cbs_teleport(int bit) {
    if (bit != 0 && bit != 1)
        throw std::invalid_argument("cbs_teleport: input outside CBS contract");
    ProtocolCircuit pc{Circuit(3, 1), {}};
    StateVector input = prepare_named_state(bit ? NamedState::KET1 : NamedState::KET0);
    if (bit) pc.circuit.add(CircuitOp::unitary(GateName::simple(GateKind::X), {0}));
    detail::append_source(pc.circuit, {{1, 2}});
    append_cbs_stage(pc.circuit, 0, 1, 2, 0);
    pc.channels.push_back({2, std::move(input)});
    return pc;
}

// --- evaluation ----------------------------------------------------------------

namespace detail {

inline Histogram histogram_marginal(const Histogram& h, std::size_t cbit) {
    Histogram out;
    out.shots = h.shots;
    for (const auto& [key, count] : h.counts) out.counts[std::string(1, key.at(cbit))] += count;
    return out;
}

// Alice's preparation estimate: prepare-and-measure on the same noise model.
inline ProbabilityPair preparation_pair(const StateVector& input, const NoiseModel& noise) {
    Circuit c(1, 1);
    append_prep(c, 0, input);
    c.add(CircuitOp::measure(0, 0));
    return distribution_to_pair(run_exact(c, noise).distribution);
}

}  // namespace detail

// Receiver's post-correction reduced density matrix, exact. Noiseless runs
// use the pure-branch backend (no qubit limit); noisy runs need n <= 10.
inline DensityMatrix receiver_state(const ProtocolCircuit& pc, std::size_t channel,
                                    CorrectionMode mode, const NoiseModel& noise = {}) {
    const Circuit circuit =
        mode == CorrectionMode::Deferred ? defer_measurements(pc.circuit) : pc.circuit;
    const std::size_t q = pc.channels.at(channel).receiver_qubit;
    if (noise.trivial()) return run_exact_pure(circuit).reduced({q});
    return partial_trace(run_exact(circuit, noise).final_state, {q});
}

// Circuit with terminal receiver measurements appended; channel i lands on
// classical bit n_cbits + i.
inline Circuit measured_circuit(const ProtocolCircuit& pc, CorrectionMode mode) {
    Circuit c = mode == CorrectionMode::Deferred ? defer_measurements(pc.circuit) : pc.circuit;
    const std::size_t base = c.n_cbits;
    c.n_cbits += pc.channels.size();
    for (std::size_t i = 0; i < pc.channels.size(); ++i)
        c.add(CircuitOp::measure(pc.channels[i].receiver_qubit, base + i));
    return c;
}

// Exact receiver marginal for channel i.
inline ProbabilityPair receiver_pair(const ProtocolCircuit& pc, std::size_t channel,
                                     CorrectionMode mode, const NoiseModel& noise = {}) {
    const Circuit c = measured_circuit(pc, mode);
    const std::size_t cbit = pc.circuit.n_cbits + channel;
    if (noise.trivial())
        return distribution_to_pair(marginal(run_exact_pure(c).distribution, cbit));
    return distribution_to_pair(marginal(run_exact(c, noise).distribution, cbit));
}

inline ProtocolReport run_protocol(const ProtocolCircuit& pc, const ProtocolRun& run) {
    const Circuit measured = measured_circuit(pc, run.mode);
    const Histogram hist = run_shots(measured, run.shots, run.seed, run.noise);
    const bool exact_ok = run.noise.trivial() || measured.n_qubits <= 10;

    ProtocolReport report;
    for (std::size_t i = 0; i < pc.channels.size(); ++i) {
        const std::size_t cbit = pc.circuit.n_cbits + i;
        ChannelReport ch;
        ch.receiver_histogram = detail::histogram_marginal(hist, cbit);

        const ProbabilityPair theory = diag_of(pc.channels[i].input);
        const ProbabilityPair alice = detail::preparation_pair(pc.channels[i].input, run.noise);
        const ProbabilityPair bob = exact_ok
                                        ? receiver_pair(pc, i, run.mode, run.noise)
                                        : histogram_to_pair(ch.receiver_histogram);
        ch.fidelity.f_rp = f_rp(theory, alice);
        ch.fidelity.f_tp = f_tp(alice, bob);
        ch.fidelity.f_ap = f_ap(theory, bob);
        if (exact_ok) {
            const DensityMatrix got = receiver_state(pc, i, run.mode, run.noise);
            ch.fidelity.f_uhlmann =
                uhlmann(DensityMatrix::from_state(pc.channels[i].input), got);
        }
        report.channels.push_back(std::move(ch));
    }
    return report;
}

// --- spec-level protocol runners -----------------------------------------------

inline ProtocolReport teleport(const ProtocolRun& run) {
    return run_protocol(build_teleport(detail::single_input(run)), run);
}

inline ProtocolReport parallel_teleport(const ProtocolRun& run) {
    if (run.inputs.empty())
        throw std::invalid_argument("parallel teleport: need input states");
    return run_protocol(build_parallel_teleport(run.inputs), run);
}

inline ProtocolReport qss(const ProtocolRun& run) {
    return run_protocol(build_qss(detail::single_input(run)), run);
}

inline ProtocolReport parallel_qss(const ProtocolRun& run) {
    if (run.inputs.empty()) throw std::invalid_argument("parallel QSS: need input states");
    return run_protocol(build_parallel_qss(run.inputs), run);
}

inline ProtocolReport bidirectional_teleport(const ProtocolRun& run) {
    if (run.inputs.size() != 2)
        throw std::invalid_argument("bidirectional teleport: need exactly two inputs");
    return run_protocol(build_bidirectional(run.inputs[0], run.inputs[1]), run);
}

inline ProtocolReport entanglement_swap(const ProtocolRun& run, SwapVariant variant) {
    return run_protocol(build_entanglement_swap(detail::single_input(run), variant), run);
}

inline ProtocolReport forward_cascade(const ProtocolRun& run, std::size_t hops,
                                      CascadeSource source) {
    const StateVector& input = detail::single_input(run);
    ProtocolReport report = run_protocol(build_forward_cascade(input, hops, source), run);
    // per-hop fidelity from truncated runs: hop prefix + measurement
    const ProbabilityPair theory = diag_of(input);
    for (std::size_t h = 1; h <= hops; ++h) {
        ProtocolCircuit truncated = build_forward_cascade(input, hops, source);
        truncated.channels = {{2 * h, input}};  // carrier after hop h
        // drop the BSM/correction blocks of later hops; each hop contributes
        // exactly 6 ops at the tail of the circuit
        Circuit& c = truncated.circuit;
        c.ops.resize(c.ops.size() - 6 * (hops - h));
        const Histogram hist =
            run_shots(measured_circuit(truncated, run.mode), run.shots, run.seed, run.noise);
        report.per_hop_f_ap.push_back(f_ap(
            theory, histogram_to_pair(detail::histogram_marginal(hist, c.n_cbits))));
    }
    return report;
}

inline ProtocolReport cbs_teleport(int bit, const NoiseModel& noise, std::uint64_t shots,
                                   Seed seed) {
    ProtocolRun run{.inputs = {}, .mode = CorrectionMode::Feedback, .noise = noise,
                    .shots = shots, .seed = seed};
    const ProtocolCircuit pc = build_cbs_teleport(bit);
    run.inputs = {pc.channels[0].input};
    return run_protocol(pc, run);
}

// --- multi-orbit CBS relay -------------------------------------------------------

inline StateVector cl2qu(int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("cl2qu: bit must be 0 or 1");
    return prepare_named_state(bit ? NamedState::KET1 : NamedState::KET0);
}

// Majority-vote decode; an exact tie is an indeterminate bit.
inline int qu2cl(const Histogram& h) {
    std::uint64_t n0 = 0, n1 = 0;
    for (const auto& [key, count] : h.counts) {
        if (key == "0")
            n0 = count;
        else if (key == "1")
            n1 = count;
        else
            throw std::invalid_argument("qu2cl: not a one-bit histogram");
    }
    if (n0 == n1) throw std::runtime_error("qu2cl: indeterminate bit (majority tie)");
    return n1 > n0 ? 1 : 0;
}

struct MultiOrbitReport {
    std::string received_bits;
    std::vector<std::vector<double>> per_bit_per_hop_f_ap;  // [bit][hop], length = hops
};

// Per message bit: Cl2Qu, then (hops-1) chained CBS teleport stages fed by a
// single source of hops-1 Bell pairs, then majority-vote Qu2Cl.
inline MultiOrbitReport multi_orbit_transmit(const std::string& bits, std::size_t hops,
                                             const NoiseModel& noise, std::uint64_t shots,
                                             Seed seed) {
    if (hops < 2) throw std::invalid_argument("multi_orbit_transmit: need at least 2 hops");
    if (bits.empty()) throw std::invalid_argument("multi_orbit_transmit: empty message");
    const std::size_t stages = hops - 1;

    MultiOrbitReport report;
    for (std::size_t bi = 0; bi < bits.size(); ++bi) {
        const char bc = bits[bi];
        if (bc != '0' && bc != '1')
            throw std::invalid_argument("multi_orbit_transmit: message must be binary");
        const int bit = bc - '0';
        const ProbabilityPair theory = bit ? ProbabilityPair{0.0, 1.0} : ProbabilityPair{1.0, 0.0};

        // full relay circuit: q0 carrier, stage i pair (1+2i, 2+2i)
        Circuit c(1 + 2 * stages, stages + 1);
        if (bit) c.add(CircuitOp::unitary(GateName::simple(GateKind::X), {0}));
        std::vector<std::vector<std::size_t>> sets;
        for (std::size_t i = 0; i < stages; ++i) sets.push_back({1 + 2 * i, 2 + 2 * i});
        detail::append_source(c, sets);
        std::size_t carrier = 0;
        for (std::size_t i = 0; i < stages; ++i) {
            append_cbs_stage(c, carrier, 1 + 2 * i, 2 + 2 * i, i);
            carrier = 2 + 2 * i;
        }
        c.add(CircuitOp::measure(carrier, stages));
        const Histogram hist = run_shots(c, shots, Seed{seed.value + bi}, noise);
        report.received_bits.push_back(
            static_cast<char>('0' + qu2cl(detail::histogram_marginal(hist, stages))));

        // per-hop fidelity: hop 1 is the Cl2Qu uplink, hops 2.. are stages
        std::vector<double> hop_f_ap;
        for (std::size_t h = 0; h <= stages; ++h) {
            Circuit t(1 + 2 * stages, h + 1);
            if (bit) t.add(CircuitOp::unitary(GateName::simple(GateKind::X), {0}));
            detail::append_source(t, sets);
            std::size_t tc = 0;
            for (std::size_t i = 0; i < h; ++i) {
                append_cbs_stage(t, tc, 1 + 2 * i, 2 + 2 * i, i);
                tc = 2 + 2 * i;
            }
            t.add(CircuitOp::measure(tc, h));
            const Histogram th = run_shots(t, shots, Seed{seed.value + bi}, noise);
            hop_f_ap.push_back(
                f_ap(theory, histogram_to_pair(detail::histogram_marginal(th, h))));
        }
        report.per_bit_per_hop_f_ap.push_back(std::move(hop_f_ap));
    }
    return report;
}

}  // namespace qfte
