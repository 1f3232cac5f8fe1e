// Execution backends: pure state-vector, shot-sampled Pauli-noise
// trajectories, exact density-matrix, and the deferred-measurement rewrite.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qfte/circuit.hpp"
#include "qfte/density.hpp"
#include "qfte/gates.hpp"
#include "qfte/qcore.hpp"

namespace qfte {

// Independent per-qubit Pauli channel applied after every gate on the
// qubits that gate touches. Idle qubits and measurements are noise-free.
struct NoiseModel {
    double p_x = 0.0;
    double p_y = 0.0;
    double p_z = 0.0;

    void validate() const {
        auto in_range = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!in_range(p_x) || !in_range(p_y) || !in_range(p_z) || p_x + p_y + p_z > 1.0)
            throw std::invalid_argument("NoiseModel: probabilities must be in [0,1], sum <= 1");
    }

    bool trivial() const { return p_x == 0.0 && p_y == 0.0 && p_z == 0.0; }
};

struct Seed {
    std::uint64_t value = 0;
};

struct Histogram {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots = 0;
};

namespace detail {

// splitmix64; per-shot substreams are derived from (master seed, shot index)
// so results do not depend on shot execution order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class ShotRng {
public:
    ShotRng(std::uint64_t master_seed, std::uint64_t shot_index)
        : state_(master_seed ^ (0xd1342543de82ef95ULL * (shot_index + 1))) {
        splitmix64(state_);  // decorrelate nearby seeds
    }

    double uniform() {  // in [0, 1)
        return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

inline std::string cbits_to_key(const std::vector<int>& cbits) {
    std::string key(cbits.size(), '0');
    for (std::size_t i = 0; i < cbits.size(); ++i)
        if (cbits[i]) key[i] = '1';  // cbit 0 = most significant character
    return key;
}

}  // namespace detail

inline StateVector simulate_pure(const Circuit& c) {
    c.validate();
    if (c.has_measurements())
        throw std::invalid_argument("simulate_pure: measurement in pure backend");
    StateVector s(c.n_qubits);
    for (const auto& op : c.ops)
        apply_unitary_inplace(s, op.matrix(), op.targets, /*check_unitarity=*/false);
    return s;
}

namespace detail {

// Measurement collapse; the probability-0 branch is never sampled, and the
// renormalization guard keeps degenerate branches from dividing by ~0.
inline int measure_and_collapse(StateVector& s, std::size_t qubit, double draw) {
    const std::size_t shift = qubit_shift(s.n_qubits(), qubit);
    const std::size_t bit = std::size_t{1} << shift;
    auto& amps = s.amplitudes();
    double p1 = 0.0;
    for (std::size_t k = 0; k < amps.size(); ++k)
        if (k & bit) p1 += std::norm(amps[k]);
    const int outcome = (draw < p1) ? 1 : 0;
    const double p = outcome ? p1 : 1.0 - p1;
    const double scale = 1.0 / std::sqrt(std::max(p, 1e-15));
    for (std::size_t k = 0; k < amps.size(); ++k) {
        if (((k & bit) != 0) == (outcome == 1))
            amps[k] *= scale;
        else
            amps[k] = 0.0;
    }
    return outcome;
}

inline void apply_pauli_noise(StateVector& s, const std::vector<std::size_t>& touched,
                              const NoiseModel& noise, ShotRng& rng) {
    for (std::size_t q : touched) {
        const double u = rng.uniform();
        if (u < noise.p_x)
            apply_unitary_inplace(s, pauli_x(), {q}, false);
        else if (u < noise.p_x + noise.p_y)
            apply_unitary_inplace(s, pauli_y(), {q}, false);
        else if (u < noise.p_x + noise.p_y + noise.p_z)
            apply_unitary_inplace(s, pauli_z(), {q}, false);
    }
}

}  // namespace detail

inline Histogram run_shots(const Circuit& c, std::uint64_t shots, Seed seed,
                           const NoiseModel& noise = {}) {
    c.validate();
    noise.validate();
    if (shots == 0) throw std::invalid_argument("run_shots: shots must be positive");

    Histogram hist;
    hist.shots = shots;
    for (std::uint64_t shot = 0; shot < shots; ++shot) {
        detail::ShotRng rng(seed.value, shot);
        StateVector s(c.n_qubits);
        std::vector<int> cbits(c.n_cbits, 0);
        for (const auto& op : c.ops) {
            switch (op.kind) {
                case CircuitOp::Kind::Unitary:
                    apply_unitary_inplace(s, op.matrix(), op.targets, false);
                    detail::apply_pauli_noise(s, op.targets, noise, rng);
                    break;
                case CircuitOp::Kind::Measure:
                    cbits[op.cbit] = detail::measure_and_collapse(s, op.targets[0], rng.uniform());
                    break;
                case CircuitOp::Kind::ClassicallyControlled:
                    if (cbits[op.cbit]) {
                        apply_unitary_inplace(s, op.matrix(), op.targets, false);
                        detail::apply_pauli_noise(s, op.targets, noise, rng);
                    }
                    break;
            }
        }
        ++hist.counts[detail::cbits_to_key(cbits)];
    }
    return hist;
}

// --- exact density-matrix backend -------------------------------------------

struct ExactResult {
    std::map<std::string, double> distribution;  // over classical-bit strings
    DensityMatrix final_state;                   // mixture over all branches
};

namespace detail {

// rho -> U rho U† by index arithmetic on both sides.
inline void apply_to_density(DenseMatrix& rho, const DenseMatrix& u,
                             const std::vector<std::size_t>& targets, std::size_t n_qubits) {
    const std::size_t k = targets.size();
    const std::size_t du = std::size_t{1} << k;
    const std::size_t dim = rho.rows();

    std::vector<std::size_t> offsets(du);
    std::size_t target_mask = 0;
    for (std::size_t g = 0; g < du; ++g) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (g & (std::size_t{1} << (k - 1 - i)))
                off |= std::size_t{1} << qubit_shift(n_qubits, targets[i]);
        offsets[g] = off;
    }
    for (std::size_t i = 0; i < k; ++i)
        target_mask |= std::size_t{1} << qubit_shift(n_qubits, targets[i]);

    std::vector<cplx> gathered(du), mixed(du);
    // left: columns of rho are states
    for (std::size_t col = 0; col < dim; ++col)
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & target_mask) continue;
            for (std::size_t g = 0; g < du; ++g) gathered[g] = rho(base | offsets[g], col);
            for (std::size_t r = 0; r < du; ++r) {
                cplx acc{};
                for (std::size_t cc = 0; cc < du; ++cc) acc += u(r, cc) * gathered[cc];
                mixed[r] = acc;
            }
            for (std::size_t g = 0; g < du; ++g) rho(base | offsets[g], col) = mixed[g];
        }
    // right: multiply by U† along rows
    for (std::size_t row = 0; row < dim; ++row)
        for (std::size_t base = 0; base < dim; ++base) {
            if (base & target_mask) continue;
            for (std::size_t g = 0; g < du; ++g) gathered[g] = rho(row, base | offsets[g]);
            for (std::size_t r = 0; r < du; ++r) {
                cplx acc{};
                for (std::size_t cc = 0; cc < du; ++cc)
                    acc += gathered[cc] * std::conj(u(r, cc));
                mixed[r] = acc;
            }
            for (std::size_t g = 0; g < du; ++g) rho(row, base | offsets[g]) = mixed[g];
        }
}

inline void apply_channel_to_density(DenseMatrix& rho, const NoiseModel& noise,
                                     const std::vector<std::size_t>& touched,
                                     std::size_t n_qubits) {
    if (noise.trivial()) return;
    for (std::size_t q : touched) {
        const double p_id = 1.0 - noise.p_x - noise.p_y - noise.p_z;
        DenseMatrix mixed(rho.rows(), rho.cols());
        for (std::size_t i = 0; i < rho.rows(); ++i)
            for (std::size_t j = 0; j < rho.cols(); ++j) mixed(i, j) = p_id * rho(i, j);
        const std::pair<double, DenseMatrix> terms[] = {
            {noise.p_x, pauli_x()}, {noise.p_y, pauli_y()}, {noise.p_z, pauli_z()}};
        for (const auto& [p, g] : terms) {
            if (p == 0.0) continue;
            DenseMatrix branch = rho;
            apply_to_density(branch, g, {q}, n_qubits);
            for (std::size_t i = 0; i < rho.rows(); ++i)
                for (std::size_t j = 0; j < rho.cols(); ++j)
                    mixed(i, j) += p * branch(i, j);
        }
        rho = std::move(mixed);
    }
}

struct ExactBranch {
    double weight;
    std::vector<int> cbits;
    DenseMatrix rho;
};

}  // namespace detail

inline ExactResult run_exact(const Circuit& c, const NoiseModel& noise = {}) {
    c.validate();
    noise.validate();
    if (c.n_qubits > 10)
        throw std::invalid_argument("run_exact: register too large for the exact backend");

    const std::size_t dim = std::size_t{1} << c.n_qubits;
    DenseMatrix rho0(dim, dim);
    rho0(0, 0) = 1.0;
    std::vector<detail::ExactBranch> branches;
    branches.push_back({1.0, std::vector<int>(c.n_cbits, 0), std::move(rho0)});

    for (const auto& op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::Unitary: {
                const DenseMatrix u = op.matrix();
                for (auto& b : branches) {
                    detail::apply_to_density(b.rho, u, op.targets, c.n_qubits);
                    detail::apply_channel_to_density(b.rho, noise, op.targets, c.n_qubits);
                }
                break;
            }
            case CircuitOp::Kind::ClassicallyControlled: {
                const DenseMatrix u = op.matrix();
                for (auto& b : branches) {
                    if (!b.cbits[op.cbit]) continue;
                    detail::apply_to_density(b.rho, u, op.targets, c.n_qubits);
                    detail::apply_channel_to_density(b.rho, noise, op.targets, c.n_qubits);
                }
                break;
            }
            case CircuitOp::Kind::Measure: {
                const std::size_t bit =
                    std::size_t{1} << detail::qubit_shift(c.n_qubits, op.targets[0]);
                std::vector<detail::ExactBranch> next;
                next.reserve(branches.size() * 2);
                for (auto& b : branches) {
                    for (int outcome : {0, 1}) {
                        DenseMatrix proj(dim, dim);
                        double p = 0.0;
                        for (std::size_t i = 0; i < dim; ++i) {
                            if (((i & bit) != 0) != (outcome == 1)) continue;
                            for (std::size_t j = 0; j < dim; ++j)
                                if (((j & bit) != 0) == (outcome == 1))
                                    proj(i, j) = b.rho(i, j);
                            p += b.rho(i, i).real();
                        }
                        if (p < 1e-15) continue;
                        const double inv = 1.0 / p;
                        for (auto& e : proj.data()) e *= inv;
                        auto cbits = b.cbits;
                        cbits[op.cbit] = outcome;
                        next.push_back({b.weight * p, std::move(cbits), std::move(proj)});
                    }
                }
                branches = std::move(next);
                break;
            }
        }
    }

    ExactResult result{.distribution = {},
                       .final_state = DensityMatrix(c.n_qubits, DenseMatrix(dim, dim))};
    for (const auto& b : branches) {
        result.distribution[detail::cbits_to_key(b.cbits)] += b.weight;
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                result.final_state.matrix()(i, j) += b.weight * b.rho(i, j);
    }
    return result;
}

// Marginal distribution of one classical bit from an exact distribution.
inline std::map<std::string, double> marginal(const std::map<std::string, double>& dist,
                                              std::size_t cbit) {
    std::map<std::string, double> out;
    for (const auto& [key, p] : dist) out[std::string(1, key.at(cbit))] += p;
    return out;
}

// --- noiseless exact backend over pure-state branches -------------------------
//
// Enumerates every measurement outcome instead of sampling, so it scales past
// the density-matrix qubit limit for circuits with few measurements.

struct PureBranch {
    double weight;
    std::vector<int> cbits;
    StateVector state;
};

struct ExactPureResult {
    std::map<std::string, double> distribution;
    std::vector<PureBranch> branches;

    DensityMatrix reduced(const std::vector<std::size_t>& keep) const {
        if (branches.empty()) throw std::logic_error("ExactPureResult: no branches");
        const std::size_t dk = std::size_t{1} << keep.size();
        DenseMatrix acc(dk, dk);
        for (const auto& b : branches) {
            const DensityMatrix part = reduced_from_state(b.state, keep);
            for (std::size_t i = 0; i < dk; ++i)
                for (std::size_t j = 0; j < dk; ++j) acc(i, j) += b.weight * part(i, j);
        }
        return DensityMatrix(keep.size(), std::move(acc));
    }
};

inline ExactPureResult run_exact_pure(const Circuit& c) {
    c.validate();
    std::vector<PureBranch> branches;
    branches.push_back({1.0, std::vector<int>(c.n_cbits, 0), StateVector(c.n_qubits)});

    for (const auto& op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::Unitary: {
                const DenseMatrix u = op.matrix();
                for (auto& b : branches)
                    apply_unitary_inplace(b.state, u, op.targets, false);
                break;
            }
            case CircuitOp::Kind::ClassicallyControlled: {
                const DenseMatrix u = op.matrix();
                for (auto& b : branches)
                    if (b.cbits[op.cbit])
                        apply_unitary_inplace(b.state, u, op.targets, false);
                break;
            }
            case CircuitOp::Kind::Measure: {
                const std::size_t bit =
                    std::size_t{1} << detail::qubit_shift(c.n_qubits, op.targets[0]);
                std::vector<PureBranch> next;
                next.reserve(branches.size() * 2);
                for (auto& b : branches) {
                    const auto& amps = b.state.amplitudes();
                    double p1 = 0.0;
                    for (std::size_t k = 0; k < amps.size(); ++k)
                        if (k & bit) p1 += std::norm(amps[k]);
                    for (int outcome : {0, 1}) {
                        const double p = outcome ? p1 : 1.0 - p1;
                        if (p < 1e-15) continue;
                        StateVector collapsed = b.state;
                        const double scale = 1.0 / std::sqrt(p);
                        auto& ca = collapsed.amplitudes();
                        for (std::size_t k = 0; k < ca.size(); ++k) {
                            if (((k & bit) != 0) == (outcome == 1))
                                ca[k] *= scale;
                            else
                                ca[k] = 0.0;
                        }
                        auto cbits = b.cbits;
                        cbits[op.cbit] = outcome;
                        next.push_back({b.weight * p, std::move(cbits), std::move(collapsed)});
                    }
                }
                branches = std::move(next);
                break;
            }
        }
    }

    ExactPureResult result;
    for (const auto& b : branches)
        result.distribution[detail::cbits_to_key(b.cbits)] += b.weight;
    result.branches = std::move(branches);
    return result;
}

// --- deferred-measurement rewrite -------------------------------------------

// Rewrites every (Measure, ClassicallyControlled) pattern into a
// quantum-controlled gate; the affected measurements move to the end of the
// circuit, so the output has no mid-circuit classically-controlled ops.
inline Circuit defer_measurements(const Circuit& c) {
    std::vector<std::size_t> measured_qubit(c.n_cbits, SIZE_MAX);
    std::vector<bool> bit_is_control(c.n_cbits, false);
    for (const auto& op : c.ops) {
        if (op.kind == CircuitOp::Kind::Measure)
            measured_qubit[op.cbit] = op.targets[0];
        else if (op.kind == CircuitOp::Kind::ClassicallyControlled) {
            if (op.cbit >= c.n_cbits || measured_qubit[op.cbit] == SIZE_MAX)
                throw std::invalid_argument(
                    "defer_measurements: classical bit used in control but never measured");
            bit_is_control[op.cbit] = true;
        }
    }

    Circuit out(c.n_qubits, c.n_cbits);
    std::vector<CircuitOp> deferred;
    for (const auto& op : c.ops) {
        switch (op.kind) {
            case CircuitOp::Kind::Unitary:
                out.add(op);
                break;
            case CircuitOp::Kind::Measure:
                if (bit_is_control[op.cbit])
                    deferred.push_back(op);
                else
                    out.add(op);
                break;
            case CircuitOp::Kind::ClassicallyControlled:
                out.add(CircuitOp::unitary(GateName::controlled(op.gate->kind),
                                           {measured_qubit[op.cbit], op.targets[0]}));
                break;
        }
    }
    for (auto& op : deferred) out.add(std::move(op));
    out.validate();
    return out;
}

}  // namespace qfte
