// Evaluation framework: tomography diagonals, histogram normalization, the
// three platform fidelities (F_RP, F_TP, F_AP), and Uhlmann fidelity.
#pragma once

#include <algorithm>
#include <optional>

#include <nlohmann/json.hpp>

#include "qfte/density.hpp"
#include "qfte/engine.hpp"

namespace qfte {

struct ProbabilityPair {
    double p0 = 1.0;
    double p1 = 0.0;

    void validate(double tol = 1e-6) const {
        if (p0 < -1e-9 || p0 > 1.0 + 1e-9 || p1 < -1e-9 || p1 > 1.0 + 1e-9 ||
            std::abs(p0 + p1 - 1.0) > tol)
            throw std::invalid_argument("ProbabilityPair: entries must be probabilities summing to 1");
    }
};

struct FidelityReport {
    double f_rp = 1.0;
    double f_tp = 1.0;
    double f_ap = 1.0;
    std::optional<double> f_uhlmann;
};

inline nlohmann::json to_json(const FidelityReport& r) {
    nlohmann::json j{{"f_rp", r.f_rp}, {"f_tp", r.f_tp}, {"f_ap", r.f_ap}};
    if (r.f_uhlmann) j["f_uhlmann"] = *r.f_uhlmann;
    return j;
}

inline ProbabilityPair diag_of(const DensityMatrix& rho) {
    if (rho.dim() != 2)
        throw std::invalid_argument("diag_of: expected a single-qubit density matrix");
    const double p0 = rho(0, 0).real();
    const double p1 = rho(1, 1).real();
    if (p0 < -1e-9 || p0 > 1.0 + 1e-9 || p1 < -1e-9 || p1 > 1.0 + 1e-9)
        throw std::invalid_argument("diag_of: diagonal outside [0,1]");
    return {p0, p1};
}

inline ProbabilityPair diag_of(const StateVector& s) {
    return diag_of(DensityMatrix::from_state(s));
}

inline ProbabilityPair histogram_to_pair(const Histogram& h) {
    if (h.shots == 0) throw std::invalid_argument("histogram_to_pair: zero shots");
    std::uint64_t n0 = 0, n1 = 0;
    for (const auto& [key, count] : h.counts) {
        if (key == "0")
            n0 = count;
        else if (key == "1")
            n1 = count;
        else
            throw std::invalid_argument("histogram_to_pair: key '" + key +
                                        "' is not a one-bit outcome");
    }
    return {static_cast<double>(n0) / static_cast<double>(h.shots),
            static_cast<double>(n1) / static_cast<double>(h.shots)};
}

inline ProbabilityPair distribution_to_pair(const std::map<std::string, double>& dist) {
    ProbabilityPair p{0.0, 0.0};
    for (const auto& [key, prob] : dist) {
        if (key == "0")
            p.p0 = prob;
        else if (key == "1")
            p.p1 = prob;
        else
            throw std::invalid_argument("distribution_to_pair: not a one-bit distribution");
    }
    return p;
}

namespace detail {

// Shared shape of the three platform fidelities: the numerator compares the
// two p0 values, the denominator is the max of the reference pair. Values
// are clamped into [0,1]; the raw formula does not guarantee the range.
inline double platform_fidelity(const ProbabilityPair& numerator_lhs,
                                const ProbabilityPair& numerator_rhs,
                                const ProbabilityPair& denominator) {
    const double f = 1.0 - std::abs(numerator_lhs.p0 - numerator_rhs.p0) /
                               std::max(denominator.p0, denominator.p1);
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace detail

inline double f_rp(const ProbabilityPair& theory, const ProbabilityPair& alice_est) {
    return detail::platform_fidelity(theory, alice_est, theory);
}

inline double f_tp(const ProbabilityPair& alice_est, const ProbabilityPair& bob_est) {
    return detail::platform_fidelity(alice_est, bob_est, alice_est);
}

inline double f_ap(const ProbabilityPair& theory, const ProbabilityPair& bob_est) {
    return detail::platform_fidelity(theory, bob_est, theory);
}

inline double uhlmann(const DensityMatrix& rho_t, const DensityMatrix& rho_e) {
    if (rho_t.dim() != rho_e.dim())
        throw std::invalid_argument("uhlmann: dimension mismatch");
    const DenseMatrix root = hermitian_sqrt(rho_t.matrix());
    const DenseMatrix inner = root * rho_e.matrix() * root;
    double trace = 0.0;
    for (double lam : hermitian_eigenvalues(inner)) {
        if (lam < -1e-8)
            throw std::invalid_argument("uhlmann: inputs not PSD within tolerance");
        trace += std::sqrt(std::max(lam, 0.0));
    }
    return std::clamp(trace * trace, 0.0, 1.0);
}

}  // namespace qfte
