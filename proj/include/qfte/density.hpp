// Density matrices, partial trace, and entropy-based independence measures.
#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qfte/qcore.hpp"

namespace qfte {

class DensityMatrix {
public:
    DensityMatrix(std::size_t n_qubits, DenseMatrix entries)
        : n_qubits_(n_qubits), m_(std::move(entries)) {
        const std::size_t dim = std::size_t{1} << n_qubits;
        if (m_.rows() != dim || m_.cols() != dim)
            throw std::invalid_argument("DensityMatrix: entries must be 2^n x 2^n");
    }

    static DensityMatrix from_state(const StateVector& s) {
        const auto& a = s.amplitudes();
        DenseMatrix m(a.size(), a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = a[i] * std::conj(a[j]);
        return DensityMatrix(s.n_qubits(), std::move(m));
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return m_.rows(); }
    const DenseMatrix& matrix() const { return m_; }
    DenseMatrix& matrix() { return m_; }
    cplx operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

    double trace_real() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i).real();
        return t;
    }

private:
    std::size_t n_qubits_;
    DenseMatrix m_;
};

namespace detail {

inline Eigen::MatrixXcd to_eigen(const DenseMatrix& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline DenseMatrix from_eigen(const Eigen::MatrixXcd& e) {
    DenseMatrix m(e.rows(), e.cols());
    for (Eigen::Index i = 0; i < e.rows(); ++i)
        for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
}

}  // namespace detail

inline std::vector<double> hermitian_eigenvalues(const DenseMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(detail::to_eigen(m),
                                                           Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Principal square root of a Hermitian PSD matrix; eigenvalues clamped at 0.
inline DenseMatrix hermitian_sqrt(const DenseMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(detail::to_eigen(m));
    Eigen::VectorXd ev = solver.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
    const Eigen::MatrixXcd v = solver.eigenvectors();
    return detail::from_eigen(v * ev.asDiagonal() * v.adjoint());
}

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    detail::check_targets(rho.n_qubits(), keep);

    const std::size_t n = rho.n_qubits();
    const std::size_t nk = keep.size();
    std::vector<std::size_t> keep_shift(nk);
    for (std::size_t i = 0; i < nk; ++i) keep_shift[i] = detail::qubit_shift(n, keep[i]);

    std::vector<std::size_t> traced_shift;
    for (std::size_t q = 0; q < n; ++q) {
        if (std::find(keep.begin(), keep.end(), q) == keep.end())
            traced_shift.push_back(detail::qubit_shift(n, q));
    }

    const std::size_t dk = std::size_t{1} << nk;
    const std::size_t dt = std::size_t{1} << traced_shift.size();

    auto expand = [](std::size_t bits, const std::vector<std::size_t>& shifts,
                     std::size_t count) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < count; ++i)
            if (bits & (std::size_t{1} << (count - 1 - i)))
                idx |= std::size_t{1} << shifts[i];
        return idx;
    };

    DenseMatrix out(dk, dk);
    for (std::size_t r = 0; r < dk; ++r) {
        const std::size_t ri = expand(r, keep_shift, nk);
        for (std::size_t c = 0; c < dk; ++c) {
            const std::size_t ci = expand(c, keep_shift, nk);
            cplx acc{};
            for (std::size_t e = 0; e < dt; ++e) {
                const std::size_t ei = expand(e, traced_shift, traced_shift.size());
                acc += rho(ri | ei, ci | ei);
            }
            out(r, c) = acc;
        }
    }
    return DensityMatrix(nk, std::move(out));
}

// Reduced density matrix of a pure state without materializing |ψ⟩⟨ψ|.
inline DensityMatrix reduced_from_state(const StateVector& s,
                                        const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw std::invalid_argument("reduced_from_state: keep set is empty");
    detail::check_targets(s.n_qubits(), keep);

    const std::size_t n = s.n_qubits();
    const std::size_t nk = keep.size();
    std::vector<std::size_t> keep_shift(nk);
    for (std::size_t i = 0; i < nk; ++i) keep_shift[i] = detail::qubit_shift(n, keep[i]);
    std::size_t keep_mask = 0;
    for (std::size_t sh : keep_shift) keep_mask |= std::size_t{1} << sh;

    const std::size_t dk = std::size_t{1} << nk;
    auto compress = [&](std::size_t idx) {
        std::size_t r = 0;
        for (std::size_t i = 0; i < nk; ++i)
            if (idx & (std::size_t{1} << keep_shift[i])) r |= std::size_t{1} << (nk - 1 - i);
        return r;
    };

    DenseMatrix out(dk, dk);
    const auto& amps = s.amplitudes();
    // group amplitudes by the traced-out bits
    std::vector<std::vector<std::pair<std::size_t, cplx>>> groups;
    std::map<std::size_t, std::size_t> env_index;
    for (std::size_t k = 0; k < amps.size(); ++k) {
        if (amps[k] == cplx{}) continue;
        const std::size_t env = k & ~keep_mask;
        auto [it, inserted] = env_index.try_emplace(env, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].emplace_back(compress(k), amps[k]);
    }
    for (const auto& g : groups)
        for (const auto& [r, ar] : g)
            for (const auto& [c, ac] : g) out(r, c) += ar * std::conj(ac);
    return DensityMatrix(nk, std::move(out));
}

// −Σ λ log₂ λ; eigenvalues ≤ 1e-12 contribute nothing.
inline double von_neumann_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double lam : hermitian_eigenvalues(rho.matrix()))
        if (lam > 1e-12) s -= lam * std::log2(lam);
    return s;
}

namespace detail {

inline void check_mi_sets(const std::vector<std::size_t>& a,
                          const std::vector<std::size_t>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mutual_information: empty qubit set");
    for (std::size_t qa : a)
        for (std::size_t qb : b)
            if (qa == qb)
                throw std::invalid_argument("mutual_information: overlapping qubit sets");
}

}  // namespace detail

inline double mutual_information(const DensityMatrix& rho,
                                 const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
    detail::check_mi_sets(a, b);
    std::vector<std::size_t> ab(a);
    ab.insert(ab.end(), b.begin(), b.end());
    return von_neumann_entropy(partial_trace(rho, a)) +
           von_neumann_entropy(partial_trace(rho, b)) -
           von_neumann_entropy(partial_trace(rho, ab));
}

// Pure-state form; scales to registers too large for the full density matrix.
inline double mutual_information(const StateVector& s,
                                 const std::vector<std::size_t>& a,
                                 const std::vector<std::size_t>& b) {
    detail::check_mi_sets(a, b);
    std::vector<std::size_t> ab(a);
    ab.insert(ab.end(), b.begin(), b.end());
    return von_neumann_entropy(reduced_from_state(s, a)) +
           von_neumann_entropy(reduced_from_state(s, b)) -
           von_neumann_entropy(reduced_from_state(s, ab));
}

}  // namespace qfte
