// Core complex linear algebra and state-vector primitives.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfte {

using cplx = std::complex<double>;

inline constexpr const char* kVersion = "1.0.0";

inline constexpr double kNormTol = 1e-10;      // unitarity / norm checks
inline constexpr double kExactTol = 1e-12;     // analytic identities

// Dense row-major complex matrix. Small by design: the largest matrices in
// this library are full-register embeddings used as test oracles.
class DenseMatrix {
public:
    DenseMatrix() : rows_(0), cols_(0) {}
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<cplx>& data() const { return data_; }
    std::vector<cplx>& data() { return data_; }

private:
    std::size_t rows_, cols_;
    std::vector<cplx> data_;
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matrix product: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline std::vector<cplx> operator*(const DenseMatrix& a, const std::vector<cplx>& v) {
    if (a.cols() != v.size())
        throw std::invalid_argument("matrix-vector product: dimension mismatch");
    std::vector<cplx> out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx acc{};
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() == 0 || b.rows() == 0)
        throw std::invalid_argument("kron: empty operand");
    DenseMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

inline DenseMatrix dagger(const DenseMatrix& a) {
    DenseMatrix c(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = std::conj(a(i, j));
    return c;
}

// max-norm of (a†a - I)
inline double unitarity_defect(const DenseMatrix& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("is_unitary: matrix must be square");
    const DenseMatrix p = dagger(a) * a;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double d = std::abs(p(i, j) - (i == j ? cplx{1.0} : cplx{}));
            worst = std::max(worst, d);
        }
    return worst;
}

inline bool is_unitary(const DenseMatrix& a, double tol = kNormTol) {
    return unitarity_defect(a) <= tol;
}

// Pure n-qubit register state. Amplitude index k uses qubit 0 as the MOST
// significant bit of k; this is the convention under which the source
// circuit produces its amplitudes at the documented indices.
class StateVector {
public:
    explicit StateVector(std::size_t n_qubits)
        : n_qubits_(n_qubits), amps_(std::size_t{1} << n_qubits) {
        amps_[0] = 1.0;
    }

    StateVector(std::size_t n_qubits, std::vector<cplx> amps)
        : n_qubits_(n_qubits), amps_(std::move(amps)) {
        if (amps_.size() != (std::size_t{1} << n_qubits))
            throw std::invalid_argument("StateVector: amplitude count != 2^n");
    }

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    std::vector<cplx>& amplitudes() { return amps_; }
    cplx operator[](std::size_t k) const { return amps_[k]; }

    double norm() const {
        double s = 0.0;
        for (const cplx& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

private:
    std::size_t n_qubits_;
    std::vector<cplx> amps_;
};

namespace detail {

// Bit position of qubit q inside an amplitude index (qubit 0 = MSB).
inline std::size_t qubit_shift(std::size_t n_qubits, std::size_t q) {
    return n_qubits - 1 - q;
}

inline void check_targets(std::size_t n_qubits, const std::vector<std::size_t>& targets) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= n_qubits)
            throw std::invalid_argument("apply_unitary: target qubit out of range");
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i] == targets[j])
                throw std::invalid_argument("apply_unitary: duplicate target qubit");
    }
}

}  // namespace detail

// In-place gate application by index arithmetic over the target bits.
// targets[0] is the most significant qubit of u's own index space.
inline void apply_unitary_inplace(StateVector& s, const DenseMatrix& u,
                                  const std::vector<std::size_t>& targets,
                                  bool check_unitarity = true) {
    const std::size_t k = targets.size();
    const std::size_t du = std::size_t{1} << k;
    if (u.rows() != du || u.cols() != du)
        throw std::invalid_argument("apply_unitary: gate dimension != 2^|targets|");
    detail::check_targets(s.n_qubits(), targets);
    if (check_unitarity && !is_unitary(u))
        throw std::invalid_argument("apply_unitary: matrix is not unitary");

    std::vector<std::size_t> shifts(k);
    for (std::size_t i = 0; i < k; ++i)
        shifts[i] = detail::qubit_shift(s.n_qubits(), targets[i]);

    std::size_t target_mask = 0;
    for (std::size_t sh : shifts) target_mask |= std::size_t{1} << sh;

    auto& amps = s.amplitudes();
    const std::size_t dim = amps.size();
    std::vector<cplx> gathered(du), mixed(du);
    std::vector<std::size_t> offsets(du);
    for (std::size_t g = 0; g < du; ++g) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (g & (std::size_t{1} << (k - 1 - i))) off |= std::size_t{1} << shifts[i];
        offsets[g] = off;
    }

    for (std::size_t base = 0; base < dim; ++base) {
        if (base & target_mask) continue;  // only iterate target-bits-zero bases
        for (std::size_t g = 0; g < du; ++g) gathered[g] = amps[base | offsets[g]];
        for (std::size_t r = 0; r < du; ++r) {
            cplx acc{};
            for (std::size_t c = 0; c < du; ++c) acc += u(r, c) * gathered[c];
            mixed[r] = acc;
        }
        for (std::size_t g = 0; g < du; ++g) amps[base | offsets[g]] = mixed[g];
    }
}

inline StateVector apply_unitary(const StateVector& s, const DenseMatrix& u,
                                 const std::vector<std::size_t>& targets) {
    StateVector out = s;
    apply_unitary_inplace(out, u, targets);
    return out;
}

// Explicit full-register embedding of u on the given targets, built through
// kron with identity and a basis permutation. Oracle path for small n.
inline DenseMatrix embed_unitary(std::size_t n_qubits, const DenseMatrix& u,
                                 const std::vector<std::size_t>& targets) {
    const std::size_t k = targets.size();
    if (u.rows() != (std::size_t{1} << k))
        throw std::invalid_argument("embed_unitary: gate dimension != 2^|targets|");
    detail::check_targets(n_qubits, targets);

    const std::size_t dim = std::size_t{1} << n_qubits;
    const DenseMatrix big = kron(u, DenseMatrix::identity(dim >> k));

    // Permutation sending register order to (targets..., remaining qubits...).
    std::vector<std::size_t> order(targets);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        bool is_target = false;
        for (std::size_t t : targets) is_target |= (t == q);
        if (!is_target) order.push_back(q);
    }
    std::vector<std::size_t> perm(dim);  // permuted index -> register index
    for (std::size_t x = 0; x < dim; ++x) {
        std::size_t reg = 0;
        for (std::size_t i = 0; i < n_qubits; ++i)
            if (x & (std::size_t{1} << (n_qubits - 1 - i)))
                reg |= std::size_t{1} << detail::qubit_shift(n_qubits, order[i]);
        perm[x] = reg;
    }
    DenseMatrix out(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) out(perm[r], perm[c]) = big(r, c);
    return out;
}

}  // namespace qfte
