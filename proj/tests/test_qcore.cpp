#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qfte/gates.hpp"
#include "qfte/qcore.hpp"
#include "test_util.hpp"

using namespace qfte;
using test::max_diff;

TEST_CASE("kron: identity and basis-column cases") {
    const DenseMatrix i2 = DenseMatrix::identity(2);
    CHECK(max_diff(kron(i2, i2), DenseMatrix::identity(4)) == 0.0);

    // kron(X, I2) maps |00> to |10>
    std::vector<cplx> e0{1, 0, 0, 0};
    const auto out = kron(pauli_x(), i2) * e0;
    CHECK(max_diff(out, {0, 0, 1, 0}) == 0.0);

    CHECK_THROWS_AS((void)kron(DenseMatrix(), i2), std::invalid_argument);
}

TEST_CASE("kron: (I2 x QFT2 x I2) e0 has amplitude 1/2 at indices 0,2,4,6") {
    const DenseMatrix i2 = DenseMatrix::identity(2);
    const DenseMatrix embed = kron(i2, kron(qft_matrix(2), i2));
    std::vector<cplx> e0(16);
    e0[0] = 1.0;
    const auto v = embed * e0;
    for (std::size_t k = 0; k < 16; ++k) {
        const cplx want = (k < 8 && k % 2 == 0) ? cplx{0.5} : cplx{};
        CHECK(std::abs(v[k] - want) < kExactTol);
    }
}

TEST_CASE("dagger: Hadamard, Z^1/4, and involution on random matrices") {
    CHECK(max_diff(dagger(hadamard()), hadamard()) < kExactTol);

    const DenseMatrix zq = dagger(gate_matrix(GateName::simple(GateKind::Z_POW_QUARTER)));
    CHECK(std::abs(zq(0, 0) - cplx{1.0}) < 5e-5);
    CHECK(std::abs(zq(1, 1) - cplx{0.7071, -0.7071}) < 5e-5);
    CHECK(std::abs(zq(0, 1)) == 0.0);

    std::mt19937 rng(7);
    for (int i = 0; i < 10; ++i) {
        DenseMatrix a(3, 5);
        std::normal_distribution<double> gauss;
        for (auto& e : a.data()) e = cplx{gauss(rng), gauss(rng)};
        CHECK(max_diff(dagger(dagger(a)), a) == 0.0);
    }
}

TEST_CASE("is_unitary: CNOT and QFT2 pass, scaled identity fails") {
    CHECK(is_unitary(gate_matrix(GateName::simple(GateKind::CNOT)), 1e-10));
    CHECK(is_unitary(qft_matrix(2), 1e-10));

    DenseMatrix half = DenseMatrix::identity(2);
    for (auto& e : half.data()) e *= 0.5;
    CHECK_FALSE(is_unitary(half, 1e-10));

    CHECK_THROWS_AS((void)is_unitary(DenseMatrix(2, 3), 1e-10), std::invalid_argument);
}

TEST_CASE("apply_unitary: X on qubit 0 of |00> gives |10>") {
    StateVector s(2);
    const auto out = apply_unitary(s, pauli_x(), {0});
    CHECK(std::abs(out[2] - cplx{1.0}) < kExactTol);
    CHECK(std::abs(out[0]) < kExactTol);
}

TEST_CASE("apply_unitary: Fig. 2(b) pipeline reproduces the printed vectors") {
    StateVector s(4);
    apply_unitary_inplace(s, qft_matrix(2), {1, 2});
    for (std::size_t k = 0; k < 16; ++k) {
        const cplx want = (k < 8 && k % 2 == 0) ? cplx{0.5} : cplx{};
        CHECK(std::abs(s[k] - want) < kExactTol);
    }
    apply_unitary_inplace(s, gate_matrix(GateName::simple(GateKind::CNOT_FLIPPED)), {0, 1});
    apply_unitary_inplace(s, gate_matrix(GateName::simple(GateKind::CNOT)), {2, 3});
    for (std::size_t k = 0; k < 16; ++k) {
        const bool hit = k == 0 || k == 3 || k == 12 || k == 15;
        CHECK(std::abs(s[k] - (hit ? cplx{0.5} : cplx{})) < kExactTol);
    }

    // final state is |beta00> x |beta00>
    const double r = 1.0 / std::sqrt(2.0);
    const DenseMatrix bell(4, 1);
    std::vector<cplx> bell_vec{r, 0, 0, r};
    std::vector<cplx> product(16);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) product[i * 4 + j] = bell_vec[i] * bell_vec[j];
    CHECK(max_diff(s.amplitudes(), product) < kExactTol);
}

TEST_CASE("apply_unitary: error paths") {
    StateVector s(2);
    CHECK_THROWS_AS((void)apply_unitary(s, pauli_x(), {2}), std::invalid_argument);
    CHECK_THROWS_AS((void)apply_unitary(s, gate_matrix(GateName::simple(GateKind::CNOT)), {0, 0}),
                    std::invalid_argument);
    DenseMatrix bad = DenseMatrix::identity(2);
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS((void)apply_unitary(s, bad, {0}), std::invalid_argument);
    CHECK_THROWS_AS((void)apply_unitary(s, pauli_x(), {0, 1}), std::invalid_argument);
}

TEST_CASE("property: apply_unitary preserves norm for catalog gates") {
    std::mt19937 rng(11);
    const GateName gates[] = {
        GateName::simple(GateKind::H),          GateName::simple(GateKind::X),
        GateName::simple(GateKind::Z),          GateName::simple(GateKind::CNOT),
        GateName::simple(GateKind::SWAP),       GateName::simple(GateKind::X_POW_QUARTER),
        GateName::simple(GateKind::Z_POW_QUARTER), GateName::qft(2),
    };
    for (const auto& g : gates) {
        StateVector s = test::random_state(rng, 3);
        std::vector<std::size_t> targets;
        for (std::size_t q = 0; targets.size() < gate_arity(g); ++q) targets.push_back(q);
        const auto out = apply_unitary(s, gate_matrix(g), targets);
        CHECK(std::abs(out.norm() - 1.0) < kNormTol);
    }
}

TEST_CASE("property: kron mixed-product identity on random unitaries") {
    std::mt19937 rng(13);
    for (int i = 0; i < 8; ++i) {
        const DenseMatrix a = test::random_unitary(rng, 2);
        const DenseMatrix b = test::random_unitary(rng, 4);
        const DenseMatrix c = test::random_unitary(rng, 2);
        const DenseMatrix d = test::random_unitary(rng, 4);
        CHECK(max_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)) < 1e-10);
    }
}

TEST_CASE("oracle: index-arithmetic application equals explicit embedding, n <= 4") {
    std::mt19937 rng(17);
    for (std::size_t n = 1; n <= 4; ++n) {
        for (int rep = 0; rep < 12; ++rep) {
            const std::size_t k = 1 + static_cast<std::size_t>(rng() % std::min<std::size_t>(n, 2));
            std::vector<std::size_t> targets;
            while (targets.size() < k) {
                const std::size_t q = rng() % n;
                if (std::find(targets.begin(), targets.end(), q) == targets.end())
                    targets.push_back(q);
            }
            const DenseMatrix u = test::random_unitary(rng, std::size_t{1} << k);
            const StateVector s = test::random_state(rng, n);

            const StateVector fast = apply_unitary(s, u, targets);
            const DenseMatrix full = embed_unitary(n, u, targets);
            const StateVector slow(n, full * s.amplitudes());
            CHECK(max_diff(fast.amplitudes(), slow.amplitudes()) < 1e-12);
        }
    }
}
