#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qfte/engine.hpp"
#include "test_util.hpp"

using namespace qfte;
using test::max_diff;

namespace {

Circuit bell_circuit() {
    Circuit c(2, 2);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {0}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {0, 1}));
    c.add(CircuitOp::measure(0, 0));
    c.add(CircuitOp::measure(1, 1));
    return c;
}

// teleport of |1>: prep + Bell pair + BSM + corrections, then measure receiver
Circuit teleport_one_circuit() {
    Circuit c(3, 3);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::X), {0}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {1}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {1, 2}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {0, 1}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {0}));
    c.add(CircuitOp::measure(0, 0));
    c.add(CircuitOp::measure(1, 1));
    c.add(CircuitOp::classically_controlled(1, GateName::simple(GateKind::X), 2));
    c.add(CircuitOp::classically_controlled(0, GateName::simple(GateKind::Z), 2));
    c.add(CircuitOp::measure(2, 2));
    return c;
}

double dist_get(const std::map<std::string, double>& d, const std::string& k) {
    const auto it = d.find(k);
    return it == d.end() ? 0.0 : it->second;
}

}  // namespace

TEST_CASE("simulate_pure: H then CNOT yields the Bell state") {
    Circuit c(2, 0);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::H), {0}));
    c.add(CircuitOp::unitary(GateName::simple(GateKind::CNOT), {0, 1}));
    const StateVector s = simulate_pure(c);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(max_diff(s.amplitudes(), {r, 0, 0, r}) < kExactTol);

    CHECK_THROWS_AS((void)simulate_pure(bell_circuit()), std::invalid_argument);
}

TEST_CASE("run_shots: deterministic circuit gives a single-key histogram") {
    Circuit c(2, 2);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::X), {1}));
    c.add(CircuitOp::measure(0, 0));
    c.add(CircuitOp::measure(1, 1));
    const Histogram h = run_shots(c, 512, Seed{3});
    REQUIRE(h.counts.size() == 1);
    CHECK(h.counts.at("01") == 512);  // cbit 0 is the leftmost character
    CHECK(h.shots == 512);

    CHECK_THROWS_AS((void)run_shots(c, 0, Seed{3}), std::invalid_argument);
}

TEST_CASE("run_shots: Bell statistics sit within 5 sigma of 50/50") {
    const std::uint64_t shots = 8192;
    const Histogram h = run_shots(bell_circuit(), shots, Seed{42});
    std::uint64_t total = 0;
    for (const auto& [key, n] : h.counts) {
        CHECK((key == "00" || key == "11"));
        total += n;
    }
    CHECK(total == shots);
    const double sigma = std::sqrt(shots * 0.25);
    CHECK(std::abs(static_cast<double>(h.counts.at("00")) - shots * 0.5) < 5.0 * sigma);
}

TEST_CASE("run_shots: p_x = 1 noise flips a measured |0>") {
    Circuit c(1, 1);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::I), {0}));
    c.add(CircuitOp::measure(0, 0));
    const Histogram h = run_shots(c, 256, Seed{5}, NoiseModel{.p_x = 1.0});
    REQUIRE(h.counts.size() == 1);
    CHECK(h.counts.at("1") == 256);

    CHECK_THROWS_AS((void)run_shots(c, 16, Seed{5}, NoiseModel{.p_x = 0.7, .p_y = 0.7}),
                    std::invalid_argument);
}

TEST_CASE("run_shots: same seed reproduces the histogram bit for bit") {
    const Histogram a = run_shots(bell_circuit(), 2048, Seed{99}, NoiseModel{.p_x = 0.05});
    const Histogram b = run_shots(bell_circuit(), 2048, Seed{99}, NoiseModel{.p_x = 0.05});
    CHECK(a.counts == b.counts);

    const Histogram c = run_shots(bell_circuit(), 2048, Seed{100}, NoiseModel{.p_x = 0.05});
    CHECK(a.counts != c.counts);
}

TEST_CASE("run_shots: trivial noise model matches the noise-free path exactly") {
    const Histogram plain = run_shots(bell_circuit(), 1024, Seed{7});
    const Histogram zeroed = run_shots(bell_circuit(), 1024, Seed{7}, NoiseModel{0.0, 0.0, 0.0});
    CHECK(plain.counts == zeroed.counts);
}

TEST_CASE("run_exact: Bell distribution is exactly half and half") {
    const ExactResult r = run_exact(bell_circuit());
    CHECK(std::abs(dist_get(r.distribution, "00") - 0.5) < kExactTol);
    CHECK(std::abs(dist_get(r.distribution, "11") - 0.5) < kExactTol);
    CHECK(std::abs(dist_get(r.distribution, "01")) < kExactTol);
    CHECK(std::abs(r.final_state.trace_real() - 1.0) < kNormTol);
}

TEST_CASE("run_exact: teleporting |1> lands the receiver bit on 1") {
    const ExactResult r = run_exact(teleport_one_circuit());
    const auto m = marginal(r.distribution, 2);
    CHECK(std::abs(dist_get(m, "1") - 1.0) < 1e-9);
    // BSM outcomes stay uniform
    const auto m0 = marginal(r.distribution, 0);
    CHECK(std::abs(dist_get(m0, "0") - 0.5) < 1e-9);
}

TEST_CASE("run_exact: noise keeps the state trace-one and degrades determinism") {
    Circuit c(1, 1);
    c.add(CircuitOp::unitary(GateName::simple(GateKind::X), {0}));
    c.add(CircuitOp::measure(0, 0));
    const ExactResult r = run_exact(c, NoiseModel{.p_x = 0.1});
    CHECK(std::abs(r.final_state.trace_real() - 1.0) < kNormTol);
    CHECK(std::abs(dist_get(r.distribution, "1") - 0.9) < 1e-12);
    CHECK(std::abs(dist_get(r.distribution, "0") - 0.1) < 1e-12);

    Circuit big(11, 0);
    CHECK_THROWS_AS((void)run_exact(big), std::invalid_argument);
}

TEST_CASE("run_exact_pure agrees with run_exact on measured circuits") {
    for (const Circuit& c : {bell_circuit(), teleport_one_circuit()}) {
        const ExactResult dm = run_exact(c);
        const ExactPureResult pure = run_exact_pure(c);
        for (const auto& [key, p] : dm.distribution)
            CHECK(std::abs(dist_get(pure.distribution, key) - p) < 1e-12);
    }
}

TEST_CASE("run_exact_pure: reduced receiver state of the teleport circuit") {
    Circuit c = teleport_one_circuit();
    c.ops.pop_back();  // keep the receiver unmeasured
    const ExactPureResult r = run_exact_pure(c);
    const DensityMatrix rho = r.reduced({2});
    CHECK(std::abs(rho(1, 1).real() - 1.0) < 1e-12);
    CHECK(std::abs(rho(0, 0).real()) < 1e-12);
}

TEST_CASE("run_shots matches run_exact within 5 sigma per outcome") {
    const std::uint64_t shots = 8192;
    const NoiseModel noise{.p_x = 0.03, .p_z = 0.02};
    const ExactResult exact = run_exact(teleport_one_circuit(), noise);
    const Histogram h = run_shots(teleport_one_circuit(), shots, Seed{1234}, noise);
    for (const auto& [key, p] : exact.distribution) {
        const double sigma = std::sqrt(shots * p * (1.0 - p));
        const double got = static_cast<double>(
            h.counts.count(key) ? h.counts.at(key) : 0);
        CHECK(std::abs(got - shots * p) < 5.0 * std::max(sigma, 1.0));
    }
}

TEST_CASE("defer_measurements: rewrite removes mid-circuit classical control") {
    const Circuit d = defer_measurements(teleport_one_circuit());
    bool seen_measure = false;
    for (const auto& op : d.ops) {
        CHECK(op.kind != CircuitOp::Kind::ClassicallyControlled);
        if (op.kind == CircuitOp::Kind::Measure) seen_measure = true;
        if (op.kind == CircuitOp::Kind::Unitary) CHECK_FALSE(seen_measure);
    }

    // the rewrite preserves the exact outcome distribution
    const ExactResult before = run_exact(teleport_one_circuit());
    const ExactResult after = run_exact(d);
    for (const auto& [key, p] : before.distribution)
        CHECK(std::abs(dist_get(after.distribution, key) - p) < 1e-12);

    Circuit bad(1, 1);
    bad.add(CircuitOp::classically_controlled(0, GateName::simple(GateKind::X), 0));
    CHECK_THROWS_AS((void)defer_measurements(bad), std::invalid_argument);
}

TEST_CASE("text format: emit and parse round-trip the teleport circuit") {
    const Circuit c = teleport_one_circuit();
    const std::string text = emit_circuit(c);
    const Circuit parsed = parse_circuit(text);
    CHECK(parsed.n_qubits == c.n_qubits);
    CHECK(parsed.n_cbits == c.n_cbits);
    REQUIRE(parsed.ops.size() == c.ops.size());
    CHECK(emit_circuit(parsed) == text);

    const ExactResult a = run_exact(c);
    const ExactResult b = run_exact(parsed);
    for (const auto& [key, p] : a.distribution)
        CHECK(std::abs(dist_get(b.distribution, key) - p) < 1e-12);
}

TEST_CASE("text format: comments, blanks, and diagnostics") {
    const Circuit c = parse_circuit(
        "# preamble\n"
        "qubits 2\n"
        "cbits 1\n"
        "\n"
        "U H q0   # inline comment\n"
        "U CNOT q0 q1\n"
        "M q1 c0\n");
    CHECK(c.ops.size() == 3);

    CHECK_THROWS_WITH_AS((void)parse_circuit("qubits 1\nU BOGUS q0\n"),
                         doctest::Contains("line 2"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_circuit("U H q0\n"), std::invalid_argument);      // no header
    CHECK_THROWS_AS((void)parse_circuit("qubits 1\nU H q5\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_circuit("qubits 2\nU CNOT q0\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_circuit("qubits 1\ncbits 1\nCIF c0 X q0\n"),
                    std::invalid_argument);  // reads unwritten bit
    CHECK_THROWS_AS((void)parse_circuit("qubits 1\nM q0 x0\n"), std::invalid_argument);
}

TEST_CASE("marginal: collapses an exact distribution onto one classical bit") {
    const std::map<std::string, double> dist{{"00", 0.1}, {"01", 0.2}, {"10", 0.3}, {"11", 0.4}};
    const auto m = marginal(dist, 1);
    CHECK(std::abs(m.at("0") - 0.4) < kExactTol);
    CHECK(std::abs(m.at("1") - 0.6) < kExactTol);
}
