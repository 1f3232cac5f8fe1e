// Experiment driver: builds sources, runs protocols, and computes fidelity
// reports from the command line.
//
// Exit codes: 0 success, 2 argument/config parse error, 3 qubit-budget
// violation, 4 indeterminate majority vote.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qfte/qfte.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qfte;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;
constexpr int kExitTie = 4;

const char* kProtocolNames =
    "tele, 2-tele, 4-tele, qss, 2-qss, bidirec, en-sw-1, en-sw-2, fo-ca-<hops>, multi-orbit";

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
}

std::string format4(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << v;
    return os.str();
}

// --- build-source ------------------------------------------------------------

int cmd_build_source(std::size_t sets, std::size_t size, const fs::path& out_dir) {
    const SourceSpec spec{sets, size};
    if (sets < 1 || size < 2) {
        std::cerr << "build-source: need --sets >= 1 and --size >= 2\n";
        return kExitUsage;
    }
    if (sets * size > 24) {
        std::cerr << "build-source: " << sets * size << " qubits exceed the 24-qubit budget\n";
        return kExitBudget;
    }

    const SourceCircuit sc = build_source(spec);
    fs::create_directories(out_dir);
    write_file(out_dir / "source.qc", emit_circuit(sc.circuit));

    json layout = json::array();
    for (const auto& set : sc.layout.assignment) layout.push_back(set);
    write_file(out_dir / "layout.json",
               json{{"sets", sets}, {"size", size}, {"assignment", layout}}.dump(2) + "\n");

    const DisjointReport report = verify_disjoint(simulate_pure(sc.circuit), sc.layout);
    std::cout << "source S_" << size << "^" << sets << ": " << sets * size << " qubits, "
              << sc.circuit.ops.size() << " ops\n";
    for (std::size_t m = 0; m < report.set_ghz_fidelity.size(); ++m)
        std::cout << "set " << m << " GHZ fidelity " << format4(report.set_ghz_fidelity[m])
                  << "\n";
    std::cout << "max cross-set mutual information "
              << format4(report.max_cross_mutual_information) << "\n";
    return 0;
}

// --- run ----------------------------------------------------------------------

struct RunConfig {
    std::string protocol;
    std::vector<StateVector> inputs;
    json inputs_echo = json::array();
    CorrectionMode mode = CorrectionMode::Deferred;
    NoiseModel noise{};
    std::uint64_t shots = 8192;
    std::optional<std::uint64_t> seed;
    std::string backend = "shots";
    std::string bits;           // multi-orbit
    std::size_t hops = 0;       // multi-orbit / fo-ca
    std::string source = "per-hop";  // fo-ca source variant
};

StateVector parse_input_state(const json& spec) {
    if (spec.is_string()) {
        const std::string name = spec.get<std::string>();
        if (name == "psi1") return prepare_named_state(NamedState::PSI1);
        if (name == "psi2") return prepare_named_state(NamedState::PSI2);
        if (name == "psi3") return prepare_named_state(NamedState::PSI3);
        if (name == "psi4") return prepare_named_state(NamedState::PSI4);
        if (name == "0") return prepare_named_state(NamedState::KET0);
        if (name == "1") return prepare_named_state(NamedState::KET1);
        throw std::invalid_argument("unknown input state '" + name +
                                    "' (expected psi1..psi4, 0, or 1)");
    }
    if (spec.is_array() && spec.size() == 2) {
        auto amp = [](const json& j) -> cplx {
            if (j.is_number()) return cplx{j.get<double>(), 0.0};
            if (j.is_array() && j.size() == 2)
                return cplx{j[0].get<double>(), j[1].get<double>()};
            throw std::invalid_argument("amplitude must be a number or [re, im]");
        };
        StateVector s(1, {amp(spec[0]), amp(spec[1])});
        if (std::abs(s.norm() - 1.0) > 1e-6)
            throw std::invalid_argument("explicit amplitude pair is not normalized");
        return s;
    }
    throw std::invalid_argument("input state must be a name or a two-amplitude array");
}

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    if (!j.contains("protocol") || !j.at("protocol").is_string())
        throw std::invalid_argument("field 'protocol' (string) is required; valid names: " +
                                    std::string(kProtocolNames));
    cfg.protocol = j.at("protocol").get<std::string>();

    if (j.contains("inputs")) {
        if (!j.at("inputs").is_array())
            throw std::invalid_argument("field 'inputs' must be an array of state specs");
        for (const auto& spec : j.at("inputs")) {
            cfg.inputs.push_back(parse_input_state(spec));
            cfg.inputs_echo.push_back(spec);
        }
    }
    if (j.contains("variant")) {
        const std::string v = j.at("variant").get<std::string>();
        if (v == "feedback")
            cfg.mode = CorrectionMode::Feedback;
        else if (v == "deferred")
            cfg.mode = CorrectionMode::Deferred;
        else
            throw std::invalid_argument("field 'variant' must be 'feedback' or 'deferred'");
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        cfg.noise.p_x = n.value("p_x", 0.0);
        cfg.noise.p_y = n.value("p_y", 0.0);
        cfg.noise.p_z = n.value("p_z", 0.0);
        cfg.noise.validate();
    }
    cfg.shots = j.value("shots", std::uint64_t{8192});
    if (cfg.shots == 0) throw std::invalid_argument("field 'shots' must be positive");
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.backend = j.value("backend", std::string("shots"));
    if (cfg.backend != "shots" && cfg.backend != "exact")
        throw std::invalid_argument("field 'backend' must be 'shots' or 'exact'");
    cfg.bits = j.value("bits", std::string());
    cfg.hops = j.value("hops", std::size_t{0});
    cfg.source = j.value("source", std::string("per-hop"));
    return cfg;
}

CascadeSource parse_cascade_source(const std::string& name) {
    if (name == "per-hop") return CascadeSource::PerHop;
    if (name == "qft-shared") return CascadeSource::QftShared;
    if (name == "ghz-shared") return CascadeSource::GhzShared;
    throw std::invalid_argument(
        "field 'source' must be 'per-hop', 'qft-shared', or 'ghz-shared'");
}

void require_inputs(const RunConfig& cfg, std::size_t n) {
    if (cfg.inputs.size() != n)
        throw std::invalid_argument("protocol '" + cfg.protocol + "' needs exactly " +
                                    std::to_string(n) + " input state(s), got " +
                                    std::to_string(cfg.inputs.size()));
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "bitstring,count,probability\n";
    os.setf(std::ios::fixed);
    os.precision(10);
    for (const auto& [key, count] : h.counts) {
        if (count == 0) continue;
        os << key << "," << count << ","
           << static_cast<double>(count) / static_cast<double>(h.shots) << "\n";
    }
    return os.str();
}

json histogram_json(const Histogram& h) {
    json rows = json::array();
    for (const auto& [key, count] : h.counts) {
        if (count == 0) continue;
        rows.push_back({{"bitstring", key},
                        {"count", count},
                        {"probability",
                         static_cast<double>(count) / static_cast<double>(h.shots)}});
    }
    return {{"shots", h.shots}, {"outcomes", rows}};
}

// Exact-backend histograms carry synthetic counts: probability * shots rounded.
Histogram exact_histogram(const ProbabilityPair& p, std::uint64_t shots) {
    Histogram h;
    h.shots = shots;
    const auto c0 = static_cast<std::uint64_t>(std::llround(p.p0 * static_cast<double>(shots)));
    if (c0 > 0) h.counts["0"] = c0;
    if (shots > c0) h.counts["1"] = shots - c0;
    return h;
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_flag, std::optional<std::uint64_t> shots_flag,
            const std::string& format) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "run: cannot read config " << config_path << "\n";
        return kExitUsage;
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "run: config parse error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (doc.contains("config")) doc = doc.at("config");  // accept emitted manifests

    RunConfig cfg;
    try {
        cfg = parse_config(doc);
    } catch (const std::exception& e) {
        std::cerr << "run: invalid config: " << e.what() << "\n";
        return kExitUsage;
    }
    if (shots_flag) cfg.shots = *shots_flag;
    if (seed_flag) cfg.seed = *seed_flag;
    if (!cfg.seed) {
        if (const char* env = std::getenv("QFTE_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
    }
    const Seed seed{cfg.seed.value_or(0)};

    ProtocolRun run{.inputs = cfg.inputs,
                    .mode = cfg.mode,
                    .noise = cfg.noise,
                    .shots = cfg.shots,
                    .seed = seed};

    ProtocolReport report;
    std::optional<MultiOrbitReport> orbit;
    std::optional<ProtocolCircuit> circuit;
    try {
        if (cfg.protocol == "tele") {
            require_inputs(cfg, 1);
            circuit = build_teleport(cfg.inputs[0]);
        } else if (cfg.protocol == "2-tele") {
            require_inputs(cfg, 2);
            circuit = build_parallel_teleport(cfg.inputs);
        } else if (cfg.protocol == "4-tele") {
            require_inputs(cfg, 4);
            circuit = build_parallel_teleport(cfg.inputs);
        } else if (cfg.protocol == "qss") {
            require_inputs(cfg, 1);
            circuit = build_qss(cfg.inputs[0]);
        } else if (cfg.protocol == "2-qss") {
            require_inputs(cfg, 2);
            circuit = build_parallel_qss(cfg.inputs);
        } else if (cfg.protocol == "bidirec") {
            require_inputs(cfg, 2);
            circuit = build_bidirectional(cfg.inputs[0], cfg.inputs[1]);
        } else if (cfg.protocol == "en-sw-1") {
            require_inputs(cfg, 1);
            circuit = build_entanglement_swap(cfg.inputs[0], SwapVariant::TwoSources);
        } else if (cfg.protocol == "en-sw-2") {
            require_inputs(cfg, 1);
            circuit = build_entanglement_swap(cfg.inputs[0], SwapVariant::QftSource);
        } else if (cfg.protocol.rfind("fo-ca-", 0) == 0) {
            require_inputs(cfg, 1);
            const std::size_t hops = std::stoul(cfg.protocol.substr(6));
            report = forward_cascade(run, hops, parse_cascade_source(cfg.source));
        } else if (cfg.protocol == "multi-orbit") {
            if (cfg.bits.empty() || cfg.hops < 2)
                throw std::invalid_argument(
                    "multi-orbit needs 'bits' (binary string) and 'hops' >= 2");
            orbit = multi_orbit_transmit(cfg.bits, cfg.hops, cfg.noise, cfg.shots, seed);
        } else {
            std::cerr << "run: unknown protocol '" << cfg.protocol << "'; valid names: "
                      << kProtocolNames << "\n";
            return kExitUsage;
        }
        if (circuit) report = run_protocol(*circuit, run);
    } catch (const std::runtime_error& e) {
        if (std::string(e.what()).find("indeterminate") != std::string::npos) {
            std::cerr << "run: " << e.what() << "\n";
            return kExitTie;
        }
        std::cerr << "run: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "run: " << e.what() << "\n";
        return kExitUsage;
    }

    fs::create_directories(out_dir);

    json fidelity;
    if (orbit) {
        fidelity = {{"received_bits", orbit->received_bits},
                    {"per_bit_per_hop_f_ap", orbit->per_bit_per_hop_f_ap}};
        std::cout << "received " << orbit->received_bits << "\n";
    } else {
        json channels = json::array();
        for (std::size_t i = 0; i < report.channels.size(); ++i) {
            const auto& ch = report.channels[i];
            Histogram hist = ch.receiver_histogram;
            if (cfg.backend == "exact" && circuit)
                hist = exact_histogram(receiver_pair(*circuit, i, cfg.mode, cfg.noise),
                                       cfg.shots);
            const std::string stem = "histogram_" + std::to_string(i);
            if (format == "json")
                write_file(out_dir / (stem + ".json"), histogram_json(hist).dump(2) + "\n");
            else
                write_file(out_dir / (stem + ".csv"), histogram_csv(hist));
            channels.push_back(to_json(ch.fidelity));
            std::cout << "channel " << i << ": f_rp " << format4(ch.fidelity.f_rp) << "  f_tp "
                      << format4(ch.fidelity.f_tp) << "  f_ap " << format4(ch.fidelity.f_ap);
            if (ch.fidelity.f_uhlmann)
                std::cout << "  f_uhlmann " << format4(*ch.fidelity.f_uhlmann);
            std::cout << "\n";
        }
        fidelity = {{"channels", channels}};
        if (!report.per_hop_f_ap.empty()) fidelity["per_hop_f_ap"] = report.per_hop_f_ap;
    }
    write_file(out_dir / "fidelity.json", fidelity.dump(2) + "\n");

    json config_echo = doc;
    config_echo["shots"] = cfg.shots;
    config_echo["seed"] = seed.value;
    const json manifest{{"version", kVersion}, {"seed", seed.value}, {"config", config_echo}};
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
}

// --- fidelity ------------------------------------------------------------------

int cmd_fidelity(const std::vector<double>& theory, const std::vector<double>& alice,
                 const std::vector<double>& bob) {
    auto to_pair = [](const std::vector<double>& v, const char* name) {
        const ProbabilityPair p{v[0], v[1]};
        if (std::abs(p.p0 + p.p1 - 1.0) > 1e-4 || p.p0 < 0 || p.p1 < 0)
            throw std::invalid_argument(std::string(name) +
                                        " must be two probabilities summing to 1");
        return p;
    };
    const ProbabilityPair t = to_pair(theory, "--theory");
    const ProbabilityPair a = to_pair(alice, "--alice");
    const ProbabilityPair b = to_pair(bob, "--bob");
    std::cout << "F_RP " << format4(f_rp(t, a)) << "\n";
    std::cout << "F_TP " << format4(f_tp(a, b)) << "\n";
    std::cout << "F_AP " << format4(f_ap(t, b)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qfte: QFT entanglement-source and protocol experiment runner"};
    app.require_subcommand(1);

    auto* build = app.add_subcommand("build-source", "Build an S_N^M source circuit");
    std::size_t sets = 0, size = 0;
    std::string build_out = ".";
    build->add_option("--sets", sets, "Number of entangled sets (M)")->required();
    build->add_option("--size", size, "Particles per set (N)")->required();
    build->add_option("--out", build_out, "Output directory");

    auto* runc = app.add_subcommand("run", "Run a protocol experiment from a JSON config");
    std::string config_path, run_out = ".", format = "csv";
    std::optional<std::uint64_t> seed_flag, shots_flag;
    runc->add_option("--config", config_path, "Config or manifest JSON path")->required();
    runc->add_option("--out", run_out, "Output directory");
    runc->add_option("--seed", seed_flag, "Seed override (falls back to QFTE_SEED)");
    runc->add_option("--shots", shots_flag, "Shots override");
    runc->add_option("--format", format, "Histogram format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* fid = app.add_subcommand("fidelity", "Compute F_RP, F_TP, F_AP from three pairs");
    std::vector<double> theory, alice, bob;
    fid->add_option("--theory", theory, "Theoretical pair p0 p1")->expected(2)->required();
    fid->add_option("--alice", alice, "Alice's estimated pair p0 p1")->expected(2)->required();
    fid->add_option("--bob", bob, "Bob's estimated pair p0 p1")->expected(2)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (build->parsed()) return cmd_build_source(sets, size, build_out);
        if (runc->parsed())
            return cmd_run(config_path, run_out, seed_flag, shots_flag, format);
        if (fid->parsed()) return cmd_fidelity(theory, alice, bob);
    } catch (const std::exception& e) {
        std::cerr << argv[0] << ": " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
