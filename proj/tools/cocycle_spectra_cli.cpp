// Command-line front end. Every subcommand reads one JSON configuration
// (see config.hpp for the schema) and either prints JSON to stdout or
// writes files into --out. Exit codes: 0 success, 2 configuration
// problem, 3 budget exceeded, 4 failed operation.
//
// The word budget comes from the COCYCLE_SPECTRA_BUDGET environment
// variable when set (default 2^24). Output bytes are independent of
// --threads: statistics land in rank-indexed slots and reductions are
// sequential.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cocycle_spectra/axioms.hpp"
#include "cocycle_spectra/cocycle.hpp"
#include "cocycle_spectra/config.hpp"
#include "cocycle_spectra/ellipticity.hpp"
#include "cocycle_spectra/errors.hpp"
#include "cocycle_spectra/parallel.hpp"
#include "cocycle_spectra/serialize.hpp"
#include "cocycle_spectra/skewproduct.hpp"
#include "cocycle_spectra/thermo.hpp"

namespace {

using namespace cospec;
namespace fs = std::filesystem;

std::uint64_t budget_from_env() {
    const char* s = std::getenv("COCYCLE_SPECTRA_BUDGET");
    if (!s || !*s) return kDefaultBudget;
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (errno != 0 || end == s || *end != '\0' || v == 0)
        throw ConfigError("COCYCLE_SPECTRA_BUDGET must be a positive integer");
    return static_cast<std::uint64_t>(v);
}

void write_file(const fs::path& dir, const char* name, const std::string& text) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << text;
    if (!os) throw ConfigError("failed writing " + p.string());
}

std::string dumped(const json& j) { return j.dump(2) + "\n"; }

const char* tag_name(MatTag t) {
    switch (t) {
    case MatTag::Elliptic: return "elliptic";
    case MatTag::Parabolic: return "parabolic";
    case MatTag::Hyperbolic: return "hyperbolic";
    case MatTag::NotSL2:
    default: return "not_sl2";
    }
}

int cmd_classify(const RunConfig& cfg) {
    json out = json::array();
    for (const auto& f : cfg.maps) {
        json row;
        if (f.kind == FiberKind::RigidRotation) {
            row["kind"] = "rotation";
            row["amount"] = f.rho;
        } else {
            row["kind"] = f.kind == FiberKind::MorseSmale ? "morse_smale" : "matrix";
            MatClass c = classify(f.m);
            row["tag"] = tag_name(c.tag);
            if (c.rotation_number) row["rotation_number"] = *c.rotation_number / kPi;
            row["matrix"] = json_of(f.m);
        }
        out.push_back(row);
    }
    std::cout << dumped(out);
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, const fs::path& out, int partitions,
                 std::uint64_t budget) {
    FiberSystem sys = cfg.system();
    int n = cfg.word_length;
    double delta = cfg.bin_width > 0.0 ? cfg.bin_width : default_bin_width(sys, n);
    std::vector<double> q = cfg.q_grid();

    WordStatistics stat_main = word_statistics(sys, n, cfg.policy, budget, partitions);
    CountingSpectrum spec = counting_spectrum_from(stat_main, delta);

    WordStatistics stat_max =
        cfg.policy.kind == StatisticKind::MaxOverFiber
            ? stat_main
            : word_statistics(sys, n, StatisticPolicy::max_over_fiber(), budget, partitions);
    WordStatistics stat_min =
        stat_max.unit_det_norm_path
            ? negated_statistics(stat_max)
            : word_statistics(sys, n, StatisticPolicy::min_over_fiber(), budget, partitions);

    PressureCurve p_neg = pressure_curve_from(stat_min, q, SignRestriction::Negative);
    PressureCurve p_pos = pressure_curve_from(stat_max, q, SignRestriction::Positive);

    std::vector<double> alphas_pos, alphas_neg;
    for (const auto& b : spec.bins) {
        if (b.index >= 0) alphas_pos.push_back(b.alpha);
        if (b.index <= 0) alphas_neg.push_back(b.alpha);
    }
    LegendreTransform lf_pos = legendre_fenchel(p_pos, alphas_pos);
    LegendreTransform lf_neg = legendre_fenchel(p_neg, alphas_neg);

    TranslatedSpectrum cocycle_spec = translate_spectrum(spec);
    SpectrumSummary summary = extract_summary(spec, p_neg, p_pos);

    std::ostringstream buf;
    write_spectrum_csv(buf, spec);
    write_file(out, "spectrum.csv", buf.str());
    buf.str("");
    write_pressure_csv(buf, p_neg);
    write_file(out, "pressure_neg.csv", buf.str());
    buf.str("");
    write_pressure_csv(buf, p_pos);
    write_file(out, "pressure_pos.csv", buf.str());
    buf.str("");
    write_legendre_csv(buf, lf_neg);
    write_file(out, "lf_neg.csv", buf.str());
    buf.str("");
    write_legendre_csv(buf, lf_pos);
    write_file(out, "lf_pos.csv", buf.str());
    buf.str("");
    write_translated_csv(buf, cocycle_spec);
    write_file(out, "spectrum_cocycle.csv", buf.str());

    json meta = json_of(summary);
    meta["schema_version"] = kConfigSchemaVersion;
    meta["command"] = "spectrum";
    meta["policy"] = policy_name(cfg.policy);
    if (cfg.policy.kind == StatisticKind::FixedPoint) meta["fixed_point"] = cfg.policy.theta;
    meta["budget"] = budget;
    meta["symmetrized"] = spec.symmetrized;
    meta["negative_class_size"] = p_neg.class_size;
    meta["positive_class_size"] = p_pos.class_size;
    meta["asymmetry_warning"] = cocycle_spec.asymmetry_warning;
    meta["max_discrepancy"] = cocycle_spec.max_discrepancy;
    write_file(out, "summary.json", dumped(meta));
    return 0;
}

int cmd_synchronize(const RunConfig& cfg, const fs::path& out, std::uint64_t seed) {
    FiberSystem sys = cfg.system();
    BernoulliSampler sampler = cfg.sampler(seed);
    SyncReport rep = synchronize(sys, sampler, cfg.sync);
    json doc = json_of(rep);
    doc["schema_version"] = kConfigSchemaVersion;
    doc["command"] = "synchronize";
    doc["steps"] = cfg.sync.steps;
    doc["grid"] = cfg.sync.grid;
    doc["tol"] = cfg.sync.tol;
    write_file(out, "sync_report.json", dumped(doc));
    return 0;
}

int cmd_check_axioms(const RunConfig& cfg, const fs::path& out, std::uint64_t budget) {
    FiberSystem sys = cfg.system();
    CecOptions opts = cfg.cec;
    opts.budget = budget;
    AccOptions aopts = cfg.acc;
    aopts.budget = budget;
    CecCertificate plus = check_cec(sys, cfg.core, cfg.target, opts);
    CecCertificate minus = check_cec(sys.inverse(), cfg.core, cfg.target, opts);
    AccReport acc = check_acc(sys, cfg.target, aopts);
    json doc{{"schema_version", kConfigSchemaVersion},
             {"command", "check-axioms"},
             {"core_arc", json_of(cfg.core)},
             {"target_arc", json_of(cfg.target)},
             {"cec_plus", json_of(plus)},
             {"cec_minus", json_of(minus)},
             {"acc", json_of(acc)},
             {"certified", plus.found && minus.found && acc.certified}};
    write_file(out, "cec_certificate.json", dumped(doc));
    return 0;
}

int cmd_perturb(const RunConfig& cfg, const fs::path& out, std::uint64_t budget) {
    std::vector<Mat2> gens = cfg.system().matrices();
    ShypReport before = shyp_membership(gens, cfg.search_depth, budget);
    std::vector<Mat2> moved = perturb_diagonal(gens, cfg.perturb_index, cfg.perturb_amount);
    ShypReport after = shyp_membership(moved, cfg.search_depth, budget);
    json doc{{"schema_version", kConfigSchemaVersion},
             {"command", "perturb"},
             {"index", cfg.perturb_index},
             {"amount", cfg.perturb_amount},
             {"before", json{{"member", before.member},
                             {"hyperbolic", json_of(before.hyperbolic)},
                             {"elliptic", json_of(before.elliptic)},
                             {"nearest_rational_gap", before.nearest_rational_gap}}},
             {"after", json{{"member", after.member},
                            {"hyperbolic", json_of(after.hyperbolic)},
                            {"elliptic", json_of(after.elliptic)},
                            {"nearest_rational_gap", after.nearest_rational_gap}}}};
    if (after.elliptic.found) {
        RotationResponse resp = rotation_perturbation_derivative(moved, after.elliptic.word);
        doc["rotation_response"] = json{
            {"trace_derivative", resp.trace_derivative},
            {"rotation_number_derivative", resp.rotation_number_derivative},
            {"base_trace", resp.base_trace},
            {"base_rotation_number", resp.base_rotation_number}};
    }
    write_file(out, "perturb_report.json", dumped(doc));
    return 0;
}

int cmd_track_v0(const RunConfig& cfg, const fs::path& out, std::uint64_t seed) {
    std::vector<Mat2> gens = cfg.system().matrices();
    BernoulliSampler sampler = cfg.sampler(seed);
    Word xi = sampler.sample_sequence(cfg.track_length);
    TrackReport rep = track_v0(xi, gens, cfg.track_checkpoints());
    std::ostringstream buf;
    write_track_csv(buf, rep);
    write_file(out, "track_v0.csv", buf.str());
    json doc{{"schema_version", kConfigSchemaVersion},
             {"command", "track-v0"},
             {"seed", seed},
             {"rng", "splitmix64"},
             {"length", cfg.track_length},
             {"bounds_respected", rep.bounds_respected},
             {"checkpoints", cfg.track_checkpoints()}};
    write_file(out, "track_v0.json", dumped(doc));
    return 0;
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Budget: return 3;
    case ErrorKind::Operation:
    default: return 4;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-scale spectra of 2x2 cocycles and circle skew-products"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::uint64_t seed = 1;
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--out", out_dir, "output directory (default: current)");
    app.add_option("--threads", threads, "worker count (0 = hardware)");
    app.add_option("--seed", seed, "sampling seed");

    CLI::App* sc_classify = app.add_subcommand("classify", "classify the configured maps");
    CLI::App* sc_spectrum =
        app.add_subcommand("spectrum", "counting spectrum, pressures and conjugates");
    CLI::App* sc_sync = app.add_subcommand("synchronize", "random-word synchronization report");
    CLI::App* sc_axioms =
        app.add_subcommand("check-axioms", "covering-expansion and accessibility certificates");
    CLI::App* sc_perturb =
        app.add_subcommand("perturb", "diagonal perturbation and ellipticity search");
    CLI::App* sc_track =
        app.add_subcommand("track-v0", "track the fiber-derivative maximum point");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cospec::RunConfig cfg = cospec::load_config(config_path);
        std::uint64_t budget = budget_from_env();
        int partitions = cospec::default_partitions(threads);
        std::filesystem::path out(out_dir);
        if (sc_classify->parsed()) return cmd_classify(cfg);
        if (sc_spectrum->parsed()) return cmd_spectrum(cfg, out, partitions, budget);
        if (sc_sync->parsed()) return cmd_synchronize(cfg, out, seed);
        if (sc_axioms->parsed()) return cmd_check_axioms(cfg, out, budget);
        if (sc_perturb->parsed()) return cmd_perturb(cfg, out, budget);
        if (sc_track->parsed()) return cmd_track_v0(cfg, out, seed);
        return 2;
    } catch (const cospec::Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
