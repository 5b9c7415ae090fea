#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <cocycle_spectra/config.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_shell(const std::string& line) {
    int status = std::system(line.c_str());
    return WEXITSTATUS(status);
}

int run_cli(const std::string& args) {
    return run_shell(std::string(CLI_BINARY_PATH) + " " + args + " >/dev/null 2>&1");
}

fs::path work_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "cospec_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

// hyperbolic/elliptic generator pair, small word length for fast runs
const char* kMatrixConfig = R"({
    "schema_version": 1,
    "maps": [
        {"kind": "matrix", "entries": [2.0, 0.0, 0.0, 0.5]},
        {"kind": "rotation_matrix", "amount": 0.6180339887498949}
    ],
    "word_length": 10
})";

const char* kRotationMatrixConfig = R"({
    "schema_version": 1,
    "maps": [
        {"kind": "rotation_matrix", "amount": 0.3},
        {"kind": "rotation_matrix", "amount": 0.6180339887498949}
    ],
    "word_length": 8
})";

const char* kRigidRotationConfig = R"({
    "schema_version": 1,
    "maps": [
        {"kind": "rotation", "amount": 0.3},
        {"kind": "rotation", "amount": 0.6180339887498949}
    ],
    "sync": {"samples": 10, "steps": 50, "grid": 16, "tol": 1e-4}
})";

const char* kSkewConfig = R"({
    "schema_version": 1,
    "maps": [
        {"kind": "morse_smale", "attractor": 0.0, "repeller": 0.5, "contraction": 0.25},
        {"kind": "rotation", "amount": 0.6180339887498949}
    ],
    "sync": {"samples": 10, "steps": 200, "grid": 16, "tol": 1e-4}
})";

} // namespace

TEST_CASE("usage problems exit with the configuration code") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("--bogus classify") == 2);
    CHECK(run_cli("classify") == 2);  // --config is required
    CHECK(run_cli("classify --config /tmp/cospec_missing_config.json") == 2);

    fs::path dir = work_dir("usage");
    spit(dir / "one_map.json", R"({"schema_version": 1, "maps": [
        {"kind": "rotation", "amount": 0.3}]})");
    CHECK(run_cli("classify --config " + (dir / "one_map.json").string()) == 2);
}

TEST_CASE("word budget comes from the environment and is validated") {
    fs::path dir = work_dir("budget");
    spit(dir / "cfg.json", kMatrixConfig);
    std::string base = std::string(CLI_BINARY_PATH) + " classify --config " +
                       (dir / "cfg.json").string() + " >/dev/null 2>&1";
    CHECK(run_shell("COCYCLE_SPECTRA_BUDGET=abc " + base) == 2);
    CHECK(run_shell("COCYCLE_SPECTRA_BUDGET=0 " + base) == 2);
    CHECK(run_shell("COCYCLE_SPECTRA_BUDGET=100 " + base) == 0);  // classify scans no words

    std::string spectrum = std::string(CLI_BINARY_PATH) + " spectrum --config " +
                           (dir / "cfg.json").string() + " --out " + dir.string() +
                           " >/dev/null 2>&1";
    CHECK(run_shell("COCYCLE_SPECTRA_BUDGET=100 " + spectrum) == 3);  // 1024 words
    CHECK(run_shell(spectrum) == 0);
}

TEST_CASE("classify prints one row per configured map") {
    fs::path dir = work_dir("classify");
    spit(dir / "cfg.json", kMatrixConfig);
    fs::path out = dir / "rows.json";
    REQUIRE(run_shell(std::string(CLI_BINARY_PATH) + " classify --config " +
                      (dir / "cfg.json").string() + " > " + out.string() + " 2>/dev/null") == 0);

    json rows = json::parse(slurp(out));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["kind"] == "matrix");
    CHECK(rows[0]["tag"] == "hyperbolic");
    CHECK(rows[0]["matrix"]["sv_max"] == 2.0);
    CHECK(rows[1]["tag"] == "elliptic");
    CHECK(rows[1]["rotation_number"].get<double>() ==
          Catch::Approx(0.6180339887498949).margin(1e-12));

    spit(dir / "rigid.json", kRigidRotationConfig);
    REQUIRE(run_shell(std::string(CLI_BINARY_PATH) + " classify --config " +
                      (dir / "rigid.json").string() + " > " + out.string() +
                      " 2>/dev/null") == 0);
    rows = json::parse(slurp(out));
    CHECK(rows[0]["kind"] == "rotation");
    CHECK(rows[0]["amount"] == 0.3);
    CHECK_FALSE(rows[0].contains("tag"));
}

TEST_CASE("spectrum writes the full file set and stays byte-stable") {
    fs::path dir = work_dir("spectrum");
    spit(dir / "cfg.json", kMatrixConfig);
    std::string cfg = (dir / "cfg.json").string();

    fs::path out1 = dir / "run1";
    REQUIRE(run_cli("spectrum --config " + cfg + " --out " + out1.string()) == 0);
    for (const char* name : {"spectrum.csv", "pressure_neg.csv", "pressure_pos.csv",
                             "lf_neg.csv", "lf_pos.csv", "spectrum_cocycle.csv",
                             "summary.json"}) {
        CHECK(fs::exists(out1 / name));
    }

    std::string spec_csv = slurp(out1 / "spectrum.csv");
    CHECK(spec_csv.rfind("grid,value,populated_count\n", 0) == 0);

    json meta = json::parse(slurp(out1 / "summary.json"));
    CHECK(meta["command"] == "spectrum");
    CHECK(meta["schema_version"] == 1);
    CHECK(meta["n"] == 10);
    CHECK(meta["policy"] == "max_over_fiber");
    CHECK(meta["symmetrized"] == true);
    CHECK(meta["negative_class_size"].get<int>() > 0);
    CHECK(meta["positive_class_size"] == meta["negative_class_size"]);
    for (const char* key : {"delta", "total_words", "populated_bins", "alpha_min",
                            "alpha_max", "zero_bin_value", "h_at_zero", "alpha_minus",
                            "alpha_plus", "max_entropy", "d_minus", "d_plus", "budget",
                            "asymmetry_warning", "max_discrepancy"}) {
        CHECK(meta.contains(key));
    }

    // worker count must not leak into the bytes
    fs::path out2 = dir / "run2";
    fs::path out3 = dir / "run3";
    REQUIRE(run_cli("spectrum --config " + cfg + " --threads 1 --out " + out2.string()) == 0);
    REQUIRE(run_cli("spectrum --config " + cfg + " --threads 4 --out " + out3.string()) == 0);
    for (const char* name : {"spectrum.csv", "pressure_neg.csv", "summary.json"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
        CHECK(slurp(out1 / name) == slurp(out3 / name));
    }
}

TEST_CASE("spectrum refuses systems without sign classes") {
    fs::path dir = work_dir("spectrum_flat");
    spit(dir / "cfg.json", kRotationMatrixConfig);
    CHECK(run_cli("spectrum --config " + (dir / "cfg.json").string() + " --out " +
                  dir.string()) == 4);
}

TEST_CASE("synchronize echoes its seed and reruns byte-identically") {
    fs::path dir = work_dir("sync");
    spit(dir / "cfg.json", kSkewConfig);
    std::string cfg = (dir / "cfg.json").string();

    fs::path out1 = dir / "run1";
    REQUIRE(run_cli("synchronize --config " + cfg + " --seed 9 --out " + out1.string()) == 0);
    json rep = json::parse(slurp(out1 / "sync_report.json"));
    CHECK(rep["command"] == "synchronize");
    CHECK(rep["seed"] == 9);
    CHECK(rep["rng"] == "splitmix64");
    CHECK(rep["steps"] == 200);
    CHECK(rep["grid"] == 16);
    CHECK(rep["samples"].size() == 10);
    double fraction = rep["fraction_synchronized"].get<double>();
    CHECK(fraction >= 0.0);
    CHECK(fraction <= 1.0);

    fs::path out2 = dir / "run2";
    REQUIRE(run_cli("synchronize --config " + cfg + " --seed 9 --out " + out2.string()) == 0);
    CHECK(slurp(out1 / "sync_report.json") == slurp(out2 / "sync_report.json"));

    // a different seed must actually change the draw
    fs::path out3 = dir / "run3";
    REQUIRE(run_cli("synchronize --config " + cfg + " --seed 10 --out " + out3.string()) == 0);
    CHECK(slurp(out1 / "sync_report.json") != slurp(out3 / "sync_report.json"));
}

TEST_CASE("rigid rotations never synchronize through the front end") {
    fs::path dir = work_dir("sync_rigid");
    spit(dir / "cfg.json", kRigidRotationConfig);
    REQUIRE(run_cli("synchronize --config " + (dir / "cfg.json").string() + " --seed 5 --out " +
                    dir.string()) == 0);
    json rep = json::parse(slurp(dir / "sync_report.json"));
    CHECK(rep["fraction_synchronized"] == 0.0);
    CHECK(rep["mean_exponent"].is_null());
}

TEST_CASE("axiom checks certify the reference skew system") {
    fs::path dir = work_dir("axioms");
    spit(dir / "cfg.json", kSkewConfig);
    REQUIRE(run_cli("check-axioms --config " + (dir / "cfg.json").string() + " --out " +
                    dir.string()) == 0);
    json doc = json::parse(slurp(dir / "cec_certificate.json"));
    CHECK(doc["command"] == "check-axioms");
    CHECK(doc["core_arc"]["start"] == 0.45);
    CHECK(doc["target_arc"]["length"] == 0.1);
    CHECK(doc["certified"] == true);
    CHECK(doc["cec_plus"]["found"] == true);
    CHECK(doc["cec_plus"]["witness"] == json({0}));
    CHECK(doc["cec_minus"]["found"] == true);
    CHECK(doc["acc"]["certified"] == true);
    CHECK(doc["acc"]["unreached"] == 0);
    CHECK(doc["acc"]["max_transition"] == 5);
}

TEST_CASE("perturb reports membership before and after the stretch") {
    fs::path dir = work_dir("perturb");
    json cfg = json::parse(kMatrixConfig);
    cfg["perturb"] = json{{"index", 0}, {"amount", 0.01}, {"max_depth", 6}};
    spit(dir / "cfg.json", cfg.dump());
    REQUIRE(run_cli("perturb --config " + (dir / "cfg.json").string() + " --out " +
                    dir.string()) == 0);
    json doc = json::parse(slurp(dir / "perturb_report.json"));
    CHECK(doc["command"] == "perturb");
    CHECK(doc["index"] == 0);
    CHECK(doc["amount"] == 0.01);
    CHECK(doc["before"]["member"] == true);
    CHECK(doc["before"]["hyperbolic"]["found"] == true);
    CHECK(doc["after"]["member"] == true);
    CHECK(doc["after"]["nearest_rational_gap"].get<double>() > 1e-3);
    REQUIRE(doc.contains("rotation_response"));
    CHECK(std::fabs(doc["rotation_response"]["trace_derivative"].get<double>()) > 1e-6);
}

TEST_CASE("track-v0 reruns byte-identically and rejects isometric input") {
    fs::path dir = work_dir("track");
    json cfg = json::parse(kMatrixConfig);
    cfg["track"] = json{{"length", 64}, {"checkpoints", {16, 64}}};
    spit(dir / "cfg.json", cfg.dump());
    std::string cfg_path = (dir / "cfg.json").string();

    fs::path out1 = dir / "run1";
    REQUIRE(run_cli("track-v0 --config " + cfg_path + " --seed 3 --out " + out1.string()) == 0);
    std::string csv = slurp(out1 / "track_v0.csv");
    CHECK(csv.rfind("ell,v_plus,lambda1,bound,observed_step\n", 0) == 0);
    json doc = json::parse(slurp(out1 / "track_v0.json"));
    CHECK(doc["command"] == "track-v0");
    CHECK(doc["seed"] == 3);
    CHECK(doc["rng"] == "splitmix64");
    CHECK(doc["length"] == 64);
    CHECK(doc["checkpoints"] == json({16, 64}));
    CHECK(doc["bounds_respected"] == true);

    fs::path out2 = dir / "run2";
    REQUIRE(run_cli("track-v0 --config " + cfg_path + " --seed 3 --out " + out2.string()) == 0);
    CHECK(slurp(out1 / "track_v0.csv") == slurp(out2 / "track_v0.csv"));

    // products of projective rotations never develop a dominant direction
    spit(dir / "rot.json", kRotationMatrixConfig);
    CHECK(run_cli("track-v0 --config " + (dir / "rot.json").string() + " --seed 3 --out " +
                  dir.string()) == 4);

    // rigid-rotation maps carry no matrices to track at all
    spit(dir / "rigid.json", kRigidRotationConfig);
    CHECK(run_cli("track-v0 --config " + (dir / "rigid.json").string() + " --seed 3 --out " +
                  dir.string()) == 2);
}

TEST_CASE("output directories are created on demand") {
    fs::path dir = work_dir("outdirs");
    spit(dir / "cfg.json", kSkewConfig);
    fs::path nested = dir / "a" / "b" / "c";
    REQUIRE(run_cli("synchronize --config " + (dir / "cfg.json").string() + " --seed 1 --out " +
                    nested.string()) == 0);
    CHECK(fs::exists(nested / "sync_report.json"));
}
