#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "support.hpp"

using namespace testing_support;
using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& p) { return json::parse(read_file(p)); }

std::string cfg(const std::string& name) { return source_path("configs/" + name + ".toml"); }

} // namespace

TEST(Cli, VerifyPassesAndNamesMatchingForm) {
    auto d = scratch_dir("verify");
    EXPECT_EQ(run_cli("verify --out " + d.string(), d / "log"), 0);
    auto r = load_json(d / "verify_report.json");
    EXPECT_TRUE(r["results"]["pass"].get<bool>());
    EXPECT_EQ(r["results"]["closed_forms"]["matching_form_mu0"], "quartic");
    EXPECT_EQ(r["tool_version"], "0.1.0");
    EXPECT_TRUE(std::filesystem::exists(d / "verify_timings.json"));
    for (const auto& id : r["results"]["identities"]) EXPECT_TRUE(id["pass"].get<bool>()) << id["name"];
}

TEST(Cli, TamperedGeneratorsExitTwo) {
    auto d = scratch_dir("tamper");
    EXPECT_EQ(run_cli("verify --tamper-alpha2 --out " + d.string(), d / "log"), 2);
    auto failed = load_json(d / "verify_report.json")["results"]["failed"];
    EXPECT_NE(std::find(failed.begin(), failed.end(), "dirac_anticommutation"), failed.end());
}

TEST(Cli, CheckLsChecklist) {
    auto d = scratch_dir("checkls");
    EXPECT_EQ(run_cli("check-ls " + cfg("plane_critical_el") + " --out " + d.string(), d / "log"), 0);
    auto r = load_json(d / "check-ls_report.json")["results"];
    EXPECT_FALSE(r["parameter"]["pass"].get<bool>());
    EXPECT_EQ(r["self_adjointness"]["verdict"], "criterion not established");
    EXPECT_EQ(r["electrostatic_lorentz_margin"].get<double>(), 0.0);

    EXPECT_EQ(run_cli("check-ls " + cfg("compact_radial_so") + " --out " + d.string(), d / "log"), 0);
    r = load_json(d / "check-ls_report.json")["results"];
    EXPECT_EQ(r["self_adjointness"]["verdict"], "established");
    EXPECT_TRUE(r["local"]["pass"].get<bool>());
    EXPECT_TRUE(r["uniform"]["pass"].get<bool>());
}

TEST(Cli, SpectrumGateAndForce) {
    auto d = scratch_dir("gate");
    EXPECT_EQ(run_cli("spectrum " + cfg("plane_critical_el") + " --out " + d.string(), d / "log"), 1);
    EXPECT_NE(read_file(d / "log").find("--force"), std::string::npos);
    EXPECT_EQ(run_cli("spectrum " + cfg("plane_critical_el") + " --force --out " + d.string(), d / "log"), 0);
    auto r = load_json(d / "spectrum_report.json");
    EXPECT_TRUE(r["results"]["ls_gate"]["forced"].get<bool>());
    EXPECT_FALSE(r["warnings"].empty());
}

TEST(Cli, ConfigErrorsExitOne) {
    auto d = scratch_dir("cfgerr");
    write_file(d / "bad.toml", "schema_version = 1\n[surface]\nkind = \"torus\"\n");
    EXPECT_EQ(run_cli("check-ls " + (d / "bad.toml").string() + " --out " + d.string(), d / "log"), 1);
    EXPECT_EQ(run_cli("spectrum " + (d / "missing.toml").string(), d / "log"), 1);
    EXPECT_EQ(run_cli("frobnicate", d / "log"), 1);
    EXPECT_EQ(run_cli("spectrum", d / "log"), 1);
    EXPECT_EQ(run_cli("--threads 0 verify", d / "log"), 1);
}

TEST(Cli, SpectrumReportsAreByteIdentical) {
    for (const char* name : {"compact_radial_so", "plane_constant_el", "cone_vanishing_gamma"}) {
        auto a = scratch_dir(std::string("rep_a_") + name), b = scratch_dir(std::string("rep_b_") + name);
        ASSERT_EQ(run_cli("spectrum " + cfg(name) + " --out " + a.string(), a / "log"), 0);
        ASSERT_EQ(run_cli("spectrum " + cfg(name) + " --threads 3 --out " + b.string(), b / "log"), 0);
        EXPECT_EQ(read_file(a / "spectrum_report.json"), read_file(b / "spectrum_report.json")) << name;
        EXPECT_EQ(read_file(a / "spectrum_dispersion.csv"), read_file(b / "spectrum_dispersion.csv")) << name;
    }
}

TEST(Cli, SpectrumContent) {
    auto d = scratch_dir("content");
    ASSERT_EQ(run_cli("spectrum " + cfg("compact_radial_so") + " --out " + d.string(), d / "log"), 0);
    auto r = load_json(d / "spectrum_report.json")["results"];
    EXPECT_EQ(r["essential_spectrum"]["closure"]["text"], "(-inf, -1] U [1, inf)");
    EXPECT_EQ(r["descriptors"]["shell"], 0);
    ASSERT_EQ(run_cli("spectrum " + cfg("plane_constant_el") + " --out " + d.string(), d / "log"), 0);
    r = load_json(d / "spectrum_report.json")["results"];
    EXPECT_FALSE(r["shell"]["contribution_empty"].get<bool>());
    EXPECT_GT(r["provenance"].size(), 2u);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    auto d = scratch_dir("env");
    EXPECT_EQ(run_cli("verify", d / "log", "DSHELL_OUT_DIR=" + (d / "via_env").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(d / "via_env" / "verify_report.json"));
    // --out wins over the environment
    EXPECT_EQ(run_cli("verify --out " + (d / "via_flag").string(), d / "log", "DSHELL_OUT_DIR=" + (d / "x").string()), 0);
    EXPECT_TRUE(std::filesystem::exists(d / "via_flag" / "verify_report.json"));
    EXPECT_FALSE(std::filesystem::exists(d / "x"));
}

TEST(Cli, DispersionCsvFormat) {
    auto d = scratch_dir("csv");
    ASSERT_EQ(run_cli("dispersion " + cfg("plane_constant_el") + " --out " + d.string(), d / "log"), 0);
    std::string csv = read_file(d / "dispersion.csv");
    EXPECT_EQ(csv.rfind("xi_norm,branch_id,energy\n", 0), 0u);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(csv.back(), '\n');
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 4), "0,0,");
    EXPECT_NEAR(std::stod(line.substr(4)), 0.6, 1e-12);
    EXPECT_EQ(read_file(d / "dispersion_report.json").find('\r'), std::string::npos);
}

TEST(Cli, OracleDriftAndReliability) {
    auto d = scratch_dir("oracle");
    std::string cases = "cases = [{ id = \"el\", form = \"electrostatic_lorentz\", p1 = 1.0, p2 = 0.0, xi = 0.0, m = 1.0 }]\n";
    write_file(d / "o.toml", "schema_version = 1\n[oracle]\nreference = \"ref.json\"\n" + cases);
    // no reference yet: warning, exit 0
    ASSERT_EQ(run_cli("oracle " + (d / "o.toml").string() + " --out " + (d / "run1").string(), d / "log"), 0);
    std::filesystem::copy_file(d / "run1" / "fd_battery.json", d / "ref.json");
    EXPECT_EQ(run_cli("oracle " + (d / "o.toml").string() + " --out " + (d / "run2").string(), d / "log"), 0);
    EXPECT_EQ(read_file(d / "run1" / "fd_battery.json"), read_file(d / "run2" / "fd_battery.json"));

    // N doubled: still within the drift tolerance
    write_file(d / "o2.toml", "schema_version = 1\n[oracle]\nreference = \"ref.json\"\nn_scale = 2\n" + cases);
    EXPECT_EQ(run_cli("oracle " + (d / "o2.toml").string() + " --out " + (d / "run3").string(), d / "log"), 0);

    // a reference that disagrees by 2e-3 relative
    auto ref = load_json(d / "ref.json");
    ref["cases"][0]["eigenvalues"][0] = 0.6012;
    write_file(d / "ref.json", ref.dump(2));
    EXPECT_EQ(run_cli("oracle " + (d / "o.toml").string() + " --out " + (d / "run4").string(), d / "log"), 3);
    EXPECT_TRUE(load_json(d / "run4" / "oracle_report.json")["results"]["drift"].get<bool>());

    // L below the automatic choice: flagged, not failed
    write_file(d / "o3.toml", "schema_version = 1\n[oracle]\nreference = \"none.json\"\nhalf_length = 12.5\n" + cases);
    EXPECT_EQ(run_cli("oracle " + (d / "o3.toml").string() + " --out " + (d / "run5").string(), d / "log"), 0);
    auto r = load_json(d / "run5" / "oracle_report.json");
    EXPECT_FALSE(r["results"]["cases"][0]["reliable"].get<bool>());
    bool warned = false;
    for (const auto& w : r["warnings"]) warned |= w.get<std::string>().find("unreliable") != std::string::npos;
    EXPECT_TRUE(warned);
}

TEST(Cli, SeedMovesJitteredSamplesOnly) {
    auto d = scratch_dir("seed");
    std::string text = read_file(cfg("compact_radial_so")) + "\n[solver]\njitter = true\n";
    write_file(d / "j.toml", text);
    ASSERT_EQ(run_cli("check-ls " + (d / "j.toml").string() + " --seed 1 --out " + (d / "a").string(), d / "log"), 0);
    ASSERT_EQ(run_cli("check-ls " + (d / "j.toml").string() + " --seed 2 --out " + (d / "b").string(), d / "log"), 0);
    ASSERT_EQ(run_cli("check-ls " + (d / "j.toml").string() + " --seed 1 --out " + (d / "c").string(), d / "log"), 0);
    auto a = load_json(d / "a" / "check-ls_report.json"), b = load_json(d / "b" / "check-ls_report.json");
    EXPECT_NE(a["results"]["local"]["samples"][0]["xi"], b["results"]["local"]["samples"][0]["xi"]);
    EXPECT_EQ(a["results"]["self_adjointness"], b["results"]["self_adjointness"]);
    EXPECT_EQ(read_file(d / "a" / "check-ls_report.json"), read_file(d / "c" / "check-ls_report.json"));
}
