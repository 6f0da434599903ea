#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "jjqj/commands.hpp"

using namespace jjqj;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("jjqj_test_" + name);
    fs::remove_all(p);
    return p;
}

/// A short, fast telegraph configuration with well separated branches.
RunConfig quick() {
    return parse_config("[junction]\neta = 0.005\n[engine]\nramps = 40\ntrajectories = 40\n[oracle]\ngrid_points = 300\n");
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
    ConfigNotes notes;
    const RunConfig c = parse_config("", {}, &notes);
    EXPECT_DOUBLE_EQ(c.i0_ua, 35.9);
    EXPECT_DOUBLE_EQ(c.c_pf, 4.0);
    EXPECT_DOUBLE_EQ(c.f_drive_ghz, 9.02);
    EXPECT_DOUBLE_EQ(c.f_tls_ghz, 8.7);
    EXPECT_DOUBLE_EQ(c.coupling_mhz, 200.0);
    EXPECT_DOUBLE_EQ(c.ramp_rate_ua_per_s, 4.5e3);
    ASSERT_TRUE(c.rabi_mhz.has_value());
    EXPECT_DOUBLE_EQ(*c.rabi_mhz, 10.0);
    EXPECT_NEAR(relaxation_rate(JunctionParams{c.junction()}, 35.6e-6), 0.6e6, 1.0);
    EXPECT_TRUE(c.tls_enabled);
    EXPECT_EQ(c.dimension(), 4);
    EXPECT_GE(notes.defaults.size(), 20u);
    EXPECT_TRUE(notes.warnings.empty());
}

TEST(Config, CommentsAndValues) {
    const RunConfig c = parse_config("# header\n[junction]\nI0_uA = 36.0 \n; other comment\n[drive]\nI_uw_nA = 2.5\n");
    EXPECT_DOUBLE_EQ(c.i0_ua, 36.0);
    EXPECT_FALSE(c.rabi_mhz.has_value());
    EXPECT_DOUBLE_EQ(*c.i_uw_na, 2.5);
    EXPECT_DOUBLE_EQ(c.microwave_amplitude(), 2.5e-9);
}

TEST(Config, RabiConvertsAtResonance) {
    const RunConfig c = parse_config("[drive]\nrabi_MHz = 2\n");
    const Model m = c.model();
    const double ires = resonance_current(m.junction, m.drive.microwave_frequency);
    EXPECT_NEAR(rabi_frequency(m.junction, m.drive.microwave_amplitude, ires), two_pi * 2e6, 1e-6);
}

TEST(Config, NegativeEtaNamesKey) {
    try {
        parse_config("[junction]\neta = -0.1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("eta"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 2);
    }
}

TEST(Config, RabiAndMicrowaveCurrentAreExclusive) {
    EXPECT_THROW(parse_config("[drive]\nrabi_MHz = 2\nI_uw_nA = 1\n"), ConfigError);
}

TEST(Config, ParseErrorReportsLine) {
    try {
        parse_config("[junction]\nI0_uA = 35\n[broken\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Config, UnknownKeysAndBadValues) {
    EXPECT_THROW(parse_config("[junction]\nIc = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[plot]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[junction]\nC_pF = four\n"), ConfigError);
    EXPECT_THROW(parse_config("[engine]\nframe = rotating\n"), ConfigError);
    EXPECT_THROW(parse_config("[engine]\ndimension = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[tls]\nenabled = false\n[engine]\ninitial_flag = 1\n"), ConfigError);
    EXPECT_NO_THROW(parse_config("[tls]\nenabled = false\n[engine]\ndimension = 2\n"));
}

TEST(Config, OverridesApplyAfterFile) {
    const RunConfig c = parse_config("[engine]\nmaster_seed = 3\n", {"engine.master_seed=9", "junction.eta = 0.004"});
    EXPECT_EQ(c.master_seed, 9u);
    EXPECT_DOUBLE_EQ(c.eta, 0.004);
    EXPECT_THROW(parse_config("", {"eta=1"}), ConfigError);
}

TEST(Config, WarnsOnUnusualCoupling) {
    ConfigNotes notes;
    parse_config("[tls]\ncoupling_MHz = 5\n", {}, &notes);
    ASSERT_EQ(notes.warnings.size(), 1u);
    EXPECT_NE(notes.warnings[0].find("coupling"), std::string::npos);
}

TEST(Config, IniRoundTripIsExact) {
    RunConfig c = parse_config("[junction]\nI0_uA = 35.912345678901\neta = 0.0031\n[drive]\nI_uw_nA = 1.7\n");
    c.master_seed = 12345;
    const RunConfig d = parse_config(c.to_ini());
    EXPECT_EQ(c.to_ini(), d.to_ini());
    EXPECT_EQ(d.i0_ua, c.i0_ua);
    EXPECT_EQ(d.eta, c.eta);
    EXPECT_EQ(*d.i_uw_na, *c.i_uw_na);
}

TEST(Config, UnitConversionsRoundTrip) {
    for (double x : {1e-3, 0.6, 35.9, 9.02, 4.5e3, 416.6666666666667}) {
        EXPECT_NEAR(units::a_to_ua(units::ua_to_a(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::rad_to_ghz(units::ghz_to_rad(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::rad_to_mhz(units::mhz_to_rad(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::f_to_pf(units::pf_to_f(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::ohm_to_kohm(units::kohm_to_ohm(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::per_s_to_per_us(units::per_us_to_per_s(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::s_to_ns(units::ns_to_s(x)), x, 1e-12 * x);
        EXPECT_NEAR(units::a_to_na(units::na_to_a(x)), x, 1e-12 * x);
    }
}

TEST(Config, EmbeddedConfigIsRecovered) {
    const RunConfig c = quick();
    const std::string text = io::embedded_config(c) + "ramp_index,I_s_uA\n0,35.6\n";
    EXPECT_EQ(parse_config(text).to_ini(), c.to_ini());
}

TEST(Commands, NumbersUseTwelveDigits) {
    EXPECT_EQ(io::num(35.123456789012345), "35.123456789");
    EXPECT_EQ(io::num(0.1), "0.1");
    EXPECT_EQ(io::num(1e-20), "1e-20");
}

TEST(Commands, SimulateIsReproducible) {
    const RunConfig c = quick();
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    cmd_simulate(c, a);
    cmd_simulate(c, b);
    for (const char* f : {"records.csv", "summary.json", "config.ini"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    const std::string records = slurp(a / "records.csv");
    EXPECT_NE(records.find("ramp_index,I_s_uA,flag,n_relax_events\n"), std::string::npos);
    // Rerunning from the embedded config reproduces the file.
    const RunConfig again = parse_config(records);
    const auto r = scratch("sim_r");
    cmd_simulate(again, r);
    EXPECT_EQ(slurp(r / "records.csv"), records);
}

TEST(Commands, SimulateWithoutTlsIsUnimodal) {
    RunConfig c = parse_config("[tls]\nenabled = false\n[engine]\nramps = 30\n");
    const auto out = scratch("sim_notls");
    const json j = cmd_simulate(c, out);
    EXPECT_EQ(j["classification"]["status"], "unimodal");
    EXPECT_FALSE(fs::exists(out / "labels.csv"));
    EXPECT_TRUE(fs::exists(out / "records.csv"));
}

TEST(Commands, EnsembleWorkerCountDoesNotMatter) {
    const RunConfig c = parse_config("[tls]\nenabled = false\n[engine]\ntrajectories = 30\n[oracle]\ngrid_points = 300\n[drive]\nrabi_MHz = 0\n");
    const auto a = scratch("ens_a"), b = scratch("ens_b");
    const json ja = cmd_ensemble(c, a, 1);
    cmd_ensemble(c, b, 3);
    for (const char* f : {"records.csv", "histogram.csv", "master.csv", "summary.json"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_TRUE(ja.contains("tv_distance"));
    EXPECT_NE(slurp(a / "histogram.csv").find("bin_lo_uA,bin_hi_uA,count\n"), std::string::npos);
    EXPECT_NE(slurp(a / "master.csv").find("I_uA,density_per_uA,survival\n"), std::string::npos);
}

TEST(Commands, SingletonSweepEqualsSimulate) {
    const RunConfig c = quick();
    const auto s = scratch("sweep_one"), m = scratch("sim_one");
    cmd_sweep(c, SweepAxis::rabi_mhz, {10.0}, s, 1);
    cmd_simulate(c, m);
    EXPECT_EQ(slurp(s / "point_000" / "records.csv"), slurp(m / "records.csv"));
    EXPECT_EQ(slurp(s / "point_000" / "summary.json"), slurp(m / "summary.json"));
    const std::string csv = slurp(s / "sweep.csv");
    EXPECT_NE(csv.find("value,mean_dwell_upper,mean_dwell_lower,jumps,mean_Is_upper_uA,mean_Is_lower_uA"),
              std::string::npos);
}

TEST(Commands, SweepWorkerCountDoesNotMatter) {
    const RunConfig c = quick();
    const auto a = scratch("sweep_a"), b = scratch("sweep_b");
    cmd_sweep(c, SweepAxis::ramp_rate, {4.5e3, 8e3}, a, 1);
    cmd_sweep(c, SweepAxis::ramp_rate, {4.5e3, 8e3}, b, 2);
    EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
    EXPECT_EQ(slurp(a / "point_001" / "records.csv"), slurp(b / "point_001" / "records.csv"));
    EXPECT_THROW(parse_sweep_axis("temperature"), ConfigError);
}

TEST(Commands, LzReport) {
    const auto out = scratch("lz");
    const json d = cmd_lz(parse_config(""), out);
    EXPECT_EQ(d["regime"], "adiabatic regime");
    EXPECT_LT(d["P_LZ"].get<double>(), 1e-10);
    EXPECT_NEAR(d["crossing_current_uA"].get<double>(), 35.626919752, 1e-8);
    const json z = cmd_lz(parse_config("[tls]\ncoupling_MHz = 0\n"), out);
    EXPECT_EQ(z["P_LZ"].get<double>(), 1.0);
    EXPECT_EQ(z["regime"], "diabatic regime");
    EXPECT_TRUE(fs::exists(out / "lz.json"));
}

TEST(Commands, ShippedMidRegimeConfig) {
    const RunConfig c = load_config((fs::path(JJQJ_SOURCE_DIR) / "configs" / "lz_midregime.ini").string());
    const json d = cmd_lz(c, scratch("lz_mid"));
    EXPECT_EQ(d["regime"], "intermediate regime");
    EXPECT_NEAR(d["P_numeric"].get<double>(), d["P_LZ"].get<double>(), 0.02);
}

TEST(Commands, ShippedConfigsLoad) {
    for (const auto& e : fs::directory_iterator(fs::path(JJQJ_SOURCE_DIR) / "configs"))
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
}
