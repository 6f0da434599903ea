#pragma once

// Run configuration. Files are flat INI sections in laboratory units:
//
//   [junction]  I0_uA, C_pF, R_kOhm, T_K, eta
//   [tls]       enabled, f_TLS_GHz, coupling_MHz, relaxation_per_us
//   [drive]     f_drive_GHz, rabi_MHz | I_uw_nA, ramp_rate_uA_per_s, dc_start_uA
//   [engine]    dimension, frame, integrator, master_seed, ramps, trajectories,
//               dt_max_ns, dt_rate_cap, step_ceiling, initial_flag, tunneling_mode
//   [oracle]    grid_points
//   [output]    directory, bin_width_uA
//
// Full-line comments start with '#' or ';'. Everything is converted to SI with
// angular frequencies before it reaches the physics.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "jjqj/constants.hpp"
#include "jjqj/engine.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/hamiltonian.hpp"
#include "jjqj/physics.hpp"

namespace jjqj {

/// Lab-unit <-> SI conversions used at the configuration boundary.
namespace units {
inline constexpr double micro = 1e-6;
inline double ua_to_a(double x) { return x * 1e-6; }
inline double a_to_ua(double x) { return x * 1e6; }
inline double na_to_a(double x) { return x * 1e-9; }
inline double a_to_na(double x) { return x * 1e9; }
inline double pf_to_f(double x) { return x * 1e-12; }
inline double f_to_pf(double x) { return x * 1e12; }
inline double kohm_to_ohm(double x) { return x * 1e3; }
inline double ohm_to_kohm(double x) { return x * 1e-3; }
inline double ghz_to_rad(double x) { return two_pi * x * 1e9; }
inline double rad_to_ghz(double x) { return x / (two_pi * 1e9); }
inline double mhz_to_rad(double x) { return two_pi * x * 1e6; }
inline double rad_to_mhz(double x) { return x / (two_pi * 1e6); }
inline double per_us_to_per_s(double x) { return x * 1e6; }
inline double per_s_to_per_us(double x) { return x * 1e-6; }
inline double ns_to_s(double x) { return x * 1e-9; }
inline double s_to_ns(double x) { return x * 1e9; }
}  // namespace units

/// Shortest decimal text that parses back to the same double.
inline std::string exact_number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// Resolved configuration in laboratory units, as written to and read from files.
struct RunConfig {
    // junction
    double i0_ua = 35.9;
    double c_pf = 4.0;
    double r_kohm = 1.0 / (0.6e6 * 4.0e-12) * 1e-3;
    double t_k = 0.018;
    double eta = default_tls_suppression;
    // tls
    bool tls_enabled = true;
    double f_tls_ghz = 8.7;
    double coupling_mhz = 200.0;
    double tls_relaxation_per_us = 0.0;
    // drive
    double f_drive_ghz = 9.02;
    std::optional<double> rabi_mhz = 10.0;
    std::optional<double> i_uw_na;
    double ramp_rate_ua_per_s = 4.5e3;
    double dc_start_ua = 35.35;
    // engine
    Frame frame = Frame::rwa;
    Integrator integrator = Integrator::exponential;
    std::uint64_t master_seed = 1;
    std::uint64_t ramps = 2000;
    std::uint64_t trajectories = 10000;
    double dt_max_ns = 5.0;
    double dt_rate_cap = 0.05;
    std::uint64_t step_ceiling = 1'000'000'000;
    int initial_flag = 0;
    TunnelingMode tunneling_mode = TunnelingMode::analytic;
    // oracle
    std::uint64_t grid_points = 20000;
    // output
    std::string directory = "out";
    double bin_width_ua = 0.01;

    int dimension() const { return tls_enabled ? 4 : 2; }

    JunctionParams junction() const {
        JunctionParams p;
        p.critical_current = units::ua_to_a(i0_ua);
        p.capacitance = units::pf_to_f(c_pf);
        p.shunt_resistance = units::kohm_to_ohm(r_kohm);
        p.temperature = t_k;
        p.tls_critical_suppression = eta;
        return p;
    }

    /// Microwave amplitude (A). A Rabi frequency is converted at the bias
    /// where the splitting matches the drive.
    double microwave_amplitude() const {
        if (i_uw_na) return units::na_to_a(*i_uw_na);
        const JunctionParams p = junction();
        const double w = units::ghz_to_rad(f_drive_ghz);
        const double bias = resonance_current(p, w);
        return microwave_amplitude_for_rabi(p, units::mhz_to_rad(*rabi_mhz), level_splitting(p, bias));
    }

    Model model() const {
        Model m;
        m.junction = junction();
        m.tls.frequency = units::ghz_to_rad(f_tls_ghz);
        m.tls.coupling = tls_enabled ? units::mhz_to_rad(coupling_mhz) : 0.0;
        m.tls.relaxation = units::per_us_to_per_s(tls_relaxation_per_us);
        m.drive.dc_start = units::ua_to_a(dc_start_ua);
        m.drive.ramp_rate = units::ua_to_a(ramp_rate_ua_per_s);
        m.drive.microwave_frequency = units::ghz_to_rad(f_drive_ghz);
        m.drive.microwave_amplitude = microwave_amplitude();
        return m;
    }

    EngineConfig engine(unsigned workers = 1) const {
        EngineConfig e;
        e.dimension = dimension();
        e.frame = frame;
        e.integrator = integrator;
        e.dt_max = units::ns_to_s(dt_max_ns);
        e.dt_rate_cap = dt_rate_cap;
        e.master_seed = master_seed;
        e.ramps = ramps;
        e.trajectories = trajectories;
        e.step_ceiling = step_ceiling;
        e.initial_flag = initial_flag;
        e.tunneling_mode = tunneling_mode;
        e.workers = workers;
        return e;
    }

    /// Canonical INI text; loading it gives back an identical configuration.
    std::string to_ini() const {
        std::ostringstream o;
        auto num = [&](const char* k, double v) { o << k << " = " << exact_number(v) << "\n"; };
        auto uint = [&](const char* k, std::uint64_t v) { o << k << " = " << v << "\n"; };
        o << "[junction]\n";
        num("I0_uA", i0_ua);
        num("C_pF", c_pf);
        num("R_kOhm", r_kohm);
        num("T_K", t_k);
        num("eta", eta);
        o << "[tls]\n";
        o << "enabled = " << (tls_enabled ? "true" : "false") << "\n";
        num("f_TLS_GHz", f_tls_ghz);
        num("coupling_MHz", coupling_mhz);
        num("relaxation_per_us", tls_relaxation_per_us);
        o << "[drive]\n";
        num("f_drive_GHz", f_drive_ghz);
        if (rabi_mhz) num("rabi_MHz", *rabi_mhz);
        if (i_uw_na) num("I_uw_nA", *i_uw_na);
        num("ramp_rate_uA_per_s", ramp_rate_ua_per_s);
        num("dc_start_uA", dc_start_ua);
        o << "[engine]\n";
        o << "dimension = " << dimension() << "\n";
        o << "frame = " << to_string(frame) << "\n";
        o << "integrator = " << to_string(integrator) << "\n";
        uint("master_seed", master_seed);
        uint("ramps", ramps);
        uint("trajectories", trajectories);
        num("dt_max_ns", dt_max_ns);
        num("dt_rate_cap", dt_rate_cap);
        uint("step_ceiling", step_ceiling);
        o << "initial_flag = " << initial_flag << "\n";
        o << "tunneling_mode = " << (tunneling_mode == TunnelingMode::analytic ? "analytic" : "quadrature") << "\n";
        o << "[oracle]\n";
        uint("grid_points", grid_points);
        o << "[output]\n";
        o << "directory = " << directory << "\n";
        num("bin_width_uA", bin_width_ua);
        return o.str();
    }
};

/// Messages produced while resolving a configuration, for the caller to log.
struct ConfigNotes {
    std::vector<std::string> defaults;  // "section.key = value" for every default applied
    std::vector<std::string> warnings;
};

namespace detail {

using Tree = boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"junction", {"I0_uA", "C_pF", "R_kOhm", "T_K", "eta"}},
        {"tls", {"enabled", "f_TLS_GHz", "coupling_MHz", "relaxation_per_us"}},
        {"drive", {"f_drive_GHz", "rabi_MHz", "I_uw_nA", "ramp_rate_uA_per_s", "dc_start_uA"}},
        {"engine",
         {"dimension", "frame", "integrator", "master_seed", "ramps", "trajectories", "dt_max_ns", "dt_rate_cap",
          "step_ceiling", "initial_flag", "tunneling_mode"}},
        {"oracle", {"grid_points"}},
        {"output", {"directory", "bin_width_uA"}},
    };
    return keys;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

}  // namespace detail

inline void validate(const RunConfig& c, ConfigNotes* notes = nullptr);

/// Keeps only the "#! " lines of a file written by this tool, or returns the
/// text unchanged when there are none.
inline std::string extract_embedded_config(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    bool found = false;
    while (std::getline(in, line)) {
        if (line.rfind("#! ", 0) == 0) {
            out += line.substr(3) + "\n";
            found = true;
        }
    }
    return found ? out : text;
}

/// Parses INI text (plus "section.key=value" overrides) into a validated RunConfig.
inline RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                              ConfigNotes* notes = nullptr) {
    detail::Tree tree;
    {
        std::istringstream in(extract_embedded_config(text));
        try {
            boost::property_tree::ini_parser::read_ini(in, tree);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
        }
    }
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override '" + ov + "' must look like section.key=value");
        tree.put(boost::property_tree::ptree::path_type(detail::trim(ov.substr(0, eq)), '.'),
                 detail::trim(ov.substr(eq + 1)));
    }

    for (const auto& [section, body] : tree) {
        const auto it = detail::known_keys().find(section);
        if (it == detail::known_keys().end()) {
            if (body.empty()) throw ConfigError("'" + section + "': keys must belong to a section");
            throw ConfigError("unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
    }

    RunConfig c;
    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        const auto sec = tree.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return *v;
    };
    auto note_default = [&](const std::string& name, const std::string& value) {
        if (notes) notes->defaults.push_back(name + " = " + value);
    };
    auto number = [&](const char* section, const char* key, double& field) {
        const std::string name = std::string(section) + "." + key;
        if (auto v = get(section, key))
            field = detail::parse_double(name, *v);
        else
            note_default(name, exact_number(field));
    };
    auto integer = [&](const char* section, const char* key, std::uint64_t& field) {
        const std::string name = std::string(section) + "." + key;
        if (auto v = get(section, key))
            field = detail::parse_uint(name, *v);
        else
            note_default(name, std::to_string(field));
    };

    number("junction", "I0_uA", c.i0_ua);
    number("junction", "C_pF", c.c_pf);
    number("junction", "R_kOhm", c.r_kohm);
    number("junction", "T_K", c.t_k);
    number("junction", "eta", c.eta);

    if (auto v = get("tls", "enabled"))
        c.tls_enabled = detail::parse_bool("tls.enabled", *v);
    else
        note_default("tls.enabled", "true");
    number("tls", "f_TLS_GHz", c.f_tls_ghz);
    number("tls", "coupling_MHz", c.coupling_mhz);
    number("tls", "relaxation_per_us", c.tls_relaxation_per_us);

    number("drive", "f_drive_GHz", c.f_drive_ghz);
    {
        const auto rabi = get("drive", "rabi_MHz");
        const auto iuw = get("drive", "I_uw_nA");
        if (rabi && iuw) throw ConfigError("drive.rabi_MHz and drive.I_uw_nA are mutually exclusive; give exactly one");
        if (iuw) {
            c.rabi_mhz.reset();
            c.i_uw_na = detail::parse_double("drive.I_uw_nA", *iuw);
        } else if (rabi) {
            c.rabi_mhz = detail::parse_double("drive.rabi_MHz", *rabi);
        } else {
            note_default("drive.rabi_MHz", exact_number(*c.rabi_mhz));
        }
    }
    number("drive", "ramp_rate_uA_per_s", c.ramp_rate_ua_per_s);
    number("drive", "dc_start_uA", c.dc_start_ua);

    if (auto v = get("engine", "dimension")) {
        const auto d = detail::parse_uint("engine.dimension", *v);
        if (d != static_cast<std::uint64_t>(c.dimension()))
            throw ConfigError("engine.dimension: must be " + std::to_string(c.dimension()) +
                              " when tls.enabled = " + (c.tls_enabled ? "true" : "false"));
    }
    if (auto v = get("engine", "frame")) {
        const std::string f = detail::trim(*v);
        if (f == "rwa") c.frame = Frame::rwa;
        else if (f == "lab") c.frame = Frame::lab;
        else throw ConfigError("engine.frame: expected lab or rwa, got '" + f + "'");
    } else {
        note_default("engine.frame", "rwa");
    }
    if (auto v = get("engine", "integrator")) {
        const std::string f = detail::trim(*v);
        if (f == "exponential") c.integrator = Integrator::exponential;
        else if (f == "rk4") c.integrator = Integrator::rk4;
        else throw ConfigError("engine.integrator: expected exponential or rk4, got '" + f + "'");
    } else {
        note_default("engine.integrator", "exponential");
    }
    integer("engine", "master_seed", c.master_seed);
    integer("engine", "ramps", c.ramps);
    integer("engine", "trajectories", c.trajectories);
    number("engine", "dt_max_ns", c.dt_max_ns);
    number("engine", "dt_rate_cap", c.dt_rate_cap);
    integer("engine", "step_ceiling", c.step_ceiling);
    {
        std::uint64_t flag = static_cast<std::uint64_t>(c.initial_flag);
        integer("engine", "initial_flag", flag);
        if (flag > 1) throw ConfigError("engine.initial_flag: must be 0 or 1");
        c.initial_flag = static_cast<int>(flag);
    }
    if (auto v = get("engine", "tunneling_mode")) {
        const std::string f = detail::trim(*v);
        if (f == "analytic") c.tunneling_mode = TunnelingMode::analytic;
        else if (f == "quadrature") c.tunneling_mode = TunnelingMode::quadrature;
        else throw ConfigError("engine.tunneling_mode: expected analytic or quadrature, got '" + f + "'");
    } else {
        note_default("engine.tunneling_mode", "analytic");
    }
    integer("oracle", "grid_points", c.grid_points);
    if (auto v = get("output", "directory"))
        c.directory = detail::trim(*v);
    else
        note_default("output.directory", c.directory);
    number("output", "bin_width_uA", c.bin_width_ua);

    validate(c, notes);
    return c;
}

/// Range checks naming the offending key, plus advisory warnings.
inline void validate(const RunConfig& c, ConfigNotes* notes) {
    auto require = [](bool ok, const std::string& key, const std::string& rule) {
        if (!ok) throw ConfigError(key + ": " + rule);
    };
    require(c.i0_ua > 0.0, "junction.I0_uA", "must be > 0");
    require(c.c_pf > 0.0, "junction.C_pF", "must be > 0");
    require(c.r_kohm > 0.0, "junction.R_kOhm", "must be > 0");
    require(c.t_k >= 0.0, "junction.T_K", "must be >= 0");
    require(c.eta >= 0.0 && c.eta <= 0.1, "junction.eta", "must lie in [0, 0.1]");
    require(c.f_tls_ghz > 0.0, "tls.f_TLS_GHz", "must be > 0");
    require(c.coupling_mhz >= 0.0, "tls.coupling_MHz", "must be >= 0");
    require(c.tls_relaxation_per_us >= 0.0, "tls.relaxation_per_us", "must be >= 0");
    require(c.f_drive_ghz > 0.0, "drive.f_drive_GHz", "must be > 0");
    require(c.rabi_mhz.has_value() != c.i_uw_na.has_value(), "drive.rabi_MHz",
            "exactly one of rabi_MHz and I_uw_nA must be given");
    if (c.rabi_mhz) require(*c.rabi_mhz >= 0.0, "drive.rabi_MHz", "must be >= 0");
    if (c.i_uw_na) require(*c.i_uw_na >= 0.0, "drive.I_uw_nA", "must be >= 0");
    require(c.ramp_rate_ua_per_s > 0.0, "drive.ramp_rate_uA_per_s", "must be > 0");
    require(c.dc_start_ua >= 0.0 && c.dc_start_ua < c.i0_ua, "drive.dc_start_uA", "must lie in [0, I0_uA)");
    require(c.dt_max_ns > 0.0, "engine.dt_max_ns", "must be > 0");
    require(c.dt_rate_cap > 0.0 && c.dt_rate_cap < 1.0, "engine.dt_rate_cap", "must lie in (0, 1)");
    require(c.ramps >= 1, "engine.ramps", "must be >= 1");
    require(c.trajectories >= 1, "engine.trajectories", "must be >= 1");
    require(c.step_ceiling >= 1, "engine.step_ceiling", "must be >= 1");
    require(c.tls_enabled || c.initial_flag == 0, "engine.initial_flag", "must be 0 when tls.enabled = false");
    require(c.grid_points >= 2, "oracle.grid_points", "must be >= 2");
    require(!c.directory.empty(), "output.directory", "must not be empty");
    require(c.bin_width_ua > 0.0, "output.bin_width_uA", "must be > 0");

    if (!notes) return;
    const Model m = c.model();
    if (c.tls_enabled && !m.tls.coupling_in_typical_range())
        notes->warnings.push_back("tls.coupling_MHz = " + exact_number(c.coupling_mhz) +
                                  " lies outside the usual 20-200 MHz range");
    if (c.frame == Frame::rwa) {
        const double bias = resonance_current(m.junction, m.drive.microwave_frequency);
        const double ratio = rwa_validity_ratio(m.junction, m.drive, bias, c.tls_enabled ? &m.tls : nullptr);
        if (ratio > 0.1)
            notes->warnings.push_back("rotating-wave frame is questionable here: largest coupling/detuning is " +
                                      exact_number(ratio) + " of the drive frequency");
    }
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                             ConfigNotes* notes = nullptr) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides, notes);
}

}  // namespace jjqj
