#pragma once

// The four CLI commands. Each writes its files into one output directory;
// every file carries the resolved configuration so a run can be repeated from
// any of its outputs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "jjqj/analysis.hpp"
#include "jjqj/config.hpp"
#include "jjqj/engine.hpp"
#include "jjqj/errors.hpp"
#include "jjqj/landau_zener.hpp"
#include "jjqj/oracle.hpp"
#include "jjqj/parallel.hpp"

namespace jjqj {

using json = nlohmann::ordered_json;

/// Receives progress and advisory messages; the CLI routes them to its logger.
using LogSink = std::function<void(const std::string&)>;

namespace io {

/// Twelve significant digits, independent of locale.
inline std::string num(double x) { return fmt::format("{:.12g}", x); }

/// The same value rounded to twelve significant digits, for JSON.
inline double round12(double x) { return std::isfinite(x) ? std::stod(num(x)) : x; }

inline json maybe(double x, bool present) { return present ? json(round12(x)) : json(nullptr); }

inline std::string embedded_config(const RunConfig& c) {
    std::string out;
    std::string line;
    for (char ch : c.to_ini()) {
        if (ch == '\n') {
            out += "#! " + line + "\n";
            line.clear();
        } else {
            line += ch;
        }
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw ConfigError("write failed for '" + path.string() + "'");
}

/// CSV text: embedded config, column header, rows.
class Csv {
public:
    Csv(const RunConfig& c, const std::vector<std::string>& columns) : text_(embedded_config(c)) {
        for (std::size_t k = 0; k < columns.size(); ++k) text_ += (k ? "," : "") + columns[k];
        text_ += "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) text_ += (k ? "," : "") + cells[k];
        text_ += "\n";
    }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

inline void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace io

/// Classification outcome of one telegraph sequence.
struct SequenceSummary {
    std::optional<BranchStats> stats;  // empty when the sequence is unimodal
    std::string unimodal_reason;
    double fidelity = std::nan("");
};

/// Without a TLS there is one branch; a microwave resonant peak would
/// otherwise be mistaken for a second one.
inline SequenceSummary summarize_sequence(const std::vector<SwitchRecord>& records, bool tls_enabled = true) {
    SequenceSummary s;
    if (!tls_enabled) {
        s.unimodal_reason = "tls.enabled = false: a bare junction has a single branch";
        return s;
    }
    try {
        s.stats = classify_branches(records);
        s.fidelity = label_fidelity(records, *s.stats);
    } catch (const UnimodalSequenceError& e) {
        s.unimodal_reason = e.what();
    }
    return s;
}

inline json summary_json(const SequenceSummary& s) {
    json j;
    if (!s.stats) {
        j["status"] = "unimodal";
        j["reason"] = s.unimodal_reason;
        return j;
    }
    const BranchStats& b = *s.stats;
    j["status"] = "bimodal";
    j["threshold_uA"] = io::round12(units::a_to_ua(b.threshold));
    j["mode_upper_uA"] = io::round12(units::a_to_ua(b.mode_upper));
    j["mode_lower_uA"] = io::round12(units::a_to_ua(b.mode_lower));
    j["mean_dwell_upper"] = io::round12(b.mean_dwell_upper);
    j["mean_dwell_lower"] = io::round12(b.mean_dwell_lower);
    j["mean_dwell"] = io::round12(b.mean_dwell);
    j["jumps"] = b.jumps;
    j["jumps_per_ramp"] = io::round12(jump_rate(b, 1.0));
    j["mean_Is_upper_uA"] = io::maybe(units::a_to_ua(b.mean_is_upper), !b.dwell_upper.empty());
    j["mean_Is_lower_uA"] = io::maybe(units::a_to_ua(b.mean_is_lower), !b.dwell_lower.empty());
    j["label_fidelity"] = io::round12(s.fidelity);
    j["dwell_upper"] = b.dwell_upper;
    j["dwell_lower"] = b.dwell_lower;
    return j;
}

inline void write_records(const std::filesystem::path& path, const RunConfig& c,
                          const std::vector<SwitchRecord>& records) {
    io::Csv csv(c, {"ramp_index", "I_s_uA", "flag", "n_relax_events"});
    for (const auto& r : records)
        csv.row({std::to_string(r.ramp_index), io::num(units::a_to_ua(r.switching_current)),
                 std::to_string(r.flag_at_switch), std::to_string(r.relax_events())});
    io::write_file(path, csv.str());
}

inline void write_labels(const std::filesystem::path& path, const RunConfig& c,
                         const std::vector<SwitchRecord>& records, const BranchStats& stats) {
    io::Csv csv(c, {"ramp_index", "branch"});
    for (std::size_t k = 0; k < records.size(); ++k)
        csv.row({std::to_string(records[k].ramp_index), to_string(stats.labels[k])});
    io::write_file(path, csv.str());
}

inline json run_header(const char* command, const RunConfig& c) {
    json j;
    j["command"] = command;
    j["master_seed"] = c.master_seed;
    j["config_ini"] = c.to_ini();
    return j;
}

/// Runs one telegraph sequence and writes records.csv, labels.csv (when
/// bimodal), summary.json and config.ini into `out`.
inline json cmd_simulate(const RunConfig& c, const std::filesystem::path& out, const LogSink& log = {}) {
    std::filesystem::create_directories(out);
    if (log) log(fmt::format("simulate: {} ramps, dimension {}, seed {}", c.ramps, c.dimension(), c.master_seed));
    const auto records = run_sequence(c.model(), c.engine());
    const auto s = summarize_sequence(records, c.tls_enabled);

    io::write_file(out / "config.ini", c.to_ini());
    write_records(out / "records.csv", c, records);
    if (s.stats) {
        write_labels(out / "labels.csv", c, records, *s.stats);
    } else {
        std::filesystem::remove(out / "labels.csv");
        if (log) log("simulate: switching currents are unimodal, labels.csv not written");
    }
    json j = run_header("simulate", c);
    j["ramps"] = records.size();
    j["classification"] = summary_json(s);
    io::write_json(out / "summary.json", j);
    return j;
}

/// Independent ramps from |0g> and the master-equation distribution for the
/// same parameters. Writes records.csv, histogram.csv, master.csv, summary.json.
inline json cmd_ensemble(const RunConfig& c, const std::filesystem::path& out, unsigned workers = 1,
                         const LogSink& log = {}) {
    std::filesystem::create_directories(out);
    const Model m = c.model();
    if (log)
        log(fmt::format("ensemble: {} trajectories, dimension {}, {} workers", c.trajectories, c.dimension(),
                        workers));
    const auto records = run_ensemble(m, c.engine(workers), c.trajectories);
    MasterOptions opts;
    opts.frame = c.frame;
    opts.grid_points = c.grid_points;
    opts.tunneling_mode = c.tunneling_mode;
    if (log) log("ensemble: integrating the master equation");
    const auto dist = integrate_master(m, c.dimension(), opts);
    const Histogram h = histogram(records, units::ua_to_a(c.bin_width_ua));
    const double tv = distribution_distance(h, dist);

    io::write_file(out / "config.ini", c.to_ini());
    write_records(out / "records.csv", c, records);
    {
        io::Csv csv(c, {"bin_lo_uA", "bin_hi_uA", "count"});
        for (std::size_t b = 0; b < h.counts.size(); ++b)
            csv.row({io::num(units::a_to_ua(h.bin_edges[b])), io::num(units::a_to_ua(h.bin_edges[b + 1])),
                     std::to_string(h.counts[b])});
        io::write_file(out / "histogram.csv", csv.str());
    }
    {
        io::Csv csv(c, {"I_uA", "density_per_uA", "survival"});
        for (std::size_t k = 0; k < dist.bias.size(); ++k)
            csv.row({io::num(units::a_to_ua(dist.bias[k])), io::num(dist.density[k] * 1e-6), io::num(dist.survival[k])});
        io::write_file(out / "master.csv", csv.str());
    }
    std::size_t peak = 0;
    for (std::size_t b = 1; b < h.counts.size(); ++b)
        if (h.counts[b] > h.counts[peak]) peak = b;

    json j = run_header("ensemble", c);
    j["trajectories"] = records.size();
    j["bin_width_uA"] = io::round12(c.bin_width_ua);
    j["tv_distance"] = io::round12(tv);
    j["histogram_mode_uA"] = io::round12(units::a_to_ua(h.bin_center(peak)));
    j["master_mode_uA"] = io::round12(units::a_to_ua(dist.mode()));
    j["master_escaped"] = io::round12(dist.escaped());
    io::write_json(out / "summary.json", j);
    return j;
}

enum class SweepAxis { rabi_mhz, ramp_rate };

inline SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "rabi_MHz") return SweepAxis::rabi_mhz;
    if (s == "ramp_rate" || s == "ramp_rate_uA_per_s") return SweepAxis::ramp_rate;
    throw ConfigError("sweep axis must be rabi_MHz or ramp_rate, got '" + s + "'");
}

/// Configuration of sweep point k: the axis value applied, seed offset by k.
inline RunConfig sweep_point(const RunConfig& base, SweepAxis axis, double value, std::uint64_t k) {
    RunConfig c = base;
    if (axis == SweepAxis::rabi_mhz) {
        c.rabi_mhz = value;
        c.i_uw_na.reset();
    } else {
        c.ramp_rate_ua_per_s = value;
    }
    c.master_seed = base.master_seed + k;
    validate(c);
    return c;
}

/// Runs cmd_simulate for each value (in parallel across points) and writes
/// sweep.csv plus one subdirectory per point.
inline json cmd_sweep(const RunConfig& base, SweepAxis axis, const std::vector<double>& values,
                      const std::filesystem::path& out, unsigned workers = 1, const LogSink& log = {}) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::filesystem::create_directories(out);
    std::vector<RunConfig> points;
    for (std::size_t k = 0; k < values.size(); ++k) points.push_back(sweep_point(base, axis, values[k], k));

    std::vector<std::vector<SwitchRecord>> runs(points.size());
    parallel_for(points.size(), workers, [&](std::uint64_t k) { runs[k] = run_sequence(points[k].model(), points[k].engine()); });

    const char* axis_name = axis == SweepAxis::rabi_mhz ? "rabi_MHz" : "ramp_rate_uA_per_s";
    io::Csv csv(base, {"value", "mean_dwell_upper", "mean_dwell_lower", "jumps", "mean_Is_upper_uA",
                       "mean_Is_lower_uA", "mean_dwell", "label_fidelity"});
    json j = run_header("sweep", base);
    j["axis"] = axis_name;
    j["points"] = json::array();
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto dir = out / fmt::format("point_{:03d}", k);
        std::filesystem::create_directories(dir);
        const auto s = summarize_sequence(runs[k], points[k].tls_enabled);
        io::write_file(dir / "config.ini", points[k].to_ini());
        write_records(dir / "records.csv", points[k], runs[k]);
        if (s.stats) write_labels(dir / "labels.csv", points[k], runs[k], *s.stats);
        json pj = run_header("simulate", points[k]);
        pj["ramps"] = runs[k].size();
        pj["classification"] = summary_json(s);
        io::write_json(dir / "summary.json", pj);

        if (s.stats) {
            const BranchStats& b = *s.stats;
            csv.row({io::num(values[k]), io::num(b.mean_dwell_upper), io::num(b.mean_dwell_lower),
                     std::to_string(b.jumps), io::num(units::a_to_ua(b.mean_is_upper)),
                     io::num(units::a_to_ua(b.mean_is_lower)), io::num(b.mean_dwell), io::num(s.fidelity)});
        } else {
            csv.row({io::num(values[k]), "nan", "nan", "nan", "nan", "nan", "nan", "nan"});
            if (log) log(fmt::format("sweep: point {} ({} = {}) is unimodal", k, axis_name, io::num(values[k])));
        }
        json entry;
        entry["value"] = io::round12(values[k]);
        entry["directory"] = dir.filename().string();
        entry["classification"] = pj["classification"];
        j["points"].push_back(entry);
    }
    io::write_file(out / "sweep.csv", csv.str());
    io::write_json(out / "summary.json", j);
    return j;
}

inline const char* lz_regime(double p) {
    if (p < 0.01) return "adiabatic regime";
    if (p > 0.99) return "diabatic regime";
    return "intermediate regime";
}

/// Crossing current, sweep rate and both crossing probabilities at the TLS crossing.
inline json cmd_lz(const RunConfig& c, const std::filesystem::path& out, const LogSink& log = {}) {
    std::filesystem::create_directories(out);
    const Model m = c.model();
    TlsParams tls = m.tls;
    tls.coupling = units::mhz_to_rad(c.coupling_mhz);
    const double crossing = resonance_current(m.junction, tls.frequency);
    const double rate = sweep_rate(m.junction, tls, m.drive);
    const double p = landau_zener_probability(tls.coupling, rate);
    const auto numeric = landau_zener_numeric(tls.coupling, rate);
    json j = run_header("lz", c);
    j["crossing_current_uA"] = io::round12(units::a_to_ua(crossing));
    j["sweep_rate_J_per_s"] = io::round12(rate);
    j["P_LZ"] = io::round12(p);
    j["P_numeric"] = io::round12(numeric.probability);
    j["scaled_coupling"] = io::round12(numeric.coupling_scaled);
    j["regime"] = lz_regime(p);
    io::write_json(out / "lz.json", j);
    if (log) log(fmt::format("lz: P_LZ = {}, numeric = {} ({})", io::num(p), io::num(numeric.probability), lz_regime(p)));
    return j;
}

}  // namespace jjqj
