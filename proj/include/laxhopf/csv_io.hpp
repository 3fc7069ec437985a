#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "laxhopf/coordinate_transform.hpp"
#include "laxhopf/ingestion.hpp"
#include "laxhopf/scenario_config.hpp"
#include "laxhopf/solver.hpp"
#include "laxhopf/state_reconstruction.hpp"

namespace laxhopf {

using json = nlohmann::json;

namespace io_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("cannot parse ") + what + " from '" + s + "'");
    }
}

inline std::string format_number(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    return out;
}

inline void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace io_detail

/// FNV-1a hash of a file's bytes, hex-encoded; recorded in run manifests.
inline std::string file_content_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

// --- probe / detector CSV -----------------------------------------------------
//
// Probe CSV:    header `vehicle_id,time_s,position_m,speed_mps` (speed column
//               optional), UTF-8, LF line endings, '.' decimal separator.
// Detector CSV: header `time_s,cumulative_count`.
// Positions in miles are converted at read time (1 mile = 1609.344 m) with the
// origin postmile taken from the configuration.

inline std::vector<ProbeRecord> read_probe_csv(const std::string& path,
                                               const ScenarioConfig& config) {
    auto in = io_detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + " is empty");
    io_detail::strip_cr(line);
    const auto header = io_detail::split_csv_line(line);
    const bool has_speed = header.size() == 4 && header[3] == "speed_mps";
    if (!(header.size() >= 3 && header[0] == "vehicle_id" && header[1] == "time_s" &&
          header[2] == "position_m" && (header.size() == 3 || has_speed))) {
        throw ParseError(path + ": expected header vehicle_id,time_s,position_m[,speed_mps]");
    }
    std::vector<ProbeRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        io_detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = io_detail::split_csv_line(line);
        if (fields.size() < 3) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": too few fields");
        }
        ProbeRecord r;
        r.vehicle_id = fields[0];
        r.time = io_detail::parse_double(fields[1], "time_s");
        r.position = config.position_to_meters(io_detail::parse_double(fields[2], "position_m"));
        if (has_speed && fields.size() >= 4 && !fields[3].empty()) {
            r.speed = io_detail::parse_double(fields[3], "speed_mps");
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline void write_probe_csv(const std::string& path, std::span<const ProbeTrack> tracks) {
    auto out = io_detail::open_output(path);
    out << "vehicle_id,time_s,position_m\n";
    for (const ProbeTrack& track : tracks) {
        for (std::size_t i = 0; i < track.size(); ++i) {
            out << track.vehicle_id << ',' << io_detail::format_number(track.times[i]) << ','
                << io_detail::format_number(track.positions[i]) << '\n';
        }
    }
}

inline std::vector<DetectorRecord> read_detector_csv(const std::string& path) {
    auto in = io_detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + " is empty");
    io_detail::strip_cr(line);
    if (line != "time_s,cumulative_count") {
        throw ParseError(path + ": expected header time_s,cumulative_count");
    }
    std::vector<DetectorRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        io_detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = io_detail::split_csv_line(line);
        if (fields.size() != 2) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected two fields");
        }
        DetectorRecord r;
        r.time = io_detail::parse_double(fields[0], "time_s");
        r.cumulative_count = io_detail::parse_double(fields[1], "cumulative_count");
        if (!records.empty() && r.cumulative_count < records.back().cumulative_count) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": counts must not decrease");
        }
        records.push_back(r);
    }
    return records;
}

inline void write_detector_csv(const std::string& path, std::span<const DetectorRecord> records) {
    auto out = io_detail::open_output(path);
    out << "time_s,cumulative_count\n";
    for (const DetectorRecord& r : records) {
        out << io_detail::format_number(r.time) << ',' << io_detail::format_number(r.cumulative_count)
            << '\n';
    }
}

// --- grid CSV -------------------------------------------------------------------
//
// Header row: `t`, then the label values. Body rows: the time, then the
// solution values; an unreachable cell is an empty field. The Moskowitz
// surface uses the same layout with positions as columns and counts as values.

inline void write_grid_csv(const std::string& path, const GridField& grid) {
    auto out = io_detail::open_output(path);
    out << 't';
    for (double n : grid.labels) out << ',' << io_detail::format_number(n);
    out << '\n';
    for (std::size_t it = 0; it < grid.times.size(); ++it) {
        out << io_detail::format_number(grid.times[it]);
        for (std::size_t in = 0; in < grid.labels.size(); ++in) {
            const Evaluation& e = grid.at(it, in);
            out << ',';
            if (e.finite()) out << io_detail::format_number(e.value);
        }
        out << '\n';
    }
}

inline void write_moskowitz_csv(const std::string& path, const SampledMoskowitz& surface) {
    auto out = io_detail::open_output(path);
    out << 't';
    for (double x : surface.positions) out << ',' << io_detail::format_number(x);
    out << '\n';
    for (std::size_t it = 0; it < surface.times.size(); ++it) {
        out << io_detail::format_number(surface.times[it]);
        for (std::size_t ix = 0; ix < surface.positions.size(); ++ix) {
            const double v = surface.at(it, ix);
            out << ',';
            if (std::isfinite(v)) out << io_detail::format_number(v);
        }
        out << '\n';
    }
}

inline void write_velocity_csv(const std::string& path, const VelocityField& field) {
    auto out = io_detail::open_output(path);
    out << 't';
    for (double n : field.labels) out << ',' << io_detail::format_number(n);
    out << '\n';
    for (std::size_t it = 0; it < field.times.size(); ++it) {
        out << io_detail::format_number(field.times[it]);
        for (std::size_t in = 0; in < field.labels.size(); ++in) {
            const double v = field.at(it, in);
            out << ',';
            if (std::isfinite(v)) out << io_detail::format_number(v);
        }
        out << '\n';
    }
}

/// Trajectories CSV: one row per sample, columns `n,t_s,x_m`, ordered by label
/// then time.
inline void write_trajectories_csv(const std::string& path, std::span<const Trajectory> trajs) {
    auto out = io_detail::open_output(path);
    out << "n,t_s,x_m\n";
    for (const Trajectory& traj : trajs) {
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            out << io_detail::format_number(traj.label) << ','
                << io_detail::format_number(traj.times[i]) << ','
                << io_detail::format_number(traj.positions[i]) << '\n';
        }
    }
}

/// Finite fraction, extrema and attaining-condition histogram of a solved grid.
inline json grid_summary(const GridField& grid) {
    std::size_t finite = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::map<std::size_t, std::size_t> histogram;
    for (const Evaluation& e : grid.cells) {
        if (!e.finite()) continue;
        ++finite;
        lo = std::min(lo, e.value);
        hi = std::max(hi, e.value);
        if (e.condition) ++histogram[*e.condition];
    }
    json hist = json::object();
    for (const auto& [idx, count] : histogram) hist[std::to_string(idx)] = count;
    json out{{"cells", grid.cells.size()},
             {"finite_fraction",
              grid.cells.empty() ? 0.0 : static_cast<double>(finite) / grid.cells.size()},
             {"attaining_condition_histogram", hist}};
    if (finite > 0) {
        out["min_value"] = lo;
        out["max_value"] = hi;
    }
    return out;
}

// --- condition manifest (JSON) --------------------------------------------------

inline json condition_to_json(const ValueCondition& vc) {
    json j;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, InitialCondition>) {
                j = json{{"type", "initial"},
                         {"t0", c.t0},
                         {"labels", c.labels},
                         {"spacings", c.spacings},
                         {"anchor_x", c.value_at(c.labels.front())}};
            } else if constexpr (std::is_same_v<T, UpstreamCondition> ||
                                 std::is_same_v<T, DownstreamCondition>) {
                j = json{{"type", std::is_same_v<T, UpstreamCondition> ? "upstream" : "downstream"},
                         {"label", c.label},
                         {"times", c.times},
                         {"speeds", c.speeds},
                         {"anchor_x", c.value_at(c.times.front())}};
            } else if constexpr (std::is_same_v<T, InternalCondition>) {
                j = json{{"type", "internal"},    {"position", c.position},
                         {"speed", c.speed},      {"t_min", c.t_min},
                         {"t_max", c.t_max},      {"n_min", c.n_min},
                         {"label_rate", c.label_rate}};
            } else {
                json segs = json::array();
                for (const InternalCondition& seg : c.segments) {
                    segs.push_back(condition_to_json(ValueCondition(seg)));
                }
                j = json{{"type", "internal_chain"}, {"segments", segs}};
            }
        },
        vc);
    return j;
}

inline ValueCondition condition_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "initial") {
        return build_initial(j.at("t0").get<double>(), j.at("anchor_x").get<double>(),
                             j.at("labels").get<std::vector<double>>(),
                             j.at("spacings").get<std::vector<double>>());
    }
    if (type == "upstream") {
        return build_upstream(j.at("label").get<double>(), j.at("anchor_x").get<double>(),
                              j.at("times").get<std::vector<double>>(),
                              j.at("speeds").get<std::vector<double>>());
    }
    if (type == "downstream") {
        return build_downstream(j.at("label").get<double>(), j.at("anchor_x").get<double>(),
                                j.at("times").get<std::vector<double>>(),
                                j.at("speeds").get<std::vector<double>>());
    }
    if (type == "internal") {
        return make_internal(j.at("position").get<double>(), j.at("speed").get<double>(),
                             j.at("t_min").get<double>(), j.at("t_max").get<double>(),
                             j.at("n_min").get<double>(), j.at("label_rate").get<double>());
    }
    if (type == "internal_chain") {
        InternalChain chain;
        for (const json& seg : j.at("segments")) {
            chain.segments.push_back(std::get<InternalCondition>(condition_from_json(seg)));
        }
        return chain;
    }
    throw ParseError("unknown condition type '" + type + "'");
}

/// Complete description of a solved field: diagram, domain, tolerances, and
/// the ordered condition set. Enough to reproduce every evaluation.
inline json field_to_json(const SolutionField& field) {
    json conditions = json::array();
    for (const ValueCondition& vc : field.conditions()) conditions.push_back(condition_to_json(vc));
    const TriangularDiagram& d = field.diagram();
    return json{{"diagram",
                 {{"v_max", d.free_flow_speed()},
                  {"rho_max", d.jam_density()},
                  {"rho_star", d.critical_density()}}},
                {"domain",
                 {{"t_end", field.domain().t_end},
                  {"n_first", field.domain().n_first},
                  {"n_last", field.domain().n_last}}},
                {"tolerances",
                 {{"label", field.tolerance().label}, {"time", field.tolerance().time}}},
                {"conditions", conditions}};
}

inline SolutionField field_from_json(const json& j) {
    const json& dj = j.at("diagram");
    const TriangularDiagram d = TriangularDiagram::from_free_flow_speed(
        dj.at("v_max").get<double>(), dj.at("rho_max").get<double>(),
        dj.at("rho_star").get<double>());
    const json& dom = j.at("domain");
    Domain domain{dom.at("t_end").get<double>(), dom.at("n_first").get<double>(),
                  dom.at("n_last").get<double>()};
    SupportTolerance tol;
    if (j.contains("tolerances")) {
        tol.label = j.at("tolerances").at("label").get<double>();
        tol.time = j.at("tolerances").at("time").get<double>();
    }
    std::vector<ValueCondition> conditions;
    for (const json& cj : j.at("conditions")) conditions.push_back(condition_from_json(cj));
    return SolutionField(d, domain, std::move(conditions), tol);
}

inline void write_field_json(const std::string& path, const SolutionField& field) {
    auto out = io_detail::open_output(path);
    out << field_to_json(field).dump(2) << '\n';
}

inline SolutionField read_field_json(const std::string& path) {
    auto in = io_detail::open_input(path);
    json j;
    in >> j;
    return field_from_json(j);
}

// --- audit report / config / manifest --------------------------------------------

inline json audit_to_json(const AuditReport& report) {
    json entries = json::array();
    for (const ConditionAudit& e : report.entries) {
        entries.push_back(json{{"condition", e.condition},
                               {"type", e.type},
                               {"samples", e.samples},
                               {"max_gap_m", e.max_gap},
                               {"min_gap_m", e.min_gap},
                               {"violations", e.violations},
                               {"incompatible", e.incompatible}});
    }
    return json{{"tolerance_m", report.tolerance},
                {"any_incompatible", report.any_incompatible()},
                {"conditions", entries}};
}

inline json config_to_json(const ScenarioConfig& c) {
    return json{
        {"domain", {{"t_end_s", c.t_end}, {"n_first_veh", c.n_first}, {"n_last_veh", c.n_last}}},
        {"diagram",
         {{"v_max_mps", c.v_max}, {"rho_max_vpm", c.rho_max}, {"rho_star_vpm", c.rho_star}}},
        {"grid", {{"nt", c.grid_nt}, {"nn", c.grid_nn}}},
        {"probe_sampling_interval_s", c.probe_sampling_interval},
        {"density_floor_vpm", c.density_floor},
        {"tolerances",
         {{"tau_dom_veh", c.support_tol.label},
          {"tau_time_s", c.support_tol.time},
          {"tau_compat_m", c.tau_compat},
          {"epsilon_clamp_mps", c.clamp_epsilon}}},
        {"position_unit", c.position_unit == ScenarioConfig::PositionUnit::miles ? "miles" : "meters"},
        {"origin_postmile", c.origin_postmile},
        {"detector_position_m", c.detector_position},
        {"stretch", {{"x_from_m", c.stretch_from}, {"x_to_m", c.stretch_to}}}};
}

inline ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    const json& dom = j.at("domain");
    c.t_end = dom.at("t_end_s").get<double>();
    c.n_first = dom.at("n_first_veh").get<double>();
    c.n_last = dom.at("n_last_veh").get<double>();
    const json& dia = j.at("diagram");
    c.v_max = dia.at("v_max_mps").get<double>();
    c.rho_max = dia.at("rho_max_vpm").get<double>();
    c.rho_star = dia.at("rho_star_vpm").get<double>();
    if (j.contains("grid")) {
        c.grid_nt = j.at("grid").at("nt").get<std::size_t>();
        c.grid_nn = j.at("grid").at("nn").get<std::size_t>();
    }
    if (j.contains("probe_sampling_interval_s")) {
        c.probe_sampling_interval = j.at("probe_sampling_interval_s").get<double>();
    }
    if (j.contains("density_floor_vpm")) c.density_floor = j.at("density_floor_vpm").get<double>();
    if (j.contains("tolerances")) {
        const json& tol = j.at("tolerances");
        if (tol.contains("tau_dom_veh")) c.support_tol.label = tol.at("tau_dom_veh").get<double>();
        if (tol.contains("tau_time_s")) c.support_tol.time = tol.at("tau_time_s").get<double>();
        if (tol.contains("tau_compat_m")) c.tau_compat = tol.at("tau_compat_m").get<double>();
        if (tol.contains("epsilon_clamp_mps")) {
            c.clamp_epsilon = tol.at("epsilon_clamp_mps").get<double>();
        }
    }
    if (j.contains("position_unit")) {
        const std::string unit = j.at("position_unit").get<std::string>();
        if (unit == "miles") {
            c.position_unit = ScenarioConfig::PositionUnit::miles;
        } else if (unit == "meters") {
            c.position_unit = ScenarioConfig::PositionUnit::meters;
        } else {
            throw ParseError("position_unit must be 'meters' or 'miles'");
        }
    }
    if (j.contains("origin_postmile")) c.origin_postmile = j.at("origin_postmile").get<double>();
    if (j.contains("detector_position_m")) {
        c.detector_position = j.at("detector_position_m").get<double>();
    }
    if (j.contains("stretch")) {
        c.stretch_from = j.at("stretch").at("x_from_m").get<double>();
        c.stretch_to = j.at("stretch").at("x_to_m").get<double>();
    }
    c.validate();
    return c;
}

inline ScenarioConfig read_config(const std::string& path) {
    auto in = io_detail::open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return config_from_json(j);
}

inline void write_config(const std::string& path, const ScenarioConfig& config) {
    auto out = io_detail::open_output(path);
    out << config_to_json(config).dump(2) << '\n';
}

inline void write_json(const std::string& path, const json& j) {
    auto out = io_detail::open_output(path);
    out << j.dump(2) << '\n';
}

}  // namespace laxhopf
