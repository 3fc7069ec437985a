#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "laxhopf/ingestion.hpp"
#include "laxhopf/scenario_config.hpp"
#include "laxhopf/solver.hpp"
#include "laxhopf/state_reconstruction.hpp"

namespace laxhopf {

enum class SyntheticKind { free_flow, standing_queue, moving_congestion_band };

inline SyntheticKind parse_synthetic_kind(const std::string& name) {
    if (name == "free-flow") return SyntheticKind::free_flow;
    if (name == "standing-queue") return SyntheticKind::standing_queue;
    if (name == "moving-congestion-band") return SyntheticKind::moving_congestion_band;
    throw UnknownScenario("unknown scenario '" + name +
                          "' (expected free-flow, standing-queue or moving-congestion-band)");
}

inline const char* to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::free_flow: return "free-flow";
        case SyntheticKind::standing_queue: return "standing-queue";
        case SyntheticKind::moving_congestion_band: return "moving-congestion-band";
    }
    return "unknown";
}

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::moving_congestion_band;
    ScenarioConfig config;             // domain, diagram, detector, stretch
    std::size_t probe_count = 97;
    double penetration = 0.0088;       // recorded in the manifest
    unsigned seed = 1;
    double probe_record_period = 3.5;  // s, nominal on-board recording period
    double detector_period = 30.0;     // s
};

/// A generated dataset plus the field it was sampled from.
struct SyntheticScenario {
    ScenarioConfig config;
    SolutionField ground_truth;
    std::vector<ProbeTrack> probes;
    std::map<std::string, double> true_labels;
    std::vector<DetectorRecord> detector;
};

namespace synth_detail {

/// Generator conditions per scenario kind. Velocities stay within the model's
/// speed range so the generated data are compatible with the diagram, except
/// for the standing queue whose stop interval deliberately pins speeds to 0.
inline std::vector<ValueCondition> generator_conditions(SyntheticKind kind,
                                                        const ScenarioConfig& cfg) {
    const TriangularDiagram d = cfg.diagram();
    const double s_star = d.critical_spacing();
    const double v_max = d.free_flow_speed();
    const double scale = cfg.t_end / 3600.0;

    std::vector<double> times{0.0};
    std::vector<double> speeds;
    double s0 = 1.2 * s_star;
    switch (kind) {
        case SyntheticKind::free_flow:
            speeds = {v_max};
            break;
        case SyntheticKind::standing_queue:
            s0 = 1.1 * s_star;
            times = {0.0, 0.20 * cfg.t_end, 0.35 * cfg.t_end};
            speeds = {v_max, 0.0, v_max};
            break;
        case SyntheticKind::moving_congestion_band: {
            s0 = s_star + 0.35;
            const double profile[][2] = {
                {0.0, 1.0},   {120.0, 0.82}, {150.0, 0.66}, {180.0, 0.52}, {210.0, 0.38},
                {240.0, 0.285}, {420.0, 0.38}, {450.0, 0.52}, {480.0, 0.66}, {510.0, 0.82},
                {540.0, 1.0}};
            times.clear();
            for (const auto& [t, f] : profile) {
                times.push_back(t * scale);
                speeds.push_back(f * v_max);
            }
            break;
        }
    }
    times.push_back(cfg.t_end);

    // Lead vehicle starts at x = 0; everyone else strings out behind it.
    const InitialCondition initial =
        build_initial(0.0, 0.0, {cfg.n_first, cfg.n_last}, {s0});
    const UpstreamCondition upstream = build_upstream(cfg.n_first, 0.0, times, speeds);
    return {initial, upstream};
}

/// Largest label whose trajectory clears `x_to` by `deadline`; labels further
/// back exit later, so a bisection over the label axis suffices.
inline double last_label_exiting_by(const SolutionField& field, double x_to, double deadline,
                                    double dt_sample) {
    const auto exits_in_time = [&](double label) {
        try {
            Trajectory traj = extract_trajectory_uniform(field, label, dt_sample, deadline);
            return traj.positions.back() >= x_to;
        } catch (const EmptyTrajectory&) {
            return false;
        }
    };
    double lo = field.domain().n_first;
    double hi = field.domain().n_last;
    if (exits_in_time(hi)) return hi;
    if (!exits_in_time(lo)) throw PreconditionViolated("no vehicle clears the stretch in time");
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (exits_in_time(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace synth_detail

/// Cumulative count registered by a virtual detector at `position`: the label
/// passing the detector at time t, found by bisecting the (strictly
/// decreasing) position slice; saturates at the domain ends.
inline double field_count_at(const SolutionField& field, double t, double position) {
    const Domain& dom = field.domain();
    double lo = dom.n_first;
    double hi = dom.n_last;
    const double x_front = fuse(field, t, lo).value;
    if (!(x_front >= position)) return dom.n_first;  // nobody has passed yet
    if (fuse(field, t, hi).value >= position) return dom.n_last;  // everyone has
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (fuse(field, t, mid).value >= position ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Builds the full synthetic dataset: generator conditions, the solved
/// reference field, simulated probe files sampled from it at the recording
/// period (3 to 4 s), and a detector file of cumulative counts.
inline SyntheticScenario generate_synthetic(const SyntheticSpec& spec) {
    spec.config.validate();
    if (spec.probe_count < 2) throw PreconditionViolated("need at least two probes");
    const ScenarioConfig& cfg = spec.config;
    SolutionField field(cfg.diagram(), cfg.domain(),
                        synth_detail::generator_conditions(spec.kind, cfg), cfg.support_tol);

    std::mt19937 rng(spec.seed);
    const double margin = std::min(50.0, 0.01 * cfg.t_end);
    const double deadline = cfg.t_end - margin;
    const double last_label = synth_detail::last_label_exiting_by(
        field, cfg.stretch_to + 500.0, deadline, std::max(1.0, cfg.t_end / 2000.0));
    const double first_label =
        cfg.n_first + std::max(1.0, 0.002 * (cfg.n_last - cfg.n_first));

    SyntheticScenario out{cfg, field, {}, {}, {}};

    // Probe vehicles, evenly spread over the labels that traverse the stretch.
    std::uniform_real_distribution<double> period_jitter(-0.5, 0.5);
    for (std::size_t i = 0; i < spec.probe_count; ++i) {
        const double w = static_cast<double>(i) / static_cast<double>(spec.probe_count - 1);
        const double label = std::round(first_label + w * (last_label - first_label));
        char id[16];
        std::snprintf(id, sizeof(id), "veh%04zu", i);

        Trajectory dense = extract_trajectory_uniform(field, label, 1.0, cfg.t_end);
        const double record_from =
            dense.positions.front() < cfg.stretch_from - 2000.0
                ? first_crossing_time(dense, cfg.stretch_from - 2000.0)
                : dense.times.front();
        double record_to = dense.times.back();
        if (dense.positions.back() > cfg.stretch_to + 1000.0) {
            record_to = first_crossing_time(dense, cfg.stretch_to + 1000.0);
        }

        ProbeTrack track;
        track.vehicle_id = id;
        std::vector<double> sample_times;
        for (double t = record_from; t < record_to;
             t += spec.probe_record_period + period_jitter(rng)) {
            sample_times.push_back(t);
        }
        sample_times.push_back(record_to);
        for (double t : sample_times) {
            track.times.push_back(t);
            track.positions.push_back(fuse(field, t, label).value);
        }
        out.true_labels[track.vehicle_id] = label;
        out.probes.push_back(std::move(track));
    }

    // Detector record at the configured position.
    for (double t = 0.0; t <= cfg.t_end + 1e-9; t += spec.detector_period) {
        out.detector.push_back({t, field_count_at(field, t, cfg.detector_position)});
    }
    return out;
}

}  // namespace laxhopf
