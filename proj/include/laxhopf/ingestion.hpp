#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "laxhopf/errors.hpp"
#include "laxhopf/value_conditions.hpp"

namespace laxhopf {

/// One probe measurement row.
struct ProbeRecord {
    std::string vehicle_id;
    double time = 0.0;      // s
    double position = 0.0;  // m
    std::optional<double> speed;  // m/s, informational
};

/// One probe vehicle's measurements, grouped and time-ordered.
struct ProbeTrack {
    std::string vehicle_id;
    std::vector<double> times;
    std::vector<double> positions;

    std::size_t size() const { return times.size(); }
};

/// One loop-detector row: cumulative vehicles counted by `time`.
struct DetectorRecord {
    double time = 0.0;
    double cumulative_count = 0.0;
};

/// Groups rows by vehicle and validates per-vehicle monotonicity. Rows must be
/// time-ordered within each vehicle.
inline std::vector<ProbeTrack> group_probe_records(std::span<const ProbeRecord> records) {
    std::map<std::string, ProbeTrack> by_id;
    for (const ProbeRecord& r : records) {
        ProbeTrack& track = by_id[r.vehicle_id];
        track.vehicle_id = r.vehicle_id;
        if (!track.times.empty() && !(r.time > track.times.back())) {
            throw NonMonotoneTimes("probe " + r.vehicle_id + " has out-of-order samples");
        }
        track.times.push_back(r.time);
        track.positions.push_back(r.position);
    }
    std::vector<ProbeTrack> tracks;
    tracks.reserve(by_id.size());
    for (auto& [id, track] : by_id) tracks.push_back(std::move(track));
    return tracks;
}

/// Time at which the track first reaches `position` (monotone linear
/// interpolation), or nothing if it never does or starts beyond it.
inline std::optional<double> probe_crossing_time(const ProbeTrack& track, double position) {
    if (track.size() < 2) return std::nullopt;
    if (track.positions.front() > position) return std::nullopt;  // already downstream
    for (std::size_t i = 0; i + 1 < track.size(); ++i) {
        const double x0 = track.positions[i];
        const double x1 = track.positions[i + 1];
        if (position > x1) continue;
        if (x1 <= x0) return track.times[i];  // flat stretch ending at the position
        const double w = (position - x0) / (x1 - x0);
        return track.times[i] + w * (track.times[i + 1] - track.times[i]);
    }
    return std::nullopt;
}

/// Cumulative count interpolated at time t. Throws ValueOutOfRange outside the
/// detector's record.
inline double detector_count_at(std::span<const DetectorRecord> detector, double t) {
    if (detector.size() < 2 || t < detector.front().time || t > detector.back().time) {
        std::ostringstream msg;
        msg << "time " << t << " outside the detector record";
        throw ValueOutOfRange(msg.str());
    }
    std::size_t lo = 0;
    std::size_t hi = detector.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (detector[mid].time <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double dt = detector[hi].time - detector[lo].time;
    if (!(dt > 0.0)) throw NonMonotoneTimes("detector sample times must be strictly increasing");
    const double w = (t - detector[lo].time) / dt;
    return detector[lo].cumulative_count +
           w * (detector[hi].cumulative_count - detector[lo].cumulative_count);
}

/// Assigns each probe the cumulative count interpolated at the time it crosses
/// the detector. Throws NoCrossing for a probe that never passes the detector
/// position.
inline std::map<std::string, double> label_probes(std::span<const ProbeTrack> probes,
                                                  std::span<const DetectorRecord> detector,
                                                  double detector_position) {
    std::map<std::string, double> labels;
    for (const ProbeTrack& track : probes) {
        const auto crossing = probe_crossing_time(track, detector_position);
        if (!crossing) {
            throw NoCrossing("probe " + track.vehicle_id + " never crosses the detector");
        }
        labels[track.vehicle_id] = detector_count_at(detector, *crossing);
    }
    return labels;
}

/// Keeps the first sample, then the nearest sample to each whole multiple of
/// `interval` past the first time, and always the last sample. The output is a
/// subsequence of the input.
inline ProbeTrack downsample(const ProbeTrack& track, double interval) {
    if (!(interval > 0.0)) throw PreconditionViolated("downsample interval must be positive");
    ProbeTrack out;
    out.vehicle_id = track.vehicle_id;
    if (track.size() == 0) return out;
    std::vector<std::size_t> picks;
    picks.push_back(0);
    const double t0 = track.times.front();
    std::size_t cursor = 0;
    for (double target = t0 + interval; target < track.times.back(); target += interval) {
        while (cursor + 1 < track.size() &&
               std::abs(track.times[cursor + 1] - target) <= std::abs(track.times[cursor] - target)) {
            ++cursor;
        }
        if (cursor != picks.back()) picks.push_back(cursor);
    }
    if (picks.back() != track.size() - 1) picks.push_back(track.size() - 1);
    for (std::size_t i : picks) {
        out.times.push_back(track.times[i]);
        out.positions.push_back(track.positions[i]);
    }
    return out;
}

/// Probe track as a fixed-label internal chain.
inline InternalChain probe_chain(const ProbeTrack& track, double label, double clamp_eps = 0.01) {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(track.size());
    for (std::size_t i = 0; i < track.size(); ++i) {
        samples.emplace_back(track.times[i], track.positions[i]);
    }
    return chain_from_samples(label, samples, clamp_eps);
}

}  // namespace laxhopf
