#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "laxhopf/ingestion.hpp"
#include "laxhopf/scenario_config.hpp"
#include "laxhopf/solver.hpp"

namespace laxhopf {

struct EstimateOptions {
    double train_fraction = 0.45;  // share of labeled probes used as conditions
    unsigned workers = 0;          // grid evaluation workers, 0 = hardware
};

/// The estimation pipeline: probes labeled at the detector, downsampled, a
/// training subset turned into internal-chain conditions, and the field solved
/// from those conditions.
struct EstimateResult {
    SolutionField field;
    std::map<std::string, double> labels;        // labeled probes (all of them)
    std::vector<std::string> training_ids;       // sorted by label
    std::vector<std::string> holdout_ids;        // sorted by label
    std::vector<std::string> skipped_ids;        // probes that never cross the detector
};

inline EstimateResult run_estimate(const ScenarioConfig& config,
                                   const std::vector<ProbeTrack>& probes,
                                   const std::vector<DetectorRecord>& detector,
                                   const EstimateOptions& options = {}) {
    config.validate();
    if (!(options.train_fraction > 0.0) || options.train_fraction > 1.0) {
        throw PreconditionViolated("train fraction must lie in (0, 1]");
    }

    std::vector<std::string> skipped;
    std::vector<const ProbeTrack*> crossing;
    for (const ProbeTrack& track : probes) {
        if (probe_crossing_time(track, config.detector_position)) {
            crossing.push_back(&track);
        } else {
            skipped.push_back(track.vehicle_id);
        }
    }
    if (crossing.empty()) throw NoCrossing("no probe crosses the detector");

    std::map<std::string, double> labels;
    for (const ProbeTrack* track : crossing) {
        labels[track->vehicle_id] =
            detector_count_at(detector, *probe_crossing_time(*track, config.detector_position));
    }

    // Deterministic ordering by label, then an even spread as training probes.
    std::vector<const ProbeTrack*> ordered = crossing;
    std::sort(ordered.begin(), ordered.end(), [&](const ProbeTrack* a, const ProbeTrack* b) {
        const double la = labels.at(a->vehicle_id);
        const double lb = labels.at(b->vehicle_id);
        return la != lb ? la < lb : a->vehicle_id < b->vehicle_id;
    });
    const std::size_t train_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(options.train_fraction *
                                                 static_cast<double>(ordered.size()))));
    std::set<std::size_t> train_indices;
    for (std::size_t j = 0; j < train_count; ++j) {
        train_indices.insert(j * ordered.size() / train_count);
    }

    std::vector<ValueCondition> conditions;
    std::vector<std::string> training_ids;
    std::vector<std::string> holdout_ids;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const ProbeTrack* track = ordered[i];
        if (train_indices.count(i)) {
            training_ids.push_back(track->vehicle_id);
            const ProbeTrack sparse = downsample(*track, config.probe_sampling_interval);
            conditions.push_back(
                probe_chain(sparse, labels.at(track->vehicle_id), config.clamp_epsilon));
        } else {
            holdout_ids.push_back(track->vehicle_id);
        }
    }

    SolutionField field(config.diagram(), config.domain(), std::move(conditions),
                        config.support_tol);
    return EstimateResult{std::move(field), std::move(labels), std::move(training_ids),
                          std::move(holdout_ids), std::move(skipped)};
}

}  // namespace laxhopf
