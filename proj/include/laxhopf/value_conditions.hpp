#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include "laxhopf/errors.hpp"

namespace laxhopf {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Tolerances deciding whether a point lies on a condition's support.
/// A point is "on" a support curve when its label is within `label` vehicles
/// of the curve and its time within `time` seconds of the curve's span.
struct SupportTolerance {
    double label = 1e-6;  // veh
    double time = 1e-9;   // s
};

namespace detail {

inline void require_strictly_increasing(std::span<const double> xs, const char* what) {
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            std::ostringstream msg;
            msg << what << " must be strictly increasing (entry " << i << ")";
            if (std::string(what) == std::string("labels")) throw NonMonotoneLabels(msg.str());
            throw NonMonotoneTimes(msg.str());
        }
    }
}

/// Index of the piece containing x within breakpoints (size m+1), clamped to
/// the valid piece range.
inline std::size_t piece_index(std::span<const double> breaks, double x) {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    std::size_t idx = it == breaks.begin() ? 0 : static_cast<std::size_t>(it - breaks.begin()) - 1;
    if (idx + 2 > breaks.size()) idx = breaks.size() - 2;
    return idx;
}

}  // namespace detail

/// Piecewise-affine vehicle profile along {t0} x [labels.front, labels.back].
/// Piece j maps a label n to position -spacings[j]*n + offsets[j]; pieces are
/// continuous at shared breakpoints and nonincreasing in n.
struct InitialCondition {
    double t0 = 0.0;
    std::vector<double> labels;    // m+1 breakpoints, strictly increasing
    std::vector<double> spacings;  // m slopes, each >= 0 (m/veh)
    std::vector<double> offsets;   // m, derived for continuity

    std::size_t piece_count() const { return spacings.size(); }
    double first_label() const { return labels.front(); }
    double last_label() const { return labels.back(); }

    /// Condition value with the label clamped onto the support range.
    double value_at(double n) const {
        const double nc = std::clamp(n, labels.front(), labels.back());
        const std::size_t j = detail::piece_index(labels, nc);
        return -spacings[j] * nc + offsets[j];
    }

    /// Profile slope magnitude (spacing) at label n, clamped onto the range.
    double spacing_at(double n) const {
        const double nc = std::clamp(n, labels.front(), labels.back());
        return spacings[detail::piece_index(labels, nc)];
    }
};

/// Piecewise-affine trajectory of one vehicle: value = speeds[j]*t + offsets[j]
/// on [times[j], times[j+1]], continuous and nondecreasing in t.
struct BoundaryTrajectory {
    double label = 0.0;
    std::vector<double> times;    // m+1 breakpoints, strictly increasing
    std::vector<double> speeds;   // m slopes, each >= 0 (m/s)
    std::vector<double> offsets;  // m, derived for continuity

    std::size_t piece_count() const { return speeds.size(); }
    double first_time() const { return times.front(); }
    double last_time() const { return times.back(); }

    /// Condition value with the time clamped onto the support span.
    double value_at(double t) const {
        const double tc = std::clamp(t, times.front(), times.back());
        const std::size_t j = detail::piece_index(times, tc);
        return speeds[j] * tc + offsets[j];
    }
};

/// Trajectory of the first vehicle in scope (smallest label).
struct UpstreamCondition : BoundaryTrajectory {};

/// Trajectory of the last vehicle in scope (largest label).
struct DownstreamCondition : BoundaryTrajectory {};

/// Affine condition along an interior segment of the domain: an observer at
/// position `position + speed*(t - t_min)` being passed by vehicles at
/// `label_rate`, so its label is n_min + label_rate*(t - t_min).
struct InternalCondition {
    double position = 0.0;    // m, at (t_min, n_min)
    double speed = 0.0;       // m/s, >= 0
    double t_min = 0.0;
    double t_max = 0.0;
    double n_min = 0.0;
    double n_max = 0.0;       // n_min + label_rate*(t_max - t_min)
    double label_rate = 0.0;  // veh/s, >= 0; 0 for a physical probe vehicle

    double value_at_time(double t) const {
        return position + speed * (std::clamp(t, t_min, t_max) - t_min);
    }
    double label_at_time(double t) const { return n_min + label_rate * (t - t_min); }
};

/// Ordered internal segments sharing endpoints in time, label, and value;
/// the representation of a sampled probe trajectory.
struct InternalChain {
    std::vector<InternalCondition> segments;
};

/// One of the four condition families, or a PWA internal chain.
using ValueCondition =
    std::variant<InitialCondition, UpstreamCondition, DownstreamCondition, InternalCondition,
                 InternalChain>;

// --- builders ---------------------------------------------------------------

/// Builds a continuous PWA initial/intermediate condition. The first vehicle
/// `labels[0]` sits at `anchor_x`; offsets follow from the continuity
/// recursion d_j = d_{j-1} + (s_j - s_{j-1}) * n_j.
inline InitialCondition build_initial(double t0, double anchor_x, std::vector<double> labels,
                                      std::vector<double> spacings) {
    if (labels.size() < 2 || spacings.size() + 1 != labels.size()) {
        throw NonMonotoneLabels("need m+1 labels and m spacings with m >= 1");
    }
    detail::require_strictly_increasing(labels, "labels");
    for (double s : spacings) {
        if (s < 0.0) throw NegativeSpacing("initial-condition spacings must be nonnegative");
    }
    InitialCondition c;
    c.t0 = t0;
    c.labels = std::move(labels);
    c.spacings = std::move(spacings);
    c.offsets.resize(c.spacings.size());
    c.offsets[0] = anchor_x + c.spacings[0] * c.labels[0];
    for (std::size_t j = 1; j < c.spacings.size(); ++j) {
        c.offsets[j] = c.offsets[j - 1] + (c.spacings[j] - c.spacings[j - 1]) * c.labels[j];
    }
    return c;
}

namespace detail {

template <typename T>
inline T build_boundary(double label, double anchor_x, std::vector<double> times,
                        std::vector<double> speeds) {
    if (times.size() < 2 || speeds.size() + 1 != times.size()) {
        throw NonMonotoneTimes("need m+1 times and m speeds with m >= 1");
    }
    require_strictly_increasing(times, "times");
    for (double v : speeds) {
        if (v < 0.0) throw NegativeSpeed("boundary speeds must be nonnegative");
    }
    T c;
    c.label = label;
    c.times = std::move(times);
    c.speeds = std::move(speeds);
    c.offsets.resize(c.speeds.size());
    c.offsets[0] = anchor_x - c.speeds[0] * c.times[0];
    for (std::size_t j = 1; j < c.speeds.size(); ++j) {
        c.offsets[j] = c.offsets[j - 1] + (c.speeds[j - 1] - c.speeds[j]) * c.times[j];
    }
    return c;
}

}  // namespace detail

/// PWA upstream boundary condition: trajectory of vehicle N1 anchored at
/// anchor_x when the record starts.
inline UpstreamCondition build_upstream(double label_n1, double anchor_x,
                                        std::vector<double> times, std::vector<double> speeds) {
    return detail::build_boundary<UpstreamCondition>(label_n1, anchor_x, std::move(times),
                                                     std::move(speeds));
}

/// PWA downstream boundary condition at label N2.
inline DownstreamCondition build_downstream(double label_n2, double anchor_x,
                                            std::vector<double> times, std::vector<double> speeds) {
    return detail::build_boundary<DownstreamCondition>(label_n2, anchor_x, std::move(times),
                                                       std::move(speeds));
}

/// One internal segment; n_max is derived from the label rate.
inline InternalCondition make_internal(double position, double speed, double t_min, double t_max,
                                       double n_min, double label_rate) {
    if (!(t_max > t_min)) throw NonMonotoneTimes("internal segment needs t_min < t_max");
    if (speed < 0.0) throw NegativeSpeed("internal segment speed must be nonnegative");
    if (label_rate < 0.0) throw NegativeSpeed("internal label rate must be nonnegative");
    InternalCondition c;
    c.position = position;
    c.speed = speed;
    c.t_min = t_min;
    c.t_max = t_max;
    c.n_min = n_min;
    c.n_max = n_min + label_rate * (t_max - t_min);
    c.label_rate = label_rate;
    return c;
}

/// Builds a probe-trajectory chain (fixed label, label_rate = 0) from
/// position samples. Slightly negative sampled slopes (GPS jitter) within
/// clamp_eps are clamped to zero; larger negatives are rejected. Positions
/// follow the forward recursion so the chain stays continuous after clamping.
inline InternalChain chain_from_samples(double label,
                                        std::span<const std::pair<double, double>> samples,
                                        double clamp_eps = 0.01) {
    if (samples.size() < 2) throw NonMonotoneTimes("need at least two probe samples");
    InternalChain chain;
    chain.segments.reserve(samples.size() - 1);
    double position = samples[0].second;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto [t0, x0] = samples[i];
        const auto [t1, x1] = samples[i + 1];
        if (!(t1 > t0)) throw NonMonotoneTimes("probe sample times must be strictly increasing");
        double slope = (x1 - x0) / (t1 - t0);
        if (slope < 0.0) {
            if (slope < -clamp_eps) {
                std::ostringstream msg;
                msg << "probe moves backward at " << slope << " m/s (tolerance " << clamp_eps << ")";
                throw NegativeSpeed(msg.str());
            }
            slope = 0.0;
        }
        InternalCondition seg;
        seg.position = position;
        seg.speed = slope;
        seg.t_min = t0;
        seg.t_max = t1;
        seg.n_min = label;
        seg.n_max = label;
        seg.label_rate = 0.0;
        chain.segments.push_back(seg);
        position += slope * (t1 - t0);
    }
    return chain;
}

// --- evaluation --------------------------------------------------------------

/// Value of a condition at (t, n): the affine value when the point lies on the
/// support (within tolerance), +infinity otherwise. The value is computed at
/// the point clamped onto the support, so tolerance never extrapolates a piece
/// past its breakpoints. Total function.
inline double eval_condition(const InitialCondition& c, double t, double n,
                             SupportTolerance tol = {}) {
    if (std::abs(t - c.t0) > tol.time) return kUnreachable;
    if (n < c.labels.front() - tol.label || n > c.labels.back() + tol.label) return kUnreachable;
    return c.value_at(n);
}

inline double eval_condition(const BoundaryTrajectory& c, double t, double n,
                             SupportTolerance tol = {}) {
    if (std::abs(n - c.label) > tol.label) return kUnreachable;
    if (t < c.times.front() - tol.time || t > c.times.back() + tol.time) return kUnreachable;
    return c.value_at(t);
}

inline double eval_condition(const InternalCondition& c, double t, double n,
                             SupportTolerance tol = {}) {
    if (t < c.t_min - tol.time || t > c.t_max + tol.time) return kUnreachable;
    const double tc = std::clamp(t, c.t_min, c.t_max);
    if (std::abs(n - c.label_at_time(tc)) > tol.label) return kUnreachable;
    return c.value_at_time(tc);
}

inline double eval_condition(const InternalChain& c, double t, double n, SupportTolerance tol = {}) {
    double best = kUnreachable;
    for (const InternalCondition& seg : c.segments) {
        best = std::min(best, eval_condition(seg, t, n, tol));
    }
    return best;
}

inline double eval_condition(const ValueCondition& c, double t, double n, SupportTolerance tol = {}) {
    return std::visit([&](const auto& cc) { return eval_condition(cc, t, n, tol); }, c);
}

}  // namespace laxhopf
