#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "laxhopf/solver.hpp"

namespace laxhopf {

/// Reconstructed path of one vehicle: strictly increasing times, nondecreasing
/// positions.
struct Trajectory {
    double label = 0.0;
    std::vector<double> times;
    std::vector<double> positions;
};

/// Solution values along a fixed label; sample points where the solution is
/// unreachable are omitted. Throws EmptyTrajectory when nothing is reachable.
inline Trajectory extract_trajectory(const SolutionField& field, double label,
                                     std::span<const double> t_samples) {
    Trajectory traj;
    traj.label = label;
    traj.times.reserve(t_samples.size());
    traj.positions.reserve(t_samples.size());
    for (double t : t_samples) {
        const Evaluation e = fuse(field, t, label);
        if (!e.finite()) continue;
        traj.times.push_back(t);
        traj.positions.push_back(e.value);
    }
    if (traj.times.empty()) {
        std::ostringstream msg;
        msg << "label " << label << " is unreachable at every sample";
        throw EmptyTrajectory(msg.str());
    }
    return traj;
}

/// Trajectory sampled every dt_sample seconds from 0 to t_end inclusive.
inline Trajectory extract_trajectory_uniform(const SolutionField& field, double label,
                                             double dt_sample, double t_end) {
    if (!(dt_sample > 0.0)) throw PreconditionViolated("sample step must be positive");
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(t_end / dt_sample) + 2);
    for (double t = 0.0; t < t_end; t += dt_sample) samples.push_back(t);
    samples.push_back(t_end);
    return extract_trajectory(field, label, samples);
}

/// Speed surface over a (t, n) grid, obtained by differencing the solution in
/// time. NaN marks cells with unreachable neighbours. Values are clamped to
/// [0, v_max]; max_pre_clamp_excess records the worst excursion removed.
struct VelocityField {
    std::vector<double> times;
    std::vector<double> labels;
    std::vector<double> values;  // row-major, NaN where unknown
    double max_pre_clamp_excess = 0.0;

    double at(std::size_t it, std::size_t in) const { return values[it * labels.size() + in]; }
};

/// Central differences in t in the interior, one-sided at the edges.
inline VelocityField velocity_field_from_grid(const GridField& grid, double v_max) {
    const std::size_t nt = grid.times.size();
    const std::size_t nn = grid.labels.size();
    if (nt < 3) throw PreconditionViolated("velocity field needs at least 3 time samples");
    VelocityField out;
    out.times = grid.times;
    out.labels = grid.labels;
    out.values.assign(nt * nn, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t in = 0; in < nn; ++in) {
        for (std::size_t it = 0; it < nt; ++it) {
            const std::size_t lo = it == 0 ? 0 : it - 1;
            const std::size_t hi = it + 1 == nt ? it : it + 1;
            const double x_lo = grid.at(lo, in).value;
            const double x_hi = grid.at(hi, in).value;
            if (!std::isfinite(x_lo) || !std::isfinite(x_hi)) continue;
            const double v = (x_hi - x_lo) / (grid.times[hi] - grid.times[lo]);
            const double clamped = std::clamp(v, 0.0, v_max);
            out.max_pre_clamp_excess = std::max(out.max_pre_clamp_excess, std::abs(v - clamped));
            out.values[it * nn + in] = clamped;
        }
    }
    return out;
}

inline VelocityField velocity_field(const SolutionField& field, std::size_t nt, std::size_t nn) {
    return velocity_field_from_grid(evaluate_grid(field, nt, nn),
                                    field.diagram().free_flow_speed());
}

/// First time the trajectory reaches position x (linear interpolation between
/// samples; a flat stretch resolves to its first crossing).
inline double first_crossing_time(const Trajectory& traj, double x) {
    if (traj.positions.empty() || x < traj.positions.front() || x > traj.positions.back()) {
        std::ostringstream msg;
        msg << "vehicle " << traj.label << " never reaches position " << x;
        throw PositionNotReached(msg.str());
    }
    for (std::size_t i = 0; i + 1 < traj.positions.size(); ++i) {
        if (x > traj.positions[i + 1]) continue;
        const double dx = traj.positions[i + 1] - traj.positions[i];
        if (dx <= 0.0) return traj.times[i];  // flat segment, first crossing
        const double w = (x - traj.positions[i]) / dx;
        return traj.times[i] + w * (traj.times[i + 1] - traj.times[i]);
    }
    return traj.times.back();
}

inline double travel_time(const Trajectory& traj, double x_from, double x_to) {
    if (!(x_from < x_to)) throw PreconditionViolated("travel time needs x_from < x_to");
    return first_crossing_time(traj, x_to) - first_crossing_time(traj, x_from);
}

/// Travel time of vehicle `label` between two positions, measured on the
/// reconstructed trajectory sampled every dt_sample seconds.
inline double travel_time(const SolutionField& field, double label, double x_from, double x_to,
                          double dt_sample = 1.0) {
    if (!(dt_sample > 0.0)) throw PreconditionViolated("sample step must be positive");
    std::vector<double> samples;
    const double t_end = field.domain().t_end;
    samples.reserve(static_cast<std::size_t>(t_end / dt_sample) + 2);
    for (double t = 0.0; t < t_end; t += dt_sample) samples.push_back(t);
    samples.push_back(t_end);
    return travel_time(extract_trajectory(field, label, samples), x_from, x_to);
}

/// Gap audit of the solution against the data it was built from. The solution
/// never exceeds a condition on the condition's own support; a strictly
/// positive gap beyond the tolerance means the condition and the model are
/// incompatible there.
struct ConditionAudit {
    std::size_t condition = 0;
    std::string type;
    std::size_t samples = 0;
    double max_gap = 0.0;  // max of condition - solution over the support
    double min_gap = 0.0;
    std::size_t violations = 0;  // samples with gap > tolerance
    bool incompatible = false;
};

struct AuditReport {
    double tolerance = 0.5;
    std::vector<ConditionAudit> entries;

    bool any_incompatible() const {
        return std::any_of(entries.begin(), entries.end(),
                           [](const ConditionAudit& e) { return e.incompatible; });
    }
};

namespace detail {

/// Support sample points (t, n) of one condition, clamped into the domain.
inline std::vector<std::pair<double, double>> support_samples(const ValueCondition& vc,
                                                              const Domain& dom,
                                                              std::size_t count) {
    std::vector<std::pair<double, double>> pts;
    const auto emit = [&](double t, double n) {
        t = std::clamp(t, 0.0, dom.t_end);
        n = std::clamp(n, dom.n_first, dom.n_last);
        pts.emplace_back(t, n);
    };
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, InitialCondition>) {
                for (std::size_t i = 0; i < count; ++i) {
                    const double w = static_cast<double>(i) / static_cast<double>(count - 1);
                    emit(c.t0, c.first_label() + w * (c.last_label() - c.first_label()));
                }
                for (double n : c.labels) emit(c.t0, n);
            } else if constexpr (std::is_same_v<T, UpstreamCondition> ||
                                 std::is_same_v<T, DownstreamCondition>) {
                for (std::size_t i = 0; i < count; ++i) {
                    const double w = static_cast<double>(i) / static_cast<double>(count - 1);
                    emit(c.first_time() + w * (c.last_time() - c.first_time()), c.label);
                }
                for (double t : c.times) emit(t, c.label);
            } else if constexpr (std::is_same_v<T, InternalCondition>) {
                for (std::size_t i = 0; i < count; ++i) {
                    const double w = static_cast<double>(i) / static_cast<double>(count - 1);
                    const double t = c.t_min + w * (c.t_max - c.t_min);
                    emit(t, c.label_at_time(t));
                }
            } else {
                const std::size_t per =
                    std::max<std::size_t>(2, count / std::max<std::size_t>(1, c.segments.size()));
                for (const InternalCondition& seg : c.segments) {
                    for (std::size_t i = 0; i < per; ++i) {
                        const double w = static_cast<double>(i) / static_cast<double>(per - 1);
                        const double t = seg.t_min + w * (seg.t_max - seg.t_min);
                        emit(t, seg.label_at_time(t));
                    }
                }
            }
        },
        vc);
    return pts;
}

inline const char* condition_type_name(const ValueCondition& vc) {
    switch (vc.index()) {
        case 0: return "initial";
        case 1: return "upstream";
        case 2: return "downstream";
        case 3: return "internal";
        default: return "internal_chain";
    }
}

}  // namespace detail

inline AuditReport compatibility_audit(const SolutionField& field, double tau_compat = 0.5,
                                       std::size_t samples_per_condition = 64) {
    if (samples_per_condition < 2) throw PreconditionViolated("need at least 2 audit samples");
    AuditReport report;
    report.tolerance = tau_compat;
    const SupportTolerance tol = field.tolerance();
    for (std::size_t i = 0; i < field.conditions().size(); ++i) {
        const ValueCondition& vc = field.conditions()[i];
        ConditionAudit entry;
        entry.condition = i;
        entry.type = detail::condition_type_name(vc);
        bool first = true;
        for (const auto& [t, n] :
             detail::support_samples(vc, field.domain(), samples_per_condition)) {
            const double c_val = eval_condition(vc, t, n, tol);
            if (!std::isfinite(c_val)) continue;  // clamped off the support by the domain
            const double gap = c_val - fuse(field, t, n).value;
            ++entry.samples;
            entry.max_gap = first ? gap : std::max(entry.max_gap, gap);
            entry.min_gap = first ? gap : std::min(entry.min_gap, gap);
            first = false;
            if (gap > tau_compat) ++entry.violations;
        }
        entry.incompatible = entry.violations > 0;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace laxhopf
