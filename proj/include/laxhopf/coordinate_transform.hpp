#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <variant>
#include <vector>

#include "laxhopf/errors.hpp"
#include "laxhopf/value_conditions.hpp"

namespace laxhopf {

/// Cumulative-count surface N(t, x) sampled on a rectangular grid. Each fixed-t
/// slice is strictly decreasing in x with slope magnitude within
/// [density_floor, rho_max]; cells may be NaN where the surface is unknown.
struct SampledMoskowitz {
    std::vector<double> times;      // nt
    std::vector<double> positions;  // nx, strictly increasing
    std::vector<double> counts;     // row-major, counts[it*positions.size() + ix]
    double density_floor = 1e-4;    // veh/m, uniform positivity margin

    double at(std::size_t it, std::size_t ix) const { return counts[it * positions.size() + ix]; }
    double& at(std::size_t it, std::size_t ix) { return counts[it * positions.size() + ix]; }
};

/// Measurement curve in road coordinates: points (t(tau), x(tau)) carrying
/// cumulative counts n(tau). The arrays share one index (the curve parameter)
/// and must be continuous samples of a continuous curve.
struct EulerianCurveCondition {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<double> counts;  // the condition values
};

/// Dual curve in vehicle coordinates: points (t(tau), n(tau)) carrying
/// positions x(tau).
struct LagrangianCurveCondition {
    std::vector<double> times;
    std::vector<double> labels;
    std::vector<double> positions;  // the condition values
};

using CurveCondition = std::variant<EulerianCurveCondition, LagrangianCurveCondition>;

/// Piecewise-linear inverse of one strictly decreasing count slice: the
/// position where the slice passes through count value n. Exact at samples.
inline double invert_slice(std::span<const double> positions, std::span<const double> counts,
                           double n, double density_floor) {
    if (positions.size() != counts.size() || positions.size() < 2) {
        throw PreconditionViolated("slice needs matching position/count arrays of size >= 2");
    }
    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
        const double dx = positions[i + 1] - positions[i];
        if (!(dx > 0.0)) throw NotStrictlyMonotone("positions must be strictly increasing");
        const double slope = (counts[i] - counts[i + 1]) / dx;
        if (!(slope >= density_floor)) {
            std::ostringstream msg;
            msg << "count slice slope " << slope << " below the density floor " << density_floor;
            throw NotStrictlyMonotone(msg.str());
        }
    }
    if (n > counts.front() || n < counts.back()) {
        std::ostringstream msg;
        msg << "count " << n << " outside the slice range [" << counts.back() << ", "
            << counts.front() << "]";
        throw ValueOutOfRange(msg.str());
    }
    std::size_t lo = 0;
    std::size_t hi = counts.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (n <= counts[mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double w = (counts[lo] - n) / (counts[lo] - counts[hi]);
    return positions[lo] + w * (positions[hi] - positions[lo]);
}

/// Converts a measurement curve between coordinate systems by swapping the
/// value with the corresponding coordinate: a point measured as
/// n = C(t, x) becomes x = C(t, n). The identity on curves already in
/// vehicle coordinates.
inline LagrangianCurveCondition eulerian_to_lagrangian_condition(const EulerianCurveCondition& c) {
    if (c.times.size() != c.positions.size() || c.times.size() != c.counts.size() ||
        c.times.size() < 2) {
        throw PreconditionViolated("curve needs matching time/position/count arrays of size >= 2");
    }
    return LagrangianCurveCondition{c.times, c.counts, c.positions};
}

inline LagrangianCurveCondition eulerian_to_lagrangian_condition(const CurveCondition& c) {
    if (const auto* lag = std::get_if<LagrangianCurveCondition>(&c)) return *lag;
    return eulerian_to_lagrangian_condition(std::get<EulerianCurveCondition>(c));
}

/// PWA internal chain through the samples of a curve in vehicle coordinates:
/// per segment, the observer speed comes from the position increments and the
/// label rate from the count increments. For a fixed-location detector this
/// yields segments with speed 0 and the per-interval count rate; for a probe
/// trajectory it yields the usual fixed-label chain.
inline InternalChain chain_from_curve(const LagrangianCurveCondition& c) {
    if (c.times.size() != c.labels.size() || c.times.size() != c.positions.size() ||
        c.times.size() < 2) {
        throw PreconditionViolated("curve needs matching time/label/position arrays of size >= 2");
    }
    InternalChain chain;
    chain.segments.reserve(c.times.size() - 1);
    for (std::size_t i = 0; i + 1 < c.times.size(); ++i) {
        const double dt = c.times[i + 1] - c.times[i];
        if (!(dt > 0.0)) throw NonMonotoneTimes("curve times must be strictly increasing");
        const double rate = (c.labels[i + 1] - c.labels[i]) / dt;
        const double speed = (c.positions[i + 1] - c.positions[i]) / dt;
        if (rate < 0.0) throw PreconditionViolated("curve counts must be nondecreasing");
        if (speed < 0.0) throw NegativeSpeed("curve positions must be nondecreasing");
        InternalCondition seg;
        seg.position = c.positions[i];
        seg.speed = speed;
        seg.t_min = c.times[i];
        seg.t_max = c.times[i + 1];
        seg.n_min = c.labels[i];
        seg.n_max = c.labels[i + 1];
        seg.label_rate = rate;
        chain.segments.push_back(seg);
    }
    return chain;
}

/// Inverts every fixed-t slice of a position grid X(t, n) onto the given
/// x-grid, producing the cumulative-count surface N(t, x). Slices must be
/// strictly decreasing in n with spacing within [1/rho_max-like floor,
/// 1/density_floor]; x values outside a slice's range come out NaN.
inline SampledMoskowitz lagrangian_to_eulerian_field(
    const std::vector<double>& times, const std::vector<double>& labels,
    const std::vector<double>& position_grid /* row-major X(t,n) */,
    const std::vector<double>& x_grid, double density_floor) {
    const std::size_t nt = times.size();
    const std::size_t nn = labels.size();
    if (position_grid.size() != nt * nn || nn < 2 || nt < 1) {
        throw PreconditionViolated("position grid shape does not match the axes");
    }
    SampledMoskowitz out;
    out.times = times;
    out.positions = x_grid;
    out.counts.assign(nt * x_grid.size(), std::numeric_limits<double>::quiet_NaN());
    out.density_floor = density_floor;
    const double max_spacing = 1.0 / density_floor;
    for (std::size_t it = 0; it < nt; ++it) {
        const double* row = position_grid.data() + it * nn;
        for (std::size_t j = 0; j + 1 < nn; ++j) {
            if (!std::isfinite(row[j]) || !std::isfinite(row[j + 1])) {
                throw PreconditionViolated("position slices must be finite");
            }
            const double drop = row[j] - row[j + 1];
            const double dn = labels[j + 1] - labels[j];
            if (!(drop > 0.0)) {
                throw NotStrictlyMonotone("position slice is not strictly decreasing in label");
            }
            if (drop > max_spacing * dn) {
                std::ostringstream msg;
                msg << "slice spacing " << drop / dn << " exceeds 1/density_floor " << max_spacing;
                throw NotStrictlyMonotone(msg.str());
            }
        }
        for (std::size_t ix = 0; ix < x_grid.size(); ++ix) {
            const double x = x_grid[ix];
            if (x > row[0] || x < row[nn - 1]) continue;  // outside the sampled range
            std::size_t lo = 0;
            std::size_t hi = nn - 1;
            while (hi - lo > 1) {
                const std::size_t mid = (lo + hi) / 2;
                if (x <= row[mid]) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            const double w = (row[lo] - x) / (row[lo] - row[hi]);
            out.at(it, ix) = labels[lo] + w * (labels[hi] - labels[lo]);
        }
    }
    return out;
}

}  // namespace laxhopf
