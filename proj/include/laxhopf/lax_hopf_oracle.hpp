#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "laxhopf/solver.hpp"

namespace laxhopf {

/// Resolution of the brute-force search over lookback time and label rate.
struct OracleGrid {
    std::size_t rate_points = 64;  // u in [0, k]
    std::size_t time_points = 64;  // lookback in [0, t]
};

namespace oracle_detail {

/// One characteristic landing: look back to `time` moving at label rate
/// `rate`, so the landing label is n - (t - time) * rate.
struct Landing {
    double time;
    double rate;
};

/// Feasible-interval endpoints of the landing families that touch each affine
/// support piece. Along each family the objective is affine in the interval
/// parameter, so the interval endpoints carry the per-piece infimum; this is
/// how the search attains measure-zero supports exactly.
class LandingEnumerator {
public:
    LandingEnumerator(double k, double t, double n, SupportTolerance tol)
        : k_(k), t_(t), n_(n), tol_(tol) {}

    std::vector<Landing> operator()(const InitialCondition& c) const {
        std::vector<Landing> out;
        const double lookback = t_ - c.t0;
        if (lookback <= 0.0) return out;  // zero lookback is the grid's first row
        for (std::size_t j = 0; j < c.piece_count(); ++j) {
            const double lo = std::max(0.0, (n_ - c.labels[j + 1]) / lookback);
            const double hi = std::min(k_, (n_ - c.labels[j]) / lookback);
            if (lo > hi) continue;
            out.push_back({c.t0, lo});
            out.push_back({c.t0, hi});
        }
        return out;
    }

    std::vector<Landing> operator()(const BoundaryTrajectory& c) const {
        std::vector<Landing> out;
        const double dn = n_ - c.label;
        if (dn < -tol_.label) return out;  // labels behind the trajectory are unreachable
        for (std::size_t j = 0; j < c.piece_count(); ++j) {
            if (std::abs(dn) <= tol_.label) {
                // rate-zero family straight down in time
                const double lo = std::max(0.0, t_ - c.times[j + 1]);
                const double hi = t_ - c.times[j];
                if (lo > hi) continue;
                if (lo > 0.0) out.push_back({t_ - lo, 0.0});
                if (hi > 0.0) out.push_back({t_ - hi, 0.0});
            } else {
                const double lo = std::max({t_ - c.times[j + 1], dn / k_});
                const double hi = t_ - c.times[j];
                if (lo > hi) continue;
                out.push_back({t_ - lo, dn / lo});
                out.push_back({t_ - hi, dn / hi});
            }
        }
        return out;
    }

    std::vector<Landing> operator()(const InternalCondition& c) const {
        std::vector<Landing> out;
        // Landing at time tau on the segment requires
        //   0 <= n - label(tau) <= k * (t - tau),   tau in [t_min, min(t_max, t)].
        double lo = c.t_min;
        double hi = std::min(c.t_max, t_);
        // n - n_min - r*(tau - t_min) >= 0   <=>   r*tau <= n - n_min + r*t_min
        if (!clip_affine(c.label_rate, n_ - c.n_min + c.label_rate * c.t_min, lo, hi)) return out;
        // n - label(tau) <= k*(t - tau)   <=>   (k - r)*tau <= k*t - (n - n_min) - r*t_min
        if (!clip_affine(k_ - c.label_rate,
                         k_ * t_ - (n_ - c.n_min) - c.label_rate * c.t_min, lo, hi)) {
            return out;
        }
        if (lo > hi) return out;
        for (double tau : {lo, hi}) {
            const double lookback = t_ - tau;
            if (lookback <= 0.0) continue;  // on-support, covered by zero lookback
            const double excess = n_ - c.label_at_time(tau);
            out.push_back({tau, std::clamp(excess / lookback, 0.0, k_)});
        }
        return out;
    }

    std::vector<Landing> operator()(const InternalChain& c) const {
        std::vector<Landing> out;
        for (const InternalCondition& seg : c.segments) {
            auto part = (*this)(seg);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }

    std::vector<Landing> enumerate(const ValueCondition& vc) const {
        return std::visit([&](const auto& c) { return (*this)(c); }, vc);
    }

private:
    /// Intersects [lo, hi] with {tau : a*tau <= b}; false when empty.
    static bool clip_affine(double a, double b, double& lo, double& hi) {
        if (a > 0.0) {
            hi = std::min(hi, b / a);
        } else if (a < 0.0) {
            lo = std::max(lo, b / a);
        } else if (b < 0.0) {
            return false;
        }
        return lo <= hi;
    }

    double k_;
    double t_;
    double n_;
    SupportTolerance tol_;
};

}  // namespace oracle_detail

/// Brute-force evaluation of the variational formula
///
///   X(t, n) = inf over rates u in [0, k] and lookbacks T in [0, t] of
///             condition(t - T, n - T*u) + T * conjugate(u)
///
/// minimized over all conditions: a uniform grid over (u, T) plus, for every
/// affine support piece, the endpoints of the exact landing families, so the
/// infimum is attained despite the supports being measure-zero curves.
///
/// With exact landings disabled the search may return +infinity even though
/// the point is reachable; that situation throws GridTooCoarse instead of
/// silently reporting an unreachable point.
inline double lax_hopf_oracle(const SolutionField& field, double t, double n,
                              OracleGrid grid = {}, bool exact_landing = true) {
    if (grid.rate_points < 2 || grid.time_points < 2) {
        throw PreconditionViolated("oracle grid needs at least 2 points per axis");
    }
    if (!field.domain().contains(t, n, field.tolerance())) {
        std::ostringstream msg;
        msg << "(" << t << ", " << n << ") outside the field domain";
        throw PointOutsideDomain(msg.str());
    }
    const TriangularDiagram& d = field.diagram();
    const double k = d.congested_slope();
    const SupportTolerance tol = field.tolerance();
    double best = kUnreachable;

    const auto candidate = [&](const ValueCondition& vc, double tau, double rate) {
        const double lookback = t - tau;
        if (lookback < 0.0) return;
        const double label = n - lookback * rate;
        const double value = eval_condition(vc, tau, label, tol);
        if (!std::isfinite(value)) return;
        best = std::min(best, value + lookback * d.conjugate(rate));
    };

    const oracle_detail::LandingEnumerator landings(k, t, n, tol);
    for (const ValueCondition& vc : field.conditions()) {
        for (std::size_t iu = 0; iu < grid.rate_points; ++iu) {
            const double u =
                k * static_cast<double>(iu) / static_cast<double>(grid.rate_points - 1);
            for (std::size_t it = 0; it < grid.time_points; ++it) {
                const double lookback =
                    t * static_cast<double>(it) / static_cast<double>(grid.time_points - 1);
                candidate(vc, t - lookback, u);
            }
        }
        if (exact_landing) {
            for (const auto& landing : landings.enumerate(vc)) {
                candidate(vc, landing.time, landing.rate);
            }
        }
    }

    if (!std::isfinite(best) && !exact_landing) {
        for (const ValueCondition& vc : field.conditions()) {
            if (!landings.enumerate(vc).empty()) {
                throw GridTooCoarse(
                    "no grid point landed on any support although the point is reachable");
            }
        }
    }
    return best;
}

}  // namespace laxhopf
