#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "laxhopf/fundamental_diagram.hpp"
#include "laxhopf/value_conditions.hpp"

namespace laxhopf {

/// Rectangle [0, t_end] x [n_first, n_last] the field is solved on.
struct Domain {
    double t_end = 0.0;
    double n_first = 0.0;
    double n_last = 0.0;

    bool contains(double t, double n, SupportTolerance tol = {}) const {
        return t >= -tol.time && t <= t_end + tol.time && n >= n_first - tol.label &&
               n <= n_last + tol.label;
    }
};

/// Which closed-form piece produced a value. Branches are listed in the order
/// they are considered; ties resolve to the earlier entry.
enum class SolutionBranch : std::uint8_t {
    none,
    initial_translate,      // profile carried along rate-k characteristics (or at v_max)
    initial_fan,            // fan emanating from a profile breakpoint
    upstream_fan,           // fan past the end of a boundary piece
    upstream_wave,          // boundary value carried into the domain at rate k
    downstream_extension,   // free-flow continuation past a downstream piece
    internal_wave,          // segment value carried along rate-k characteristics
    internal_passing_fan,   // fan through the segment interior (label_rate > 0)
    internal_endpoint_fan,  // fan from the segment end point
    condition_support,      // the condition's own value (zero-lookback term)
};

inline const char* to_string(SolutionBranch b) {
    switch (b) {
        case SolutionBranch::none: return "none";
        case SolutionBranch::initial_translate: return "initial_translate";
        case SolutionBranch::initial_fan: return "initial_fan";
        case SolutionBranch::upstream_fan: return "upstream_fan";
        case SolutionBranch::upstream_wave: return "upstream_wave";
        case SolutionBranch::downstream_extension: return "downstream_extension";
        case SolutionBranch::internal_wave: return "internal_wave";
        case SolutionBranch::internal_passing_fan: return "internal_passing_fan";
        case SolutionBranch::internal_endpoint_fan: return "internal_endpoint_fan";
        case SolutionBranch::condition_support: return "condition_support";
    }
    return "unknown";
}

/// Value of one condition's solution at a point, with the branch that won.
struct PieceSolution {
    double value = kUnreachable;
    SolutionBranch branch = SolutionBranch::none;
};

/// Fused solution value at a point with provenance.
struct Evaluation {
    double value = kUnreachable;
    std::optional<std::size_t> condition;  // index of the attaining condition
    SolutionBranch branch = SolutionBranch::none;

    bool finite() const { return std::isfinite(value); }
};

namespace detail {

inline void consider(PieceSolution& best, double value, SolutionBranch branch) {
    if (value < best.value) best = {value, branch};
}

inline void merge(PieceSolution& best, const PieceSolution& candidate) {
    if (candidate.value < best.value) best = candidate;
}

}  // namespace detail

// --- closed-form solutions per affine piece ----------------------------------
//
// Each solver returns the value of the single-condition solution restricted to
// the influence region of one affine piece, and +infinity outside it. Branch
// domains use closed inequalities; where two branches overlap they agree on
// the shared edge and the minimum is returned.

/// Initial/intermediate value problem, piece j.
inline PieceSolution solve_initial_piece(const TriangularDiagram& d, const InitialCondition& c,
                                         std::size_t j, double t, double n) {
    PieceSolution out;
    const double tau = t - c.t0;
    if (tau < 0.0) return out;
    const double k = d.congested_slope();
    const double s_star = d.critical_spacing();
    const double nj = c.labels[j];
    const double nj1 = c.labels[j + 1];
    const double sj = c.spacings[j];
    const double dj = c.offsets[j];
    if (sj <= s_star) {
        if (n >= nj + k * tau && n <= nj1 + k * tau) {
            detail::consider(out, -sj * n + dj + tau * k * sj, SolutionBranch::initial_translate);
        }
        if (n - nj >= 0.0 && n - nj <= k * tau) {
            detail::consider(out, -sj * nj + dj + tau * s_star * k - s_star * (n - nj),
                             SolutionBranch::initial_fan);
        }
    } else {
        if (n - nj1 >= 0.0 && n - nj1 <= k * tau) {
            detail::consider(out, -sj * nj1 + dj + tau * s_star * k - s_star * (n - nj1),
                             SolutionBranch::initial_fan);
        }
        if (n >= nj && n <= nj1) {
            detail::consider(out, -sj * n + dj + d.free_flow_speed() * tau,
                             SolutionBranch::initial_translate);
        }
    }
    return out;
}

/// Upstream boundary value problem, piece j.
inline PieceSolution solve_upstream_piece(const TriangularDiagram& d, const UpstreamCondition& c,
                                          std::size_t j, double t, double n) {
    PieceSolution out;
    const double k = d.congested_slope();
    const double s_star = d.critical_spacing();
    const double tj = c.times[j];
    const double tj1 = c.times[j + 1];
    const double vj = c.speeds[j];
    const double bj = c.offsets[j];
    const double dn = n - c.label;
    if (dn >= 0.0 && dn <= k * (t - tj1)) {
        detail::consider(out, vj * tj1 + bj + s_star * (k * (t - tj1) - dn),
                         SolutionBranch::upstream_fan);
    }
    if (dn >= std::max(0.0, k * (t - tj1)) && dn <= k * (t - tj)) {
        detail::consider(out, vj * t + bj - dn * vj / k, SolutionBranch::upstream_wave);
    }
    return out;
}

/// Downstream boundary value problem, piece j. Finite only on the downstream
/// label itself, from the end of the piece onward: waves propagate toward
/// larger labels only, so a downstream condition never reaches interior ones.
inline PieceSolution solve_downstream_piece(const TriangularDiagram& d,
                                            const DownstreamCondition& c, std::size_t j, double t,
                                            double n, SupportTolerance tol = {}) {
    PieceSolution out;
    const double tj1 = c.times[j + 1];
    if (std::abs(n - c.label) <= tol.label && t >= tj1) {
        out = {c.speeds[j] * tj1 + c.offsets[j] + (t - tj1) * d.free_flow_speed(),
               SolutionBranch::downstream_extension};
    }
    return out;
}

/// Internal boundary value problem for one segment. The degenerate rates
/// label_rate == k (domain collapses onto the support segment) and
/// label_rate == 0 (no passing fan) take their limiting forms.
inline PieceSolution solve_internal_piece(const TriangularDiagram& d, const InternalCondition& c,
                                          double t, double n) {
    PieceSolution out;
    const double k = d.congested_slope();
    const double s_star = d.critical_spacing();
    const double r = c.label_rate;
    const double dn_min = n - c.n_min;
    const double dn_max = n - c.n_max;

    if (dn_min >= r * (t - c.t_min) && k * (t - c.t_max) < dn_max &&
        dn_min <= k * (t - c.t_min)) {
        double value;
        if (r == k) {
            value = c.position + c.speed * (t - c.t_min);
        } else {
            const double landing_time = (n - c.n_min - k * t + r * c.t_min) / (r - k);
            value = c.position + c.speed * (landing_time - c.t_min);
        }
        detail::consider(out, value, SolutionBranch::internal_wave);
    }
    if (r > 0.0 && dn_min >= 0.0 && dn_min < r * (t - c.t_min) && n <= c.n_max) {
        detail::consider(out,
                         c.position + c.speed * dn_min / r +
                             s_star * k * (t - c.t_min - dn_min / r),
                         SolutionBranch::internal_passing_fan);
    }
    if (dn_max >= 0.0 && dn_max <= k * (t - c.t_max)) {
        detail::consider(out,
                         c.position + c.speed * (c.t_max - c.t_min) +
                             (t - c.t_max) * s_star * k - s_star * dn_max,
                         SolutionBranch::internal_endpoint_fan);
    }
    return out;
}

// --- per-condition solution and fusion ----------------------------------------

/// Single-condition solution value at (t, n): minimum over the condition's
/// affine pieces plus the zero-lookback term (the condition's own value on its
/// support), which keeps the solution at or below the condition everywhere.
inline PieceSolution solve_condition(const TriangularDiagram& d, const ValueCondition& vc,
                                     double t, double n, SupportTolerance tol = {}) {
    PieceSolution out;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, InitialCondition>) {
                for (std::size_t j = 0; j < c.piece_count(); ++j) {
                    detail::merge(out, solve_initial_piece(d, c, j, t, n));
                }
            } else if constexpr (std::is_same_v<T, UpstreamCondition>) {
                for (std::size_t j = 0; j < c.piece_count(); ++j) {
                    detail::merge(out, solve_upstream_piece(d, c, j, t, n));
                }
            } else if constexpr (std::is_same_v<T, DownstreamCondition>) {
                for (std::size_t j = 0; j < c.piece_count(); ++j) {
                    detail::merge(out, solve_downstream_piece(d, c, j, t, n, tol));
                }
            } else if constexpr (std::is_same_v<T, InternalCondition>) {
                detail::merge(out, solve_internal_piece(d, c, t, n));
            } else {
                for (const InternalCondition& seg : c.segments) {
                    detail::merge(out, solve_internal_piece(d, seg, t, n));
                }
            }
        },
        vc);
    detail::consider(out, eval_condition(vc, t, n, tol), SolutionBranch::condition_support);
    return out;
}

/// The fused solution: a diagram, a domain and an ordered set of conditions.
/// Construction verifies every support lies inside the domain (within the
/// support tolerance). Immutable; evaluation is pure and thread-safe.
class SolutionField {
public:
    SolutionField(TriangularDiagram diagram, Domain domain, std::vector<ValueCondition> conditions,
                  SupportTolerance tol = {})
        : diagram_(diagram), domain_(domain), conditions_(std::move(conditions)), tol_(tol) {
        if (conditions_.empty()) throw PreconditionViolated("a field needs at least one condition");
        for (std::size_t i = 0; i < conditions_.size(); ++i) validate_support(i);
    }

    const TriangularDiagram& diagram() const { return diagram_; }
    const Domain& domain() const { return domain_; }
    const std::vector<ValueCondition>& conditions() const { return conditions_; }
    SupportTolerance tolerance() const { return tol_; }

private:
    void validate_support(std::size_t i) const;

    TriangularDiagram diagram_;
    Domain domain_;
    std::vector<ValueCondition> conditions_;
    SupportTolerance tol_;
};

inline void SolutionField::validate_support(std::size_t i) const {
    const auto bad = [&](const char* what) {
        std::ostringstream msg;
        msg << "condition " << i << ": support leaves the domain (" << what << ")";
        throw PreconditionViolated(msg.str());
    };
    const auto check_t = [&](double t) {
        if (t < -tol_.time || t > domain_.t_end + tol_.time) bad("time");
    };
    const auto check_n = [&](double n) {
        if (n < domain_.n_first - tol_.label || n > domain_.n_last + tol_.label) bad("label");
    };
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, InitialCondition>) {
                check_t(c.t0);
                check_n(c.first_label());
                check_n(c.last_label());
            } else if constexpr (std::is_same_v<T, UpstreamCondition> ||
                                 std::is_same_v<T, DownstreamCondition>) {
                check_t(c.first_time());
                check_t(c.last_time());
                check_n(c.label);
            } else if constexpr (std::is_same_v<T, InternalCondition>) {
                check_t(c.t_min);
                check_t(c.t_max);
                check_n(c.n_min);
                check_n(c.n_max);
            } else {
                for (const InternalCondition& seg : c.segments) {
                    check_t(seg.t_min);
                    check_t(seg.t_max);
                    check_n(seg.n_min);
                    check_n(seg.n_max);
                }
            }
        },
        conditions_[i]);
}

/// Pointwise minimum over all conditions (the inf-morphism property): the
/// fused value is exactly the minimum of the single-condition solutions, with
/// the lowest condition index winning ties.
inline Evaluation fuse(const SolutionField& field, double t, double n) {
    if (!field.domain().contains(t, n, field.tolerance())) {
        std::ostringstream msg;
        msg << "(" << t << ", " << n << ") outside the field domain";
        throw PointOutsideDomain(msg.str());
    }
    Evaluation best;
    for (std::size_t i = 0; i < field.conditions().size(); ++i) {
        const PieceSolution s =
            solve_condition(field.diagram(), field.conditions()[i], t, n, field.tolerance());
        if (s.value < best.value) best = {s.value, i, s.branch};
    }
    return best;
}

/// Fused solution sampled on a uniform grid over the domain.
struct GridField {
    std::vector<double> times;   // nt
    std::vector<double> labels;  // nn
    std::vector<Evaluation> cells;  // row-major, cells[it*labels.size() + in]

    const Evaluation& at(std::size_t it, std::size_t in) const {
        return cells[it * labels.size() + in];
    }
};

/// Evaluates fuse on an nt x nn uniform grid. Rows are distributed over
/// workers; every cell is an independent pure evaluation, so the result is
/// identical for any worker count.
inline GridField evaluate_grid(const SolutionField& field, std::size_t nt, std::size_t nn,
                               unsigned workers = 0) {
    if (nt < 2 || nn < 2) throw PreconditionViolated("grid needs at least 2 points per axis");
    GridField grid;
    grid.times.resize(nt);
    grid.labels.resize(nn);
    const Domain& dom = field.domain();
    for (std::size_t i = 0; i < nt; ++i) {
        grid.times[i] = dom.t_end * static_cast<double>(i) / static_cast<double>(nt - 1);
    }
    for (std::size_t j = 0; j < nn; ++j) {
        grid.labels[j] = dom.n_first + (dom.n_last - dom.n_first) * static_cast<double>(j) /
                                           static_cast<double>(nn - 1);
    }
    grid.cells.resize(nt * nn);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(nt));
    const auto run_rows = [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t it = row_begin; it < row_end; ++it) {
            for (std::size_t in = 0; in < nn; ++in) {
                grid.cells[it * nn + in] = fuse(field, grid.times[it], grid.labels[in]);
            }
        }
    };
    if (workers <= 1) {
        run_rows(0, nt);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (nt + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(nt, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_rows, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return grid;
}

}  // namespace laxhopf
