#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "laxhopf/fundamental_diagram.hpp"
#include "laxhopf/value_conditions.hpp"

namespace laxhopf {

/// Discretised spacing profile for the conservation form of the vehicle
/// dynamics: spacing is conserved in label space with the speed as its flux,
/// and the flux is nondecreasing, so the first-order Godunov scheme reduces to
/// an upwind difference taking each cell's left neighbour.
///
/// Cells cover [n_first + i*dn, n_first + (i+1)*dn]; the left boundary is
/// driven by an inflow speed converted to a ghost spacing on the congested
/// branch, the right boundary copies the last interior cell (outflow).
struct UpwindState {
    explicit UpwindState(TriangularDiagram d) : diagram(d) {}

    TriangularDiagram diagram;
    double n_first = 0.0;
    double dn = 1.0;   // veh
    double dt = 0.1;   // s
    double time = 0.0; // s
    std::vector<double> spacing;  // m/veh per cell
};

namespace upwind_detail {

/// Flux extended linearly below the jam spacing so transient boundary states
/// never leave the scheme's domain.
inline double flux(const TriangularDiagram& d, double s) {
    return std::min(d.congested_slope() * s, d.free_flow_speed());
}

}  // namespace upwind_detail

/// Ghost-cell spacing for an inflow moving at `speed`: the congested-branch
/// inverse speed/k, or the critical spacing once the speed saturates (the
/// inverse is set-valued at v_max; the smallest spacing is taken).
inline double ghost_spacing_for_speed(const TriangularDiagram& d, double speed) {
    if (speed >= d.free_flow_speed()) return d.critical_spacing();
    return speed / d.congested_slope();
}

/// Speed of a boundary trajectory at time t (clamped onto the record; the
/// trajectory keeps its last speed past the data end).
inline double boundary_speed_at(const BoundaryTrajectory& c, double t) {
    const double tc = std::clamp(t, c.times.front(), c.times.back());
    return c.speeds[detail::piece_index(c.times, tc)];
}

/// One explicit step; `inflow_speed` is the upstream trajectory's speed over
/// the step. Throws CFLViolation when dt exceeds dn / k.
inline UpwindState step(const UpwindState& state, double inflow_speed) {
    const double k = state.diagram.congested_slope();
    if (state.dt > state.dn / k * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt " << state.dt << " exceeds dn/k = " << state.dn / k;
        throw CFLViolation(msg.str());
    }
    UpwindState next = state;
    next.time = state.time + state.dt;
    const double lambda = state.dt / state.dn;
    const double ghost = ghost_spacing_for_speed(state.diagram, inflow_speed);
    double flux_left = upwind_detail::flux(state.diagram, ghost);
    for (std::size_t i = 0; i < state.spacing.size(); ++i) {
        const double flux_here = upwind_detail::flux(state.diagram, state.spacing[i]);
        next.spacing[i] = state.spacing[i] - lambda * (flux_here - flux_left);
        flux_left = flux_here;
    }
    return next;
}

/// Position history on the node grid, recovered from spacing by summing cells
/// leftward from the anchored upstream trajectory:
///   X(t, n_first) = anchor(t),  X(t, node i+1) = X(t, node i) - spacing_i * dn
struct UpwindRun {
    std::vector<double> times;      // nt
    std::vector<double> labels;     // nn = cells + 1 node labels
    std::vector<double> positions;  // row-major X(t, n), nt x nn

    double at(std::size_t it, std::size_t in) const { return positions[it * labels.size() + in]; }
};

namespace upwind_detail {

inline void append_position_row(const UpwindState& state, double anchor, UpwindRun& run) {
    double x = anchor;
    run.positions.push_back(x);
    for (double s : state.spacing) {
        x -= s * state.dn;
        run.positions.push_back(x);
    }
    run.times.push_back(state.time);
}

}  // namespace upwind_detail

/// Integrates an initial+upstream scenario to t_end and returns the position
/// history. `cfl` scales the time step relative to dn/k; the final step is
/// shortened to land exactly on t_end.
inline UpwindRun integrate_upwind(const TriangularDiagram& d, const InitialCondition& initial,
                                  const UpstreamCondition& upstream, double n_last, double t_end,
                                  double dn, double cfl = 1.0) {
    if (!(cfl > 0.0) || cfl > 1.0) throw CFLViolation("cfl must lie in (0, 1]");
    UpwindState state(d);
    state.n_first = upstream.label;
    state.dn = dn;
    state.dt = cfl * dn / d.congested_slope();
    state.time = initial.t0;
    const double full_dt = state.dt;
    const std::size_t cells =
        static_cast<std::size_t>(std::llround((n_last - state.n_first) / dn));
    if (cells == 0) throw PreconditionViolated("upwind grid needs at least one cell");
    state.spacing.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double mid = state.n_first + (static_cast<double>(i) + 0.5) * dn;
        state.spacing[i] = initial.spacing_at(mid);
    }

    UpwindRun run;
    run.labels.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        run.labels[i] = state.n_first + static_cast<double>(i) * dn;
    }
    upwind_detail::append_position_row(state, upstream.value_at(state.time), run);
    while (state.time < t_end - 1e-9) {
        state.dt = std::min(full_dt, t_end - state.time);
        const double speed_now = boundary_speed_at(upstream, state.time);
        state = step(state, speed_now);
        upwind_detail::append_position_row(state, upstream.value_at(state.time), run);
    }
    return run;
}

/// Total spacing content, the conserved quantity up to boundary fluxes.
inline double total_spacing(const UpwindState& state) {
    double sum = 0.0;
    for (double s : state.spacing) sum += s;
    return sum * state.dn;
}

}  // namespace laxhopf
