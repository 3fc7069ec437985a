#pragma once

#include <string>

#include "laxhopf/fundamental_diagram.hpp"
#include "laxhopf/solver.hpp"

namespace laxhopf {

inline constexpr double kMetersPerMile = 1609.344;

/// Everything a run needs to be reproducible: domain, diagram calibration,
/// grid resolution, tolerances, and input unit conventions. All quantities are
/// SI; positions given in miles are converted at ingestion using the origin
/// postmile.
struct ScenarioConfig {
    // domain [0, t_end] x [n_first, n_last]
    double t_end = 3600.0;     // s
    double n_first = 0.0;      // veh
    double n_last = 5000.0;    // veh

    // triangular diagram calibration
    double v_max = 31.5;       // m/s
    double rho_max = 0.5;      // veh/m
    double rho_star = 0.055;   // veh/m

    // output grid resolution
    std::size_t grid_nt = 181;
    std::size_t grid_nn = 301;

    double probe_sampling_interval = 60.0;  // s, probe downsampling
    double density_floor = 1e-4;            // veh/m, coordinate-inversion margin

    SupportTolerance support_tol;   // tau_dom (label) and time tolerance
    double tau_compat = 0.5;        // m, compatibility audit threshold
    double clamp_epsilon = 0.01;    // m/s, GPS backward-drift clamp

    enum class PositionUnit { meters, miles };
    PositionUnit position_unit = PositionUnit::meters;
    double origin_postmile = 0.0;   // postmile mapped to x = 0 for mile inputs

    double detector_position = 0.0;  // m, loop-detector location
    double stretch_from = 0.0;       // m, travel-time stretch
    double stretch_to = 5500.0;      // m

    TriangularDiagram diagram() const {
        return TriangularDiagram::from_free_flow_speed(v_max, rho_max, rho_star);
    }

    Domain domain() const { return Domain{t_end, n_first, n_last}; }

    void validate() const {
        if (!(t_end > 0.0)) throw PreconditionViolated("t_end must be positive");
        if (!(n_last > n_first) || n_first < 0.0) {
            throw PreconditionViolated("labels must satisfy 0 <= n_first < n_last");
        }
        if (!(probe_sampling_interval > 0.0)) {
            throw PreconditionViolated("probe sampling interval must be positive");
        }
        if (!(density_floor > 0.0)) throw PreconditionViolated("density floor must be positive");
        diagram();  // throws InconsistentDiagram on bad calibration
    }

    /// Converts a raw input position to meters per the configured unit.
    double position_to_meters(double raw) const {
        if (position_unit == PositionUnit::miles) {
            return (raw - origin_postmile) * kMetersPerMile;
        }
        return raw;
    }
};

}  // namespace laxhopf
