#pragma once

#include <cmath>
#include <sstream>

#include "laxhopf/errors.hpp"

namespace laxhopf {

/// Triangular spacing-velocity relationship and its concave conjugate.
///
/// Speed grows linearly with spacing (slope k) up to the critical spacing,
/// then saturates at the free-flow speed. The construction enforces
/// continuity at the critical spacing: k * critical_spacing == free_flow_speed.
/// Note the speed at jam spacing is k * jam_spacing > 0; no zero-speed clamp
/// is applied.
///
/// Immutable after construction; concurrent reads are safe.
class TriangularDiagram {
public:
    /// Derives the congested slope k = v_max / s_star.
    static TriangularDiagram from_free_flow_speed(double v_max, double rho_max, double rho_star) {
        check_densities(rho_max, rho_star);
        if (!(v_max > 0.0)) throw InconsistentDiagram("free-flow speed must be positive");
        return TriangularDiagram(v_max, v_max * rho_star, rho_max, rho_star);
    }

    /// Derives the free-flow speed v_max = k * s_star.
    static TriangularDiagram from_congested_slope(double k, double rho_max, double rho_star) {
        check_densities(rho_max, rho_star);
        if (!(k > 0.0)) throw InconsistentDiagram("congested slope must be positive");
        return TriangularDiagram(k / rho_star, k, rho_max, rho_star);
    }

    /// Accepts all four parameters; throws InconsistentDiagram unless
    /// |k * s_star - v_max| <= 1e-6 * v_max.
    static TriangularDiagram checked(double v_max, double k, double rho_max, double rho_star) {
        check_densities(rho_max, rho_star);
        const double s_star = 1.0 / rho_star;
        if (std::abs(k * s_star - v_max) > 1e-6 * v_max) {
            std::ostringstream msg;
            msg << "diagram parameters are inconsistent: k*s_star = " << k * s_star
                << " but v_max = " << v_max;
            throw InconsistentDiagram(msg.str());
        }
        return TriangularDiagram(v_max, k, rho_max, rho_star);
    }

    double free_flow_speed() const { return v_max_; }    // m/s
    double jam_density() const { return rho_max_; }      // veh/m
    double critical_density() const { return rho_star_; }// veh/m
    double congested_slope() const { return k_; }        // 1/s
    double jam_spacing() const { return s_min_; }        // m/veh
    double critical_spacing() const { return s_star_; }  // m/veh
    double capacity() const { return capacity_; }        // veh/s

    /// Speed of traffic at spacing s (the piecewise-affine Hamiltonian).
    double speed_at_spacing(double s) const {
        if (s < s_min_) {
            std::ostringstream msg;
            msg << "spacing " << s << " below jam spacing " << s_min_;
            throw SpacingBelowJam(msg.str());
        }
        return s <= s_star_ ? k_ * s : v_max_;
    }

    /// Concave conjugate sup_{s >= s_min} (speed_at_spacing(s) - u*s),
    /// defined for label rates u in [0, k].
    double conjugate(double u) const {
        if (u < 0.0 || u > k_) {
            std::ostringstream msg;
            msg << "conjugate argument " << u << " outside [0, " << k_ << "]";
            throw ConjugateOutOfDomain(msg.str());
        }
        return s_star_ * (k_ - u);
    }

    /// Flow at density rho, i.e. rho * speed at spacing 1/rho.
    double flow_from_density(double rho) const {
        if (!(rho > 0.0) || rho > rho_max_) {
            std::ostringstream msg;
            msg << "density " << rho << " outside (0, " << rho_max_ << "]";
            throw DensityOutOfRange(msg.str());
        }
        return rho * speed_at_spacing(1.0 / rho);
    }

private:
    TriangularDiagram(double v_max, double k, double rho_max, double rho_star)
        : v_max_(v_max),
          rho_max_(rho_max),
          rho_star_(rho_star),
          k_(k),
          s_min_(1.0 / rho_max),
          s_star_(1.0 / rho_star),
          capacity_(v_max * rho_star) {}

    static void check_densities(double rho_max, double rho_star) {
        if (!(rho_star > 0.0) || !(rho_star < rho_max)) {
            throw InconsistentDiagram("densities must satisfy 0 < rho_star < rho_max");
        }
    }

    double v_max_;
    double rho_max_;
    double rho_star_;
    double k_;
    double s_min_;
    double s_star_;
    double capacity_;
};

}  // namespace laxhopf
