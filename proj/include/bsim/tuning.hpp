#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "bsim/potential.hpp"

namespace bsim::tuning {

// The beam as seen by the bond: intrinsic stiffness k0, modal shape
// constant xi, and the gap x_free the bond sits at with no control force.
struct BeamAnchor {
    double k0 = 0.0;      // N/m
    double xi = 1.0;      // dimensionless, 0 < xi <= 1
    double x_free = 0.0;  // m, inside the potential window

    void validate(const potential::PotentialModel& model) const;
};

struct TunePoint {
    double F = 0.0;      // control force, N (as supplied by the caller)
    double x_eq = 0.0;   // m
    double dk = 0.0;     // -U''(x_eq), N/m
    double alpha = 0.0;  // -(1/6) U''''(x_eq), N/m^3
    double k_eff = 0.0;  // k0 + U''(x_eq), N/m
    bool stable = false;
};

struct InstabilityError : std::runtime_error {
    InstabilityError(const std::string& what, double last_stable)
        : std::runtime_error(what), last_stable_force(last_stable) {}
    double last_stable_force; // last F for which a stable root existed
};

// Static equilibrium: root of k0 (x - x_free) + U'(x) = F on the stable
// branch continuously connected to x_free. Throws InstabilityError when the
// branch folds (jump to contact) and domain_error when the root leaves the
// model window.
double equilibrium(const potential::PotentialModel& model, const BeamAnchor& anchor, double F);

struct TuneCurve {
    std::vector<TunePoint> points;
    bool truncated = false;        // hit jump-to-contact before the grid end
    double last_stable_F = 0.0;    // caller-frame force of the last stable point
};

// Quasi-static tuning curve over a strictly monotone force grid.
// force_sign maps the caller's F to the equation force (+1 literal; -1 when
// positive F means "push toward contact" in a gap coordinate). Truncates at
// the first instability instead of failing.
TuneCurve tune_curve(const potential::PotentialModel& model, const BeamAnchor& anchor,
                     std::span<const double> F_grid, int force_sign = 1);

// Centered moving mean; edges shrink the window symmetrically.
std::vector<std::pair<double, double>> smooth_running_average(
    std::span<const std::pair<double, double>> series, int window);

struct AlphaPoint {
    double F = 0.0;
    double alpha = 0.0;
    bool interior = true; // false on the one-sided endpoint stencils
};

// Inverse estimator: alpha = (1/(6 xi^2)) [ (d2 dk/dF2) k^2 + (d dk/dF)^2 k ]
// after a 5-point running average, with 3-point stencils on the possibly
// nonuniform F grid.
std::vector<AlphaPoint> estimate_alpha_from_dk(
    std::span<const std::pair<double, double>> samples, double k, double xi);

} // namespace bsim::tuning
