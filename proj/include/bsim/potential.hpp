#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsim::potential {

// One power-law contribution c * x^-p to the interaction energy.
// coefficient in J*m^p (signed), exponent p > 0.
struct PowerLawTerm {
    double coefficient = 0.0;
    double exponent = 1.0;
};

// Parametric interaction potential U(x) = sum of power-law terms, valid on
// a window 0 < x_min_valid < x_max_valid. x is the gap coordinate of the
// bond; evaluation outside the window throws, never extrapolates.
struct PotentialModel {
    std::vector<PowerLawTerm> terms;
    double x_min_valid = 0.0;
    double x_max_valid = 0.0;

    void validate() const;
    bool contains(double x) const { return x >= x_min_valid && x <= x_max_valid; }
};

// U and derivatives, exact for power laws. order in {0,..,4}:
// d^n/dx^n (c x^-p) = c * prod_{j=0..n-1}(-p-j) * x^(-p-n).
double eval(const PotentialModel& model, double x, int order);

struct FitError : std::runtime_error {
    FitError(const std::string& what, PotentialModel best_iterate, double residual)
        : std::runtime_error(what), best(std::move(best_iterate)), residual_norm(residual) {}
    PotentialModel best;
    double residual_norm;
};

struct FitResult {
    PotentialModel model;
    double residual_norm = 0.0;
    int iterations = 0;
};

// Levenberg-Marquardt fit of A/x^a + B/x^b to sampled (x, U), analytic
// Jacobian, all four parameters free. init must carry exactly two terms
// (the initial guess). Validity window of the result is the sample range.
FitResult fit_two_power(std::span<const std::pair<double, double>> samples,
                        const PotentialModel& init);

struct NoSignChangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root of U'' inside the validity window (bisection to 1e-12 relative).
// This is where the attractive force is strongest and the induced stiffness
// change vanishes.
double max_attraction_point(const PotentialModel& model);

// Default short-range bond model: Lennard-Jones-shaped 12-6 pair calibrated
// so that |(-1/6) U''''| = 2e22 N/m^3 at the max-attraction point with a
// gold-like bond length. A stand-in for an ab-initio energy curve, which is
// not available in numeric form.
PotentialModel gold_contact_model();

// Anchors the default model is calibrated to.
inline constexpr double gold_contact_x_star = 3.2e-10;      // m
inline constexpr double gold_contact_alpha_star = 2.0e22;   // N/m^3

} // namespace bsim::potential
