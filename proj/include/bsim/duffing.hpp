#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace bsim::duffing {

// The physical resonator. k is derived from (m_eff, omega0) and checked for
// consistency; gamma = m_eff * omega0 / Q.
struct ResonatorParams {
    double m = 0.0;       // total mass, kg
    double m_eff = 0.0;   // modal mass, kg
    double omega0 = 0.0;  // rad/s
    double Q = 0.0;
    double k = 0.0;       // N/m
    double alpha = 0.0;   // N/m^3, signed
    double xi = 1.0;

    double gamma() const { return m_eff * omega0 / Q; }
    void validate() const;

    // k filled in from m_eff * omega0^2
    static ResonatorParams make(double m, double m_eff, double omega0, double Q, double alpha,
                                double xi = 1.0);
};

struct AmplitudeRoot {
    double amplitude = 0.0; // m
    bool stable = false;
    bool degenerate = false; // numerically coincident fold pair
};

// Steady-state response amplitudes of the driven Duffing oscillator in the
// rotating-wave approximation: roots of
//   a^2 [ (m_eff (omega0^2 - omega^2) + (3/4) alpha a^2)^2 + (gamma omega)^2 ] = F^2
// as a cubic in a^2. Returns 1 or 3 roots sorted ascending; the middle root
// of a triple is the unstable branch.
std::vector<AmplitudeRoot> steady_amplitudes(const ResonatorParams& p, double F, double omega);

struct CriticalPoint {
    double F_c = 0.0;     // N
    double omega_c = 0.0; // rad/s
    double x_c = 0.0;     // m, amplitude at the fold onset
};

// Closed-form bifurcation onset, cross-checked internally against the root
// count of steady_amplitudes.
CriticalPoint critical_point(const ResonatorParams& p);

enum class SweepDirection { up, down };

struct JumpEvent {
    double control = 0.0;
    double from_amplitude = 0.0;
    double to_amplitude = 0.0;
};

struct SweepBranch {
    std::vector<double> control;    // rad/s (frequency sweep) or N (drive sweep)
    std::vector<double> amplitude;  // m
    std::vector<double> phase;      // rad
    std::vector<JumpEvent> jumps;
    SweepDirection direction = SweepDirection::up;
};

// Frequency sweep at fixed drive, branch-following continuation. Jumps are
// recorded where the followed branch disappears.
SweepBranch hysteresis_sweep(const ResonatorParams& p, double F, double omega_lo,
                             double omega_hi, SweepDirection direction, int n_points);

// Drive-amplitude sweep at fixed frequency; same branch shape.
SweepBranch drive_sweep(const ResonatorParams& p, double omega, double F_lo, double F_hi,
                        SweepDirection direction, int n_points);

// Beam family with fixed material density and aspect ratios; mass sets the
// length scale. Calibrated against the measured device so that the quoted
// intrinsic Duffing constant is reproduced.
struct GeometryScaling {
    double density = 0.0;    // kg/m^3
    double t_over_l = 0.0;
    double w_over_l = 0.0;
    double freq_coeff = 0.0; // omega0 = freq_coeff * t / l^2
    double Q = 3000.0;
    double lambda = 0.0;     // alpha0 = lambda * k / t^2
    double t_over_l_floor = 0.005;

    static GeometryScaling reference_beam();
};

enum class ThresholdMode { intrinsic, chemical };

struct ThresholdPoint {
    double mass = 0.0;
    double F_c = 0.0;
};

std::vector<ThresholdPoint> threshold_vs_mass(std::span<const double> mass_grid,
                                              ThresholdMode mode, double chem_alpha,
                                              const GeometryScaling& geometry);

// Resonator built by the geometry scaling law at a given mass (mode decides
// which alpha it carries). Exposed for the threshold oracle.
ResonatorParams resonator_at_mass(double mass, ThresholdMode mode, double chem_alpha,
                                  const GeometryScaling& geometry);

} // namespace bsim::duffing
