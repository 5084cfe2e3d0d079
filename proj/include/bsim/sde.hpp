#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsim/duffing.hpp"

namespace bsim::sde {

// Harmonic drive with optional slow amplitude modulation:
// F(t) = (F_drive + dF cos(Omega t)) cos(omega t + phase0).
struct DriveSpec {
    double F_drive = 0.0; // N
    double omega = 0.0;   // rad/s
    double dF = 0.0;      // modulation depth, N
    double Omega = 0.0;   // modulation frequency, rad/s
    double phase0 = 0.0;  // rad

    double amplitude_at(double t) const;
    void validate(const duffing::ResonatorParams& p) const;
};

// White force noise, one-sided power density S_F (N^2/Hz).
struct NoiseSpec {
    double S_F = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0; // ensemble member id

    void validate() const;
};

enum class TrajectoryKind { full, envelope };

// Uniformly sampled series: one channel (x) for full-coordinate runs, two
// slow quadratures (u, v) for envelope runs. metadata is a JSON echo of all
// parameters that produced the series.
struct TrajectorySeries {
    double t0 = 0.0;
    double dt = 0.0;
    TrajectoryKind kind = TrajectoryKind::full;
    std::vector<double> ch1; // x or u
    std::vector<double> ch2; // v (envelope only)
    std::string metadata;

    std::size_t size() const { return ch1.size(); }
    double time_at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    // quadrature magnitude; for full series just |x|
    double amplitude(std::size_t i) const;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, double t)
        : std::runtime_error(what), last_finite_time(t) {}
    double last_finite_time;
};

// Full-coordinate stochastic Heun integration of
//   m_eff x'' + gamma x' + k x + alpha x^3 = F(t) + F_noise(t).
// Per-step noise impulse has std sqrt(S_F / (2 dt)) (one-sided PSD
// convention). Bit-reproducible for identical inputs. sample_stride > 1
// records every stride-th step.
TrajectorySeries simulate_full(const duffing::ResonatorParams& p, const DriveSpec& d,
                               const NoiseSpec& n, double dt, double duration,
                               int sample_stride = 1);

// Rotating-frame envelope integration of the slow quadratures (u, v) with
//   x(t) = u cos(omega t) - v sin(omega t).
// Deterministic fixed points coincide with the steady_amplitudes roots.
TrajectorySeries simulate_envelope(const duffing::ResonatorParams& p, const DriveSpec& d,
                                   const NoiseSpec& n, double dt, double duration,
                                   int sample_stride = 1);

// Brownian thermal force noise S_F = 4 m_eff omega0 k_B T / Q.
// The caller supplies the seed.
NoiseSpec thermal_noise_for(const duffing::ResonatorParams& p, double T);

} // namespace bsim::sde
