#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bsim/sde.hpp"

namespace bsim::analysis {

// Ideal lock-in: mix with cos/sin references at omega, low-pass both
// quadratures (4-stage single-pole cascade, -3 dB at `bandwidth` Hz).
// Envelope-kind input passes through unchanged.
sde::TrajectorySeries demodulate(const sde::TrajectorySeries& traj, double omega,
                                 double bandwidth);

// Apply the lock-in's low-pass cascade (same 4-stage filter, -3 dB at
// `bandwidth` Hz) to both channels of a series. Lets envelope-integrator
// output be compared against demodulated full trajectories through an
// identical detection bandwidth.
sde::TrajectorySeries lowpass(const sde::TrajectorySeries& traj, double bandwidth);

struct SpectrumResult {
    std::vector<double> f_grid; // Hz, ascending from 0
    std::vector<double> psd;    // units^2/Hz, one-sided
    double resolution = 0.0;    // Hz
    std::string window;
    int segments = 0;
};

enum class Window { hann, rect };

// One-sided Welch average; segments are mean-detrended so the integral of
// the psd matches the series variance.
SpectrumResult welch_psd(std::span<const double> series, double dt,
                         std::size_t segment_length, double overlap, Window window);

struct TelegraphResult {
    std::vector<std::uint8_t> states; // 0 = low, 1 = high
    double gamma_k = 0.0;             // switches per second over the record
    double dwell_low = 0.0;           // mean completed low-state residence, s
    double dwell_high = 0.0;
    int n_switches = 0;
    std::vector<double> switch_times; // s
};

// Schmitt-trigger discretization: the state flips only on crossing the far
// threshold, which eliminates chatter near one level.
TelegraphResult two_state(std::span<const double> envelope, double dt, double low_threshold,
                          double high_threshold);

// Peak bin power at Omega over the local background (median of the 8
// neighbors on each side, excluding the 3 nearest).
double snr_at(const SpectrumResult& spec, double Omega);

// Inversion of the stochastic-resonance relation
//   SNR = pi (gamma_k/delta_omega) x_m^2 (dF m omega / S_total)^2
// for the total force-noise power density.
double infer_total_noise(double snr, double dF, double m_eff, double omega, double x_m,
                         double delta_omega, double gamma_k);

struct Histogram {
    std::vector<double> edges;       // n_bins + 1
    std::vector<std::size_t> counts; // n_bins
};

Histogram amplitude_histogram(std::span<const double> envelope, int n_bins);

} // namespace bsim::analysis
