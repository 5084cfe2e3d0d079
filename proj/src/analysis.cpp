#include "bsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "bsim/constants.hpp"

namespace bsim::analysis {

using sde::TrajectoryKind;
using sde::TrajectorySeries;

namespace {

// 4 identical single poles; scale the per-stage corner so the cascade is
// -3 dB at `bandwidth`
double cascade_alpha(double dt, double bandwidth) {
    const double fc_stage = bandwidth / std::sqrt(std::pow(2.0, 0.25) - 1.0);
    const double rc = 1.0 / (2.0 * pi * fc_stage);
    return dt / (rc + dt);
}

} // namespace

TrajectorySeries lowpass(const TrajectorySeries& traj, double bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("lowpass: bandwidth must be > 0");
    if (traj.size() < 2) throw std::invalid_argument("lowpass: empty trajectory");
    const double a = cascade_alpha(traj.dt, bandwidth);
    TrajectorySeries out = traj;
    double s1[4] = {0, 0, 0, 0};
    double s2[4] = {0, 0, 0, 0};
    // start the cascade settled on the first sample to avoid a turn-on ramp
    for (int s = 0; s < 4; ++s) {
        s1[s] = traj.ch1.front();
        if (!traj.ch2.empty()) s2[s] = traj.ch2.front();
    }
    for (std::size_t n = 0; n < traj.size(); ++n) {
        double c1 = traj.ch1[n];
        for (int s = 0; s < 4; ++s) {
            s1[s] += a * (c1 - s1[s]);
            c1 = s1[s];
        }
        out.ch1[n] = c1;
        if (!traj.ch2.empty()) {
            double c2 = traj.ch2[n];
            for (int s = 0; s < 4; ++s) {
                s2[s] += a * (c2 - s2[s]);
                c2 = s2[s];
            }
            out.ch2[n] = c2;
        }
    }
    return out;
}

TrajectorySeries demodulate(const TrajectorySeries& traj, double omega, double bandwidth) {
    if (traj.kind == TrajectoryKind::envelope) return traj;
    if (!(bandwidth > 0.0) || bandwidth >= omega / (2.0 * pi) / 5.0)
        throw std::invalid_argument("demodulate: bandwidth must be < f_carrier/5");
    if (traj.size() < 2) throw std::invalid_argument("demodulate: empty trajectory");

    const double a = cascade_alpha(traj.dt, bandwidth);

    TrajectorySeries out;
    out.t0 = traj.t0;
    out.dt = traj.dt;
    out.kind = TrajectoryKind::envelope;
    out.metadata = traj.metadata;
    out.ch1.resize(traj.size());
    out.ch2.resize(traj.size());

    double si[4] = {0, 0, 0, 0};
    double sq[4] = {0, 0, 0, 0};
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const double t = traj.time_at(n);
        const double x = traj.ch1[n];
        double i_raw = 2.0 * x * std::cos(omega * t);
        double q_raw = -2.0 * x * std::sin(omega * t);
        for (int s = 0; s < 4; ++s) {
            si[s] += a * (i_raw - si[s]);
            i_raw = si[s];
            sq[s] += a * (q_raw - sq[s]);
            q_raw = sq[s];
        }
        out.ch1[n] = i_raw;
        out.ch2[n] = q_raw;
    }
    return out;
}

namespace {
std::mutex fftw_plan_mutex;
}

SpectrumResult welch_psd(std::span<const double> series, double dt,
                         std::size_t segment_length, double overlap, Window window) {
    if (segment_length < 2 || segment_length > series.size())
        throw std::invalid_argument("welch_psd: segment longer than series");
    if (!(overlap >= 0.0) || !(overlap < 1.0))
        throw std::invalid_argument("welch_psd: overlap must be in [0, 1)");
    if (!(dt > 0.0)) throw std::invalid_argument("welch_psd: dt must be > 0");

    const std::size_t n = segment_length;
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(n * (1.0 - overlap))));
    const std::size_t n_segs = 1 + (series.size() - n) / hop;

    std::vector<double> win(n);
    double win_power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        win[i] = window == Window::hann
                     ? 0.5 * (1.0 - std::cos(2.0 * pi * i / static_cast<double>(n)))
                     : 1.0;
        win_power += win[i] * win[i];
    }

    const std::size_t n_bins = n / 2 + 1;
    std::vector<double> acc(n_bins, 0.0);
    std::vector<double> buf(n);
    std::vector<fftw_complex> spec(n_bins);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.data(), spec.data(),
                                    FFTW_ESTIMATE);
    }

    for (std::size_t s = 0; s < n_segs; ++s) {
        const double* seg = series.data() + s * hop;
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += seg[i];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) buf[i] = (seg[i] - mean) * win[i];
        fftw_execute(plan);
        for (std::size_t k = 0; k < n_bins; ++k)
            acc[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    }
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_destroy_plan(plan);
    }

    const double fs = 1.0 / dt;
    SpectrumResult out;
    out.resolution = fs / static_cast<double>(n);
    out.window = window == Window::hann ? "hann" : "rect";
    out.segments = static_cast<int>(n_segs);
    out.f_grid.resize(n_bins);
    out.psd.resize(n_bins);
    const double norm = 1.0 / (fs * win_power * static_cast<double>(n_segs));
    for (std::size_t k = 0; k < n_bins; ++k) {
        out.f_grid[k] = static_cast<double>(k) * out.resolution;
        const bool interior = k > 0 && !(n % 2 == 0 && k == n_bins - 1);
        out.psd[k] = acc[k] * norm * (interior ? 2.0 : 1.0);
    }
    return out;
}

TelegraphResult two_state(std::span<const double> envelope, double dt, double low_threshold,
                          double high_threshold) {
    if (envelope.size() < 2) throw std::invalid_argument("two_state: series too short");
    if (!(low_threshold < high_threshold))
        throw std::invalid_argument("two_state: low_threshold must be < high_threshold");
    const auto [mn, mx] = std::minmax_element(envelope.begin(), envelope.end());
    if (low_threshold < *mn || high_threshold > *mx)
        throw std::invalid_argument("two_state: thresholds outside data range");

    TelegraphResult out;
    out.states.resize(envelope.size());
    std::uint8_t state = envelope[0] > 0.5 * (low_threshold + high_threshold) ? 1 : 0;
    out.states[0] = state;
    double last_switch = 0.0;
    double dwell_sum[2] = {0.0, 0.0};
    int dwell_count[2] = {0, 0};
    for (std::size_t i = 1; i < envelope.size(); ++i) {
        const double x = envelope[i];
        if ((state == 0 && x > high_threshold) || (state == 1 && x < low_threshold)) {
            const double t = dt * static_cast<double>(i);
            dwell_sum[state] += t - last_switch;
            ++dwell_count[state];
            last_switch = t;
            state ^= 1;
            ++out.n_switches;
            out.switch_times.push_back(t);
        }
        out.states[i] = state;
    }
    const double duration = dt * static_cast<double>(envelope.size() - 1);
    out.gamma_k = out.n_switches / duration;
    out.dwell_low = dwell_count[0] > 0 ? dwell_sum[0] / dwell_count[0] : 0.0;
    out.dwell_high = dwell_count[1] > 0 ? dwell_sum[1] / dwell_count[1] : 0.0;
    return out;
}

double snr_at(const SpectrumResult& spec, double Omega) {
    const double f = Omega / (2.0 * pi);
    if (spec.f_grid.empty() || f < spec.f_grid.front() - spec.resolution ||
        f > spec.f_grid.back() + spec.resolution)
        throw std::invalid_argument("snr_at: Omega outside frequency grid");
    const auto j = static_cast<std::ptrdiff_t>(std::lround(f / spec.resolution));
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(spec.f_grid.size()) ||
        std::fabs(spec.f_grid[j] - f) > spec.resolution)
        throw std::invalid_argument("snr_at: Omega not within one bin of the grid");

    std::vector<double> bg;
    for (int side = -1; side <= 1; side += 2) {
        for (int o = 4; o <= 11; ++o) {
            const std::ptrdiff_t idx = j + side * o;
            if (idx >= 1 && idx < static_cast<std::ptrdiff_t>(spec.psd.size()))
                bg.push_back(spec.psd[idx]);
        }
    }
    if (bg.size() < 3) throw std::invalid_argument("snr_at: not enough background bins");
    std::nth_element(bg.begin(), bg.begin() + bg.size() / 2, bg.end());
    const double med = bg[bg.size() / 2];
    if (!(med > 0.0)) throw std::invalid_argument("snr_at: zero background");
    return spec.psd[j] / med;
}

double infer_total_noise(double snr, double dF, double m_eff, double omega, double x_m,
                         double delta_omega, double gamma_k) {
    if (!(snr > 0.0) || !(dF > 0.0) || !(m_eff > 0.0) || !(omega > 0.0) || !(x_m > 0.0) ||
        !(delta_omega > 0.0) || !(gamma_k > 0.0))
        throw std::invalid_argument("infer_total_noise: all inputs must be positive");
    return dF * m_eff * omega * x_m * std::sqrt(pi * gamma_k / (delta_omega * snr));
}

Histogram amplitude_histogram(std::span<const double> envelope, int n_bins) {
    if (n_bins < 8) throw std::invalid_argument("amplitude_histogram: n_bins >= 8");
    if (envelope.empty()) throw std::invalid_argument("amplitude_histogram: empty series");
    const auto [mn_it, mx_it] = std::minmax_element(envelope.begin(), envelope.end());
    const double mn = *mn_it;
    double width = (*mx_it - mn) / n_bins;
    if (width == 0.0) width = std::max(std::fabs(mn) * 1e-12, 1e-300);

    Histogram h;
    h.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) h.edges[i] = mn + width * i;
    h.counts.assign(n_bins, 0);
    for (const double x : envelope) {
        auto bin = static_cast<std::ptrdiff_t>((x - mn) / width);
        bin = std::clamp<std::ptrdiff_t>(bin, 0, n_bins - 1);
        ++h.counts[bin];
    }
    return h;
}

} // namespace bsim::analysis
