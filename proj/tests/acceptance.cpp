// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Heavy criteria run ensembles in parallel.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bsim/analysis.hpp"
#include "bsim/constants.hpp"
#include "bsim/duffing.hpp"
#include "bsim/noisebudget.hpp"
#include "bsim/potential.hpp"
#include "bsim/rng.hpp"
#include "bsim/scenario.hpp"
#include "bsim/sde.hpp"
#include "bsim/tuning.hpp"

using namespace bsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int n_failed = 0;

void report(int id, bool pass, const std::string& label, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++n_failed;
}

void run(int id, const std::string& label, const std::function<std::pair<bool, std::string>()>& f) {
    try {
        const auto [pass, detail] = f();
        report(id, pass, label, detail);
    } catch (const std::exception& e) {
        report(id, false, label, std::string("exception: ") + e.what());
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

duffing::ResonatorParams paper_device() {
    return duffing::ResonatorParams::make(0.2e-12, 0.1e-12, 2.0 * pi * 1.58e6, 3100.0, -1e17,
                                          0.83);
}

// desk-scale bistable device shared by the stochastic criteria
duffing::ResonatorParams desk_device() {
    return duffing::ResonatorParams::make(2e-6, 1e-6, 2.0 * pi * 1000.0, 50.0, -1e12);
}

// middle of the bistable frequency window at drive F
double mid_window(const duffing::ResonatorParams& p, double F) {
    std::vector<double> bi;
    for (int i = 0; i <= 800; ++i) {
        const double w = p.omega0 * (1.0 - 20.0 / (2.0 * p.Q) * i / 800.0);
        if (duffing::steady_amplitudes(p, F, w).size() == 3) bi.push_back(w);
    }
    if (bi.empty()) throw std::runtime_error("no bistable window");
    return 0.5 * (bi.front() + bi.back());
}

// fine root-count scan for the narrow near-threshold window; returns a point
// 30% of the way up from its low-frequency edge, where both wells stay
// comparably occupied under moderate noise
double near_threshold_omega(const duffing::ResonatorParams& p, double F) {
    double wlo = 0.0, whi = 0.0;
    for (int i = 0; i <= 40000; ++i) {
        const double w = p.omega0 * (1.0 - 0.05 * i / 40000.0);
        if (duffing::steady_amplitudes(p, F, w).size() == 3) {
            if (whi == 0.0) whi = w;
            wlo = w;
        }
    }
    if (whi == 0.0) throw std::runtime_error("no bistable window");
    return wlo + 0.3 * (whi - wlo);
}

int hardware_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 4 : static_cast<int>(hc);
}

// --- criterion 1: noise formulas -------------------------------------------

std::pair<bool, std::string> c1_noise_formulas() {
    const auto p = paper_device();
    const auto s = noisebudget::thermal_source(p, 6.0);
    const double sqrt_sf = std::sqrt(s.S_F);
    const double x_noise = sqrt_sf * p.Q / p.k; // on-resonance displacement
    const bool ok_f = std::fabs(sqrt_sf / 3.3e-16 - 1.0) < 0.05;
    const bool ok_x = std::fabs(x_noise / 1.0e-13 - 1.0) < 0.05;
    return {ok_f && ok_x, "sqrt(S_F)=" + fmt(sqrt_sf) + " N/rtHz vs 3.3e-16 +-5%, x_noise=" +
                              fmt(x_noise) + " m/rtHz vs 1.0e-13 +-5%"};
}

// --- criterion 2: budget arithmetic ----------------------------------------

std::pair<bool, std::string> c2_budget() {
    std::vector<noisebudget::NoiseSource> sources = {
        {"thermal", 3.3e-16 * 3.3e-16, noisebudget::Provenance::thermal},
        {"parametric", 0.9e-16 * 0.9e-16, noisebudget::Provenance::custom}};
    const auto b = noisebudget::combine(sources, 6.0);
    const double dB = b.breakdown[1].dB_rel_thermal;
    const bool ok_db = std::fabs(dB + 11.0) <= 0.5;
    const bool ok_t = b.T_parametric >= 0.44 && b.T_parametric <= 0.50;
    return {ok_db && ok_t, "parametric at " + fmt(dB) + " dB (target -11 +-0.5), T_para=" +
                               fmt(b.T_parametric) + " K (target 0.44-0.50)"};
}

// --- criterion 3: bifurcation threshold ------------------------------------

// Drive at the lower fold boundary for a fixed frequency (local minimum of
// the response cubic at its larger stationary point); infinity without folds.
double fold_lower_drive(const duffing::ResonatorParams& p, double omega) {
    const double c = p.m_eff * (p.omega0 * p.omega0 - omega * omega);
    const double d = p.gamma() * omega;
    const double b = 0.75 * p.alpha;
    const double disc = 16.0 * b * b * c * c - 12.0 * b * b * (c * c + d * d);
    if (disc <= 0.0) return std::numeric_limits<double>::infinity();
    const double Y = (-4.0 * b * c + std::sqrt(disc)) / (6.0 * b * b);
    if (Y <= 0.0) return std::numeric_limits<double>::infinity();
    const double g = Y * (b * b * Y * Y + 2.0 * b * c * Y + c * c + d * d);
    return g > 0.0 ? std::sqrt(g) : std::numeric_limits<double>::infinity();
}

// Same construction at the other stationary point: the upper fold boundary.
double fold_upper_drive(const duffing::ResonatorParams& p, double omega) {
    const double c = p.m_eff * (p.omega0 * p.omega0 - omega * omega);
    const double d = p.gamma() * omega;
    const double b = 0.75 * p.alpha;
    const double disc = 16.0 * b * b * c * c - 12.0 * b * b * (c * c + d * d);
    if (disc <= 0.0) return std::numeric_limits<double>::infinity();
    const double Y = (-4.0 * b * c - std::sqrt(disc)) / (6.0 * b * b);
    if (Y <= 0.0) return std::numeric_limits<double>::infinity();
    const double g = Y * (b * b * Y * Y + 2.0 * b * c * Y + c * c + d * d);
    return g > 0.0 ? std::sqrt(g) : std::numeric_limits<double>::infinity();
}

// Cusp frequency from the fold-boundary minimum, coarse scan plus golden
// section; independent of the closed form under test.
double fold_min_omega(const duffing::ResonatorParams& p) {
    const double side = p.alpha > 0.0 ? 1.0 : -1.0;
    const double span = std::min(6.0 * std::sqrt(3.0) / (2.0 * p.Q), 0.45);
    double best_u = 0.0, best_f = std::numeric_limits<double>::infinity();
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double u = span * i / n;
        const double f = fold_lower_drive(p, p.omega0 * (1.0 + side * u));
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    if (!std::isfinite(best_f)) throw std::runtime_error("fold scan found no folds");
    double lo = std::max(0.0, best_u - span / n);
    double hi = best_u + span / n;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double x1 = hi - gr * (hi - lo);
        const double x2 = lo + gr * (hi - lo);
        const double f1 = fold_lower_drive(p, p.omega0 * (1.0 + side * x1));
        const double f2 = fold_lower_drive(p, p.omega0 * (1.0 + side * x2));
        (f1 < f2 ? hi : lo) = f1 < f2 ? x2 : x1;
    }
    return p.omega0 * (1.0 + side * 0.5 * (lo + hi));
}

// Root counting judges bistability. Near threshold the window detaches from
// the cusp (its edges move linearly in F - F_c while its width shrinks
// faster), so locate the lower-fold crossing u1 for this drive and probe a
// spread of fractions of the cusp-to-crossing distance: the window always
// covers a fixed band of that fraction range.
bool bistable_at(const duffing::ResonatorParams& p, double F, double w_cusp) {
    if (duffing::steady_amplitudes(p, F, w_cusp).size() == 3) return true;
    const double side = p.alpha > 0.0 ? 1.0 : -1.0;
    const double u_c = side * (w_cusp / p.omega0 - 1.0);
    const double span = std::min(6.0 * std::sqrt(3.0) / (2.0 * p.Q), 0.45);
    const auto at = [&](double u) { return p.omega0 * (1.0 + side * u); };
    double u1 = span;
    if (fold_lower_drive(p, at(span)) > F) {
        double a = u_c, b = span;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (a + b);
            (fold_lower_drive(p, at(mid)) > F ? b : a) = mid;
        }
        u1 = 0.5 * (a + b);
    }
    // near-edge crossing from the upper fold boundary; the two fold curves
    // leave the cusp with a shared tangent, so the midpoint of the two
    // crossings stays inside the window arbitrarily close to threshold
    double u2 = u_c;
    {
        double a = u_c, b = u1;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (a + b);
            (fold_upper_drive(p, at(mid)) > F ? b : a) = mid;
        }
        u2 = 0.5 * (a + b);
    }
    if (duffing::steady_amplitudes(p, F, at(0.5 * (u1 + u2))).size() == 3) return true;
    for (const double t : {0.3, 0.5, 0.7, 0.8, 0.85, 0.9, 0.95, 0.98}) {
        const double u = u_c + t * (u1 - u_c);
        if (duffing::steady_amplitudes(p, F, at(u)).size() == 3) return true;
    }
    for (int i = 1; i <= 100; ++i) {
        if (duffing::steady_amplitudes(p, F, at(span * i / 100.0)).size() == 3) return true;
    }
    return false;
}

std::pair<bool, std::string> c3_threshold() {
    CounterRng rng(7031, 0);
    double worst = 0.0;
    const int n_sets = 1000;
    std::vector<double> rel(n_sets, -1.0);
    {
        const int nw = hardware_workers();
        auto work = [&](int first) {
            CounterRng local(7031, 100 + static_cast<std::uint64_t>(first));
            for (int i = first; i < n_sets; i += nw) {
                CounterRng draw(7031, 1000 + static_cast<std::uint64_t>(i));
                const double omega0 = 2.0 * pi * std::pow(10.0, 3.0 + 4.0 * draw.uniform());
                const double Q = std::pow(10.0, 1.0 + 3.0 * draw.uniform());
                const double m_eff = std::pow(10.0, -15.0 + 9.0 * draw.uniform());
                const double sign = draw.uniform() < 0.5 ? -1.0 : 1.0;
                const double alpha = sign * std::pow(10.0, 8.0 + 12.0 * draw.uniform());
                const auto p =
                    duffing::ResonatorParams::make(2.0 * m_eff, m_eff, omega0, Q, alpha);
                const double F_ref = duffing::critical_point(p).F_c;
                const double w_cusp = fold_min_omega(p);
                if (bistable_at(p, 0.5 * F_ref, w_cusp) ||
                    !bistable_at(p, 2.0 * F_ref, w_cusp)) {
                    rel[static_cast<std::size_t>(i)] = 1.0; // bracket failure
                    continue;
                }
                double lo = 0.5 * F_ref, hi = 2.0 * F_ref;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (bistable_at(p, mid, w_cusp) ? hi : lo) = mid;
                }
                rel[static_cast<std::size_t>(i)] =
                    std::fabs(0.5 * (lo + hi) / F_ref - 1.0);
            }
        };
        std::vector<std::future<void>> futs;
        for (int w = 1; w < nw; ++w) futs.push_back(std::async(std::launch::async, work, w));
        work(0);
        for (auto& f : futs) f.get();
    }
    for (double r : rel) worst = std::max(worst, r);

    const auto p = paper_device();
    const double F_c = duffing::critical_point(p).F_c;
    const bool ok_paper = F_c < 4e-12;

    auto p4 = p;
    p4.alpha *= 4.0;
    const double ratio = duffing::critical_point(p4).F_c / F_c;
    const bool ok_scale = std::fabs(ratio - 0.5) < 1e-12;

    return {worst < 1e-6 && ok_paper && ok_scale,
            "max |closed-form/bisection - 1| = " + fmt(worst) + " over 1000 draws, F_c=" +
                fmt(F_c) + " N < 4e-12, F_c(4a)/F_c(a)=" + fmt(ratio)};
}

// --- criterion 4: hysteresis direction -------------------------------------

struct HystProbe {
    bool one_interval = false;
    bool below = false; // all jumps below omega0
    bool above = false;
};

HystProbe probe_hysteresis(double alpha) {
    const auto p = duffing::ResonatorParams::make(2e-6, 1e-6, 2.0 * pi * 1000.0, 50.0, alpha);
    // at 2 F_c both windows sit well inside the +-20% sweep; much higher and
    // the softening window's low-frequency fold runs away down the backbone
    const double F = 2.0 * duffing::critical_point(p).F_c;
    const double lo = p.omega0 * (1.0 - 20.0 / (2.0 * p.Q));
    const double hi = p.omega0 * (1.0 + 20.0 / (2.0 * p.Q));
    const int n = 2001;
    const auto up = duffing::hysteresis_sweep(p, F, lo, hi, duffing::SweepDirection::up, n);
    const auto down = duffing::hysteresis_sweep(p, F, lo, hi, duffing::SweepDirection::down, n);

    std::vector<int> differ;
    for (int i = 0; i < n; ++i) {
        const double a_up = up.amplitude[static_cast<std::size_t>(i)];
        const double a_dn = down.amplitude[static_cast<std::size_t>(n - 1 - i)];
        const double scale = std::max(a_up, a_dn);
        if (std::fabs(a_up - a_dn) > 1e-6 * scale) differ.push_back(i);
    }
    HystProbe r;
    r.one_interval = !differ.empty() && differ.back() - differ.front() ==
                                            static_cast<int>(differ.size()) - 1;
    r.below = r.above = !up.jumps.empty() && !down.jumps.empty();
    for (const auto* br : {&up, &down})
        for (const auto& j : br->jumps) {
            r.below = r.below && j.control < p.omega0;
            r.above = r.above && j.control > p.omega0;
        }
    return r;
}

std::pair<bool, std::string> c4_hysteresis() {
    const auto soft = probe_hysteresis(-1e12);
    const auto stiff = probe_hysteresis(+1e12);
    const bool ok = soft.one_interval && stiff.one_interval && soft.below && stiff.above;
    return {ok, std::string("one differing interval: soft=") +
                    (soft.one_interval ? "yes" : "no") + " stiff=" +
                    (stiff.one_interval ? "yes" : "no") + "; jumps below f0 for alpha<0: " +
                    (soft.below ? "yes" : "no") + ", above f0 for alpha>0: " +
                    (stiff.above ? "yes" : "no")};
}

// --- criterion 5: tuning round trip ----------------------------------------

double round_trip_error(int n_grid) {
    const auto model = potential::gold_contact_model();
    tuning::BeamAnchor anchor{30.0, 1.0, 1.25e-9};
    std::vector<double> F_grid;
    // span far enough toward the instability that discretization error
    // dominates the formula's small constant-k bias, so refinement halves it
    for (int i = 0; i < n_grid; ++i)
        F_grid.push_back(5e-9 * static_cast<double>(i) / (n_grid - 1));
    const auto curve = tuning::tune_curve(model, anchor, F_grid, -1);

    std::vector<std::pair<double, double>> samples;
    for (const auto& pt : curve.points) samples.emplace_back(pt.F, pt.dk);
    const auto est = tuning::estimate_alpha_from_dk(samples, anchor.k0, anchor.xi);

    double scale = 0.0;
    for (const auto& pt : curve.points) scale = std::max(scale, std::fabs(pt.alpha));
    double worst = 0.0;
    for (std::size_t i = 3; i + 3 < est.size(); ++i) {
        const double truth = curve.points[i].alpha;
        if (std::fabs(truth) < 0.02 * scale) continue; // near a sign change of alpha
        worst = std::max(worst, std::fabs(est[i].alpha / truth - 1.0));
    }
    return worst;
}

std::pair<bool, std::string> c5_round_trip() {
    const double e40 = round_trip_error(40);
    const double e80 = round_trip_error(80);
    const auto model = potential::gold_contact_model();
    const double xs = potential::max_attraction_point(model);
    const double dk = -potential::eval(model, xs, 2);
    const double alpha = -potential::eval(model, xs, 4) / 6.0;
    const bool ok_anchor = std::fabs(dk) < 1e-6 * 30.0 &&
                           std::fabs(std::fabs(alpha) / 2e22 - 1.0) < 1e-6;
    const bool ok = e40 < 0.05 && e80 < 0.6 * e40 && ok_anchor;
    return {ok, "interior error " + fmt(e40) + " (n=40) -> " + fmt(e80) +
                    " (n=80); anchor dk=" + fmt(dk) + " N/m, |alpha|=" + fmt(std::fabs(alpha)) +
                    " N/m^3"};
}

// --- criterion 6: statistical mechanics ------------------------------------

std::pair<bool, std::string> c6_equipartition() {
    const auto p = duffing::ResonatorParams::make(2e-6, 1e-6, 2.0 * pi * 100.0, 100.0, 0.0);
    const double T = 300.0;
    // 500 steps per period: at 100 steps the integrator's frequency warp
    // shifts the resonance by ~5e-4 and tilts the per-bin Lorentzian ratio
    const double dt = 2e-5, duration = 120.0, skip_t = 5.0;
    const int members = 64;
    const std::size_t seg = 1 << 18;

    std::vector<double> var(members, 0.0);
    std::vector<std::vector<double>> psd(members);
    analysis::SpectrumResult grid;
    {
        const int nw = hardware_workers();
        auto work = [&](int first) {
            for (int m = first; m < members; m += nw) {
                auto n = sde::thermal_noise_for(p, T);
                n.seed = 6001;
                n.stream = static_cast<std::uint64_t>(m);
                sde::DriveSpec d{0.0, p.omega0, 0.0, 0.0, 0.0};
                const auto traj = sde::simulate_full(p, d, n, dt, duration);
                const auto skip = static_cast<std::size_t>(skip_t / dt);
                std::vector<double> x(traj.ch1.begin() + static_cast<std::ptrdiff_t>(skip),
                                      traj.ch1.end());
                double v = 0.0;
                for (double xi : x) v += xi * xi;
                var[static_cast<std::size_t>(m)] = v / static_cast<double>(x.size());
                auto s = analysis::welch_psd(x, dt, seg, 0.5, analysis::Window::hann);
                if (m == 0) {
                    grid.f_grid = s.f_grid;
                    grid.resolution = s.resolution;
                }
                psd[static_cast<std::size_t>(m)] = std::move(s.psd);
            }
        };
        std::vector<std::future<void>> futs;
        for (int w = 1; w < nw; ++w) futs.push_back(std::async(std::launch::async, work, w));
        work(0);
        for (auto& f : futs) f.get();
    }

    double x2 = 0.0;
    for (double v : var) x2 += v / members;
    const double target = k_boltzmann * T / p.k;
    const double var_err = std::fabs(x2 / target - 1.0);

    std::vector<double> mean_psd(grid.f_grid.size(), 0.0);
    for (const auto& s : psd)
        for (std::size_t i = 0; i < s.size(); ++i) mean_psd[i] += s[i] / members;

    const double S_F = sde::thermal_noise_for(p, T).S_F;
    const double f0 = p.omega0 / (2.0 * pi);
    double psd_err = 0.0;
    int n_bins = 0;
    for (std::size_t i = 0; i < grid.f_grid.size(); ++i) {
        const double f = grid.f_grid[i];
        if (std::fabs(f - f0) > 3.0) continue;
        const double w = 2.0 * pi * f;
        const double denom = std::pow(p.k - p.m_eff * w * w, 2) +
                             std::pow(p.gamma() * w, 2);
        const double analytic = S_F / denom;
        psd_err = std::max(psd_err, std::fabs(mean_psd[i] / analytic - 1.0));
        ++n_bins;
    }
    const bool ok = var_err < 0.03 && psd_err < 0.10 && n_bins > 10;
    return {ok, "<x^2> off by " + fmt(100.0 * var_err) + "% (target <3%), worst Lorentzian bin off by " +
                    fmt(100.0 * psd_err) + "% over " + std::to_string(n_bins) +
                    " bins (target <10%)"};
}

// --- criterion 7: stochastic resonance end-to-end --------------------------

std::pair<bool, std::string> c7_stochastic_resonance() {
    const auto p = desk_device();
    // just above threshold the envelope dynamics reduces to overdamped motion
    // in a shallow double well, where the adiabatic two-state relation behind
    // the inversion is quantitative; far above threshold the rotating-frame
    // flow is strongly non-gradient and the formula overestimates the response
    const double F = 1.1 * duffing::critical_point(p).F_c;
    const double w_op = near_threshold_omega(p, F);
    const double S_F = 2e-16;
    const double dt = 2e-4, duration = 240.0, discard = 2.0;
    // pin the modulation to an exact Welch bin
    const auto n_amp = static_cast<std::size_t>((duration - discard) / dt);
    std::size_t seg = 64;
    while (seg * 16 <= n_amp && seg < (1u << 20)) seg *= 2;
    const double resolution = 1.0 / (static_cast<double>(seg) * dt);
    const double Omega = 2.0 * pi * 4.0 * resolution;

    const auto dir = fs::temp_directory_path() / "bsim_acceptance_sr";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const json sc = {
        {"command", "stochastic-resonance"},
        {"output_dir", (dir / "out").string()},
        {"seed", 4242},
        {"workers", hardware_workers()},
        {"resonator",
         {{"m", p.m}, {"m_eff", p.m_eff}, {"omega0", p.omega0}, {"Q", p.Q},
          {"alpha", p.alpha}}},
        {"drive", {{"F_drive", F}, {"omega", w_op}, {"dF", 0.01 * F}, {"Omega", Omega}}},
        {"noise", {{"S_F", S_F}}},
        {"integrator", "envelope"},
        {"dt", dt},
        {"duration", duration},
        {"discard", discard},
        {"ensemble", 8}};
    const auto file = dir / "scenario.json";
    std::ofstream(file) << sc.dump(2);
    scenario::run_file(file);

    json manifest;
    std::ifstream(dir / "out" / "manifest.json") >> manifest;
    const auto& res = manifest["results"];
    const int n_switches = res["n_switches"].get<int>();
    const double snr_peak = res.value("snr_peak_over_background", 0.0);
    const double snr_ratio = res.value("snr_mod_over_noise", 0.0);
    const double S_rec = res.value("S_total_inferred", 0.0);

    // the unmodulated spectrum must not carry a peak at Omega
    double snr_noise = 0.0;
    {
        std::ifstream in(dir / "out" / "spectrum_noise.csv");
        std::string line;
        std::getline(in, line);
        analysis::SpectrumResult spec;
        while (std::getline(in, line)) {
            const auto c = line.find(',');
            spec.f_grid.push_back(std::stod(line.substr(0, c)));
            spec.psd.push_back(std::stod(line.substr(c + 1)));
        }
        spec.resolution = spec.f_grid[1] - spec.f_grid[0];
        snr_noise = analysis::snr_at(spec, Omega);
    }

    // the tolerance band is on the amplitude spectral density sqrt(S)
    const double rec_err =
        S_rec > 0.0 ? std::fabs(std::sqrt(S_rec / S_F) - 1.0) : 1.0;
    const bool ok = n_switches >= 300 && snr_peak > 3.0 && snr_ratio > 2.0 &&
                    snr_noise < 2.0 && rec_err < 0.30;
    return {ok, std::to_string(n_switches) + " switches (>=300), SNR at Omega: modulated " +
                    fmt(snr_peak) + " / unmodulated " + fmt(snr_noise) +
                    ", recovered sqrt(S_F) off by " + fmt(100.0 * rec_err) + "% (target <30%)"};
}

// --- criterion 8: histogram sensitivity ------------------------------------

// pooled high-state occupancy and dwell count over an ensemble
struct Occupancy {
    double p_high = 0.0;
    double n_dwells = 0.0;
};

Occupancy occupancy_at(const duffing::ResonatorParams& p, double F, double omega, double S_F,
                       double thr_lo, double thr_hi, std::uint64_t stream_base, int members,
                       double duration) {
    const double dt = 2e-4, discard = 2.0;
    std::vector<double> high(members, 0.0), total(members, 0.0), dwells(members, 0.0);
    const int nw = hardware_workers();
    auto work = [&](int first) {
        for (int m = first; m < members; m += nw) {
            sde::DriveSpec d{F, omega, 0.0, 0.0, 0.0};
            sde::NoiseSpec n{S_F, 8400, stream_base + static_cast<std::uint64_t>(m)};
            const auto traj = sde::simulate_envelope(p, d, n, dt, duration);
            const auto skip = static_cast<std::size_t>(discard / dt);
            std::vector<double> a;
            for (std::size_t i = skip; i < traj.size(); ++i) a.push_back(traj.amplitude(i));
            const auto tel = analysis::two_state(a, dt, thr_lo, thr_hi);
            double h = 0.0;
            for (auto s : tel.states) h += s;
            high[static_cast<std::size_t>(m)] = h;
            total[static_cast<std::size_t>(m)] = static_cast<double>(tel.states.size());
            dwells[static_cast<std::size_t>(m)] = tel.n_switches + 1.0;
        }
    };
    std::vector<std::future<void>> futs;
    for (int w = 1; w < nw; ++w) futs.push_back(std::async(std::launch::async, work, w));
    work(0);
    for (auto& f : futs) f.get();
    Occupancy out;
    double h = 0.0, t = 0.0;
    for (int m = 0; m < members; ++m) {
        h += high[static_cast<std::size_t>(m)];
        t += total[static_cast<std::size_t>(m)];
        out.n_dwells += dwells[static_cast<std::size_t>(m)];
    }
    out.p_high = h / t;
    return out;
}

std::pair<bool, std::string> c8_histogram_sensitivity() {
    const auto p = desk_device();
    // "near the bifurcation": the shallow double well makes the occupancy
    // sensitivity to the drive diverge toward the cusp, so a 5e-4 step is
    // resolvable with minutes of ensemble data
    const double F0 = 1.03 * duffing::critical_point(p).F_c;
    const double omega = near_threshold_omega(p, F0);
    const double S_F = 3e-17;

    // deterministic plateau amplitudes fix the telegraph thresholds
    const auto roots = duffing::steady_amplitudes(p, F0, omega);
    const double a_lo = roots.front().amplitude, a_hi = roots.back().amplitude;
    const double thr_lo = a_lo + 0.4 * (a_hi - a_lo);
    const double thr_hi = a_lo + 0.6 * (a_hi - a_lo);

    // balance the occupancy in F before applying the small step
    double lo = 0.97 * F0, hi = 1.03 * F0, F_star = F0;
    for (int it = 0; it < 8; ++it) {
        F_star = 0.5 * (lo + hi);
        const auto occ = occupancy_at(p, F_star, omega, S_F, thr_lo, thr_hi, 0, 4, 30.0);
        (occ.p_high < 0.5 ? lo : hi) = F_star;
    }

    const auto o1 = occupancy_at(p, F_star, omega, S_F, thr_lo, thr_hi, 1000, 16, 240.0);
    const auto o2 =
        occupancy_at(p, F_star * (1.0 + 5e-4), omega, S_F, thr_lo, thr_hi, 2000, 16, 240.0);

    // two-proportion z-test with dwell periods as the independent samples
    const double n1 = o1.n_dwells, n2 = o2.n_dwells;
    const double pbar = (o1.p_high * n1 + o2.p_high * n2) / (n1 + n2);
    const double se = std::sqrt(pbar * (1.0 - pbar) * (1.0 / n1 + 1.0 / n2));
    const double z = (o2.p_high - o1.p_high) / se;
    // p < 0.01 two-sided at |z| > 2.576
    const bool ok = std::fabs(z) > 2.576 && o2.p_high > o1.p_high;
    return {ok, "occupancy " + fmt(o1.p_high) + " -> " + fmt(o2.p_high) + " for a 5e-4 drive step, z=" +
                    fmt(z) + " over " + fmt(n1) + "+" + fmt(n2) + " dwells (need z>2.576)"};
}

// --- criterion 9: determinism ----------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::pair<bool, std::string> c9_determinism() {
    const auto p = desk_device();
    const double F = 2.0 * duffing::critical_point(p).F_c;
    const double w_mid = mid_window(p, F);
    const auto dir = fs::temp_directory_path() / "bsim_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const json sc = {{"command", "stochastic-resonance"},
                     {"output_dir", (dir / "a").string()},
                     {"seed", 77},
                     {"workers", hardware_workers()},
                     {"resonator",
                      {{"m", p.m}, {"m_eff", p.m_eff}, {"omega0", p.omega0}, {"Q", p.Q},
                       {"alpha", p.alpha}}},
                     {"drive", {{"F_drive", F}, {"omega", w_mid}}},
                     {"noise", {{"S_F", 2e-15}}},
                     {"integrator", "envelope"},
                     {"dt", 2e-4},
                     {"duration", 30.0},
                     {"ensemble", 4}};
    const auto file = dir / "scenario.json";
    std::ofstream(file) << sc.dump(2);
    scenario::run_file(file);
    scenario::run_file(file, {.output_dir = dir / "b"});

    int n_csv = 0;
    bool identical = true;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        if (entry.path().extension() != ".csv") continue;
        ++n_csv;
        if (slurp(entry.path()) != slurp(dir / "b" / entry.path().filename()))
            identical = false;
    }
    return {identical && n_csv >= 3,
            std::to_string(n_csv) + " CSV outputs byte-compared across a same-seed rerun"};
}

} // namespace

int main() {
    run(1, "thermal noise formulas at the measured device", c1_noise_formulas);
    run(2, "noise budget arithmetic", c2_budget);
    run(3, "bifurcation threshold closed form vs bisection", c3_threshold);
    run(4, "hysteresis direction and single bistable interval", c4_hysteresis);
    run(5, "tuning round trip and model anchor", c5_round_trip);
    run(6, "thermal equipartition and Lorentzian response", c6_equipartition);
    run(7, "stochastic resonance end to end", c7_stochastic_resonance);
    run(8, "histogram sensitivity to a 5e-4 drive step", c8_histogram_sensitivity);
    run(9, "byte-identical rerun of a stochastic scenario", c9_determinism);
    std::printf("%d/9 criteria passed\n", 9 - n_failed);
    return n_failed == 0 ? 0 : 1;
}
