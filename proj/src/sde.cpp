#include "bsim/sde.hpp"

#include <cmath>

#include <json.hpp>

#include "bsim/constants.hpp"
#include "bsim/rng.hpp"

namespace bsim::sde {

using duffing::ResonatorParams;

double DriveSpec::amplitude_at(double t) const {
    return F_drive + dF * std::cos(Omega * t);
}

void DriveSpec::validate(const ResonatorParams& p) const {
    if (!(F_drive >= 0.0)) throw std::invalid_argument("DriveSpec: F_drive must be >= 0");
    if (!(dF >= 0.0)) throw std::invalid_argument("DriveSpec: dF must be >= 0");
    if (!(Omega >= 0.0)) throw std::invalid_argument("DriveSpec: Omega must be >= 0");
    if (dF > 0.0 && Omega >= p.omega0 / p.Q)
        throw std::invalid_argument(
            "DriveSpec: modulation must be slow, Omega < omega0/Q (decay rate)");
}

void NoiseSpec::validate() const {
    if (!(S_F >= 0.0)) throw std::invalid_argument("NoiseSpec: S_F must be >= 0");
}

double TrajectorySeries::amplitude(std::size_t i) const {
    if (kind == TrajectoryKind::envelope) return std::hypot(ch1[i], ch2[i]);
    return std::fabs(ch1[i]);
}

namespace {

std::string make_metadata(const char* scheme, const ResonatorParams& p, const DriveSpec& d,
                          const NoiseSpec& n, double dt, double duration, int stride) {
    nlohmann::json j;
    j["scheme"] = scheme;
    j["rng"] = "counter-splitmix64";
    j["gaussian"] = CounterRng::gaussian_method();
    j["psd_convention"] = "one-sided";
    j["resonator"] = {{"m", p.m},   {"m_eff", p.m_eff}, {"omega0", p.omega0}, {"Q", p.Q},
                      {"k", p.k},   {"alpha", p.alpha}, {"xi", p.xi}};
    j["drive"] = {{"F_drive", d.F_drive}, {"omega", d.omega},   {"dF", d.dF},
                  {"Omega", d.Omega},     {"phase0", d.phase0}};
    j["noise"] = {{"S_F", n.S_F}, {"seed", n.seed}, {"stream", n.stream}};
    j["dt"] = dt;
    j["duration"] = duration;
    j["sample_stride"] = stride;
    return j.dump();
}

} // namespace

TrajectorySeries simulate_full(const ResonatorParams& p, const DriveSpec& d, const NoiseSpec& n,
                               double dt, double duration, int sample_stride) {
    p.validate();
    d.validate(p);
    n.validate();
    if (!(dt > 0.0) || dt > 2.0 * pi / (50.0 * d.omega))
        throw std::invalid_argument("simulate_full: dt too coarse (need dt <= T_drive/50)");
    if (duration < 100.0 * dt)
        throw std::invalid_argument("simulate_full: duration must be >= 100 dt");
    if (sample_stride < 1) throw std::invalid_argument("simulate_full: sample_stride >= 1");

    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    CounterRng rng(n.seed, n.stream);
    const double noise_std = std::sqrt(n.S_F * dt / 2.0) / p.m_eff; // velocity impulse
    const double inv_m = 1.0 / p.m_eff;
    const double g = p.gamma();

    const auto accel = [&](double x, double v, double t) {
        const double drive = d.amplitude_at(t) * std::cos(d.omega * t + d.phase0);
        return (drive - g * v - p.k * x - p.alpha * x * x * x) * inv_m;
    };

    TrajectorySeries out;
    out.kind = TrajectoryKind::full;
    out.dt = dt * sample_stride;
    out.ch1.reserve(steps / sample_stride + 1);
    out.metadata = make_metadata("stochastic-heun-full", p, d, n, dt, duration, sample_stride);

    double x = 0.0, v = 0.0;
    out.ch1.push_back(x);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = dt * static_cast<double>(i);
        const double dw = noise_std == 0.0 ? 0.0 : noise_std * rng.gaussian();
        const double k1x = v;
        const double k1v = accel(x, v, t);
        const double xp = x + k1x * dt;
        const double vp = v + k1v * dt + dw;
        const double k2x = vp;
        const double k2v = accel(xp, vp, t + dt);
        x += 0.5 * (k1x + k2x) * dt;
        v += 0.5 * (k1v + k2v) * dt + dw;
        if (!std::isfinite(x) || !std::isfinite(v))
            throw DivergenceError("simulate_full: state diverged", t);
        if ((i + 1) % static_cast<std::size_t>(sample_stride) == 0) out.ch1.push_back(x);
    }
    return out;
}

TrajectorySeries simulate_envelope(const ResonatorParams& p, const DriveSpec& d,
                                   const NoiseSpec& n, double dt, double duration,
                                   int sample_stride) {
    p.validate();
    d.validate(p);
    n.validate();
    if (std::fabs(d.omega - p.omega0) > 0.5 * p.omega0)
        throw std::domain_error("simulate_envelope: detuning outside rotating-frame validity");
    if (!(dt > 0.0) || dt > 0.1 * p.Q / p.omega0)
        throw std::invalid_argument("simulate_envelope: dt too coarse (need dt <= 0.1 Q/omega0)");
    if (duration < 100.0 * dt)
        throw std::invalid_argument("simulate_envelope: duration must be >= 100 dt");
    if (sample_stride < 1) throw std::invalid_argument("simulate_envelope: sample_stride >= 1");

    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    CounterRng rng(n.seed, n.stream);

    const double w = d.omega;
    const double gamma_env = p.omega0 / (2.0 * p.Q);
    // exact RWA factorization: m (omega0^2 - omega^2) = -2 m w * detune
    const double detune = (w * w - p.omega0 * p.omega0) / (2.0 * w);
    const double lam = 3.0 * p.alpha / (8.0 * p.m_eff * w);
    const double force_scale = 1.0 / (2.0 * p.m_eff * w);
    const double noise_std = std::sqrt(n.S_F * dt) / (2.0 * p.m_eff * w); // per quadrature

    const auto drift = [&](double u, double v, double t, double& du, double& dv) {
        const double rot = detune - lam * (u * u + v * v);
        du = -gamma_env * u + rot * v;
        dv = -gamma_env * v - rot * u - d.amplitude_at(t) * force_scale;
    };

    TrajectorySeries out;
    out.kind = TrajectoryKind::envelope;
    out.dt = dt * sample_stride;
    out.ch1.reserve(steps / sample_stride + 1);
    out.ch2.reserve(steps / sample_stride + 1);
    out.metadata = make_metadata("stochastic-heun-envelope", p, d, n, dt, duration, sample_stride);

    double u = 0.0, v = 0.0;
    out.ch1.push_back(u);
    out.ch2.push_back(v);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = dt * static_cast<double>(i);
        double dwu = 0.0, dwv = 0.0;
        if (noise_std != 0.0) {
            dwu = noise_std * rng.gaussian();
            dwv = noise_std * rng.gaussian();
        }
        double k1u, k1v, k2u, k2v;
        drift(u, v, t, k1u, k1v);
        drift(u + k1u * dt + dwu, v + k1v * dt + dwv, t + dt, k2u, k2v);
        u += 0.5 * (k1u + k2u) * dt + dwu;
        v += 0.5 * (k1v + k2v) * dt + dwv;
        if (!std::isfinite(u) || !std::isfinite(v))
            throw DivergenceError("simulate_envelope: state diverged", t);
        if ((i + 1) % static_cast<std::size_t>(sample_stride) == 0) {
            out.ch1.push_back(u);
            out.ch2.push_back(v);
        }
    }
    return out;
}

NoiseSpec thermal_noise_for(const ResonatorParams& p, double T) {
    p.validate();
    if (!(T >= 0.0)) throw std::invalid_argument("thermal_noise_for: T must be >= 0");
    NoiseSpec n;
    n.S_F = 4.0 * p.m_eff * p.omega0 * k_boltzmann * T / p.Q;
    return n;
}

} // namespace bsim::sde
