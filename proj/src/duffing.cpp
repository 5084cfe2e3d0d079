#include "bsim/duffing.hpp"

#include <algorithm>
#include <cmath>

#include "bsim/constants.hpp"

namespace bsim::duffing {

void ResonatorParams::validate() const {
    if (!(m_eff > 0.0) || !(m_eff <= m))
        throw std::invalid_argument("ResonatorParams: need 0 < m_eff <= m");
    if (!(omega0 > 0.0)) throw std::invalid_argument("ResonatorParams: omega0 must be > 0");
    if (!(Q > 1.0)) throw std::invalid_argument("ResonatorParams: Q must be > 1");
    if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("ResonatorParams: xi in (0,1]");
    if (!std::isfinite(alpha)) throw std::invalid_argument("ResonatorParams: alpha must be finite");
    if (std::fabs(k - m_eff * omega0 * omega0) > 1e-9 * k)
        throw std::invalid_argument("ResonatorParams: k inconsistent with m_eff * omega0^2");
}

ResonatorParams ResonatorParams::make(double m, double m_eff, double omega0, double Q,
                                      double alpha, double xi) {
    ResonatorParams p;
    p.m = m;
    p.m_eff = m_eff;
    p.omega0 = omega0;
    p.Q = Q;
    p.k = m_eff * omega0 * omega0;
    p.alpha = alpha;
    p.xi = xi;
    p.validate();
    return p;
}

namespace {

// Real roots of monic y^3 + p y^2 + q y + r, ascending. Closed form plus a
// Newton polish on each root.
int cubic_real_roots(double p, double q, double r, double out[3]) {
    const double ofs = p / 3.0;
    const double qq = q - p * p / 3.0;
    const double rr = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    const double disc = qq * qq * qq / 27.0 + rr * rr / 4.0;

    int n = 0;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-rr / 2.0 + s);
        const double v = std::cbrt(-rr / 2.0 - s);
        out[n++] = u + v - ofs;
    } else if (qq == 0.0 && rr == 0.0) {
        out[n++] = -ofs;
    } else {
        const double mq = -qq / 3.0;
        const double theta = std::acos(std::clamp(
            -rr / 2.0 / std::sqrt(mq * mq * mq), -1.0, 1.0));
        const double rad = 2.0 * std::sqrt(mq);
        for (int k = 0; k < 3; ++k)
            out[n++] = rad * std::cos((theta - 2.0 * pi * k) / 3.0) - ofs;
    }
    std::sort(out, out + n);

    for (int i = 0; i < n; ++i) {
        double y = out[i];
        for (int it = 0; it < 8; ++it) {
            const double f = ((y + p) * y + q) * y + r;
            const double df = (3.0 * y + 2.0 * p) * y + q;
            if (df == 0.0) break;
            const double step = f / df;
            y -= step;
            if (std::fabs(step) <= 1e-15 * std::fabs(y)) break;
        }
        out[i] = y;
    }
    return n;
}

} // namespace

std::vector<AmplitudeRoot> steady_amplitudes(const ResonatorParams& p, double F, double omega) {
    p.validate();
    if (!(F >= 0.0)) throw std::invalid_argument("steady_amplitudes: F must be >= 0");
    if (omega < 0.5 * p.omega0 || omega > 1.5 * p.omega0)
        throw std::domain_error("steady_amplitudes: omega outside rotating-wave validity band");

    const double c = p.m_eff * (p.omega0 * p.omega0 - omega * omega);
    const double d = p.gamma() * omega;
    const double b = 0.75 * p.alpha;

    std::vector<AmplitudeRoot> roots;
    if (b == 0.0 || F == 0.0) {
        const double y = F * F / (c * c + d * d);
        roots.push_back({std::sqrt(y), true, false});
        return roots;
    }

    // b^2 Y^3 + 2 b c Y^2 + (c^2+d^2) Y - F^2 = 0, Y = a^2, in monic form
    const double mp = 2.0 * c / b;
    const double mq = (c * c + d * d) / (b * b);
    const double mr = -F * F / (b * b);
    double y[3];
    const int n = cubic_real_roots(mp, mq, mr, y);

    std::vector<double> pos;
    for (int i = 0; i < n; ++i)
        if (y[i] > 0.0) pos.push_back(y[i]);
    std::sort(pos.begin(), pos.end());

    if (pos.size() == 2) {
        // numerically coincident fold pair: report the double root twice
        roots.push_back({std::sqrt(pos[0]), true, true});
        roots.push_back({std::sqrt(pos[1]), false, true});
        roots.push_back({std::sqrt(pos[1]), true, true});
        return roots;
    }
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const bool degenerate =
            pos.size() == 3 && ((i > 0 && pos[i] - pos[i - 1] < 1e-9 * pos[i]) ||
                                (i + 1 < pos.size() && pos[i + 1] - pos[i] < 1e-9 * pos[i + 1]));
        roots.push_back({std::sqrt(pos[i]), pos.size() == 1 || i != 1, degenerate});
    }
    return roots;
}

CriticalPoint critical_point(const ResonatorParams& p) {
    p.validate();
    if (p.alpha == 0.0)
        throw std::invalid_argument("critical_point: alpha = 0 has no bifurcation");

    const double abs_a = std::fabs(p.alpha);
    const double side = p.alpha > 0.0 ? 1.0 : -1.0;
    CriticalPoint cp;
    // exact cusp of the response cubic: the fold pair merges where
    // m_eff (omega0^2 - omega^2) = -sign(alpha) sqrt(3) gamma omega, giving
    // F_c^2 = (32 sqrt(3)/27) (gamma omega_c)^3 / |alpha| and
    // x_c^2 = (8/(3 sqrt(3))) gamma omega_c / |alpha|. To leading order in
    // 1/Q these are the familiar k^(3/2) Q^(-3/2) |alpha|^(-1/2) forms.
    const double g = p.gamma();
    cp.omega_c = (side * std::sqrt(3.0) * g +
                  std::sqrt(3.0 * g * g + 4.0 * p.m_eff * p.m_eff * p.omega0 * p.omega0)) /
                 (2.0 * p.m_eff);
    const double d = g * cp.omega_c;
    cp.F_c = std::sqrt(32.0 * std::sqrt(3.0) / 27.0 * d * d * d / abs_a);
    cp.x_c = std::sqrt(8.0 / (3.0 * std::sqrt(3.0)) * d / abs_a);

    // cheap sanity sweep: just above F_c a triple-root window must open near
    // the cusp detuning, just below it must not. The window width shrinks
    // rapidly toward F_c, so scan a fine grid centered on the cusp.
    const double u_c = side * (cp.omega_c / p.omega0 - 1.0) * 2.0 * p.Q / std::sqrt(3.0);
    const auto has_triple = [&](double F, double lo, double hi, int n) {
        for (int i = 0; i <= n; ++i) {
            const double u = lo + (hi - lo) * i / n;
            const double w = p.omega0 * (1.0 + side * u * std::sqrt(3.0) / (2.0 * p.Q));
            if (w <= 0.51 * p.omega0 || w >= 1.49 * p.omega0) continue;
            if (steady_amplitudes(p, F, w).size() == 3) return true;
        }
        return false;
    };
    if (!has_triple(1.2 * cp.F_c, u_c - 0.5, u_c + 2.5, 1200) ||
        has_triple(0.95 * cp.F_c, u_c - 2.0, u_c + 2.0, 400))
        throw std::logic_error("critical_point: closed form inconsistent with root counting");
    return cp;
}

namespace {

SweepBranch trace_sweep(const ResonatorParams& p, SweepDirection direction,
                        const std::vector<double>& controls,
                        const std::vector<std::vector<AmplitudeRoot>>& root_sets,
                        const std::vector<double>& linear_amp,
                        const std::vector<double>& phase_c,
                        const std::vector<double>& phase_d) {
    SweepBranch out;
    out.direction = direction;
    double prev = -1.0;
    std::size_t prev_count = 0;
    double prev_spread = 0.0;
    for (std::size_t i = 0; i < controls.size(); ++i) {
        const auto& roots = root_sets[i];
        double best = -1.0, best_dist = 0.0;
        for (const auto& r : roots) {
            if (!r.stable) continue;
            const double ref = prev < 0.0 ? linear_amp[i] : prev;
            const double dist = std::fabs(r.amplitude - ref);
            if (best < 0.0 || dist < best_dist) {
                best = r.amplitude;
                best_dist = dist;
            }
        }
        if (prev >= 0.0 && prev_count == 3 && roots.size() == 1 &&
            std::fabs(best - prev) > 0.5 * prev_spread) {
            out.jumps.push_back({controls[i], prev, best});
        }
        out.control.push_back(controls[i]);
        out.amplitude.push_back(best);
        // steady-state phase of x = a cos(w t + phi)
        const double bracket = phase_c[i] + 0.75 * p.alpha * best * best;
        out.phase.push_back(std::atan2(-phase_d[i], bracket));
        prev = best;
        prev_count = roots.size();
        if (roots.size() == 3) prev_spread = roots[2].amplitude - roots[0].amplitude;
    }
    return out;
}

} // namespace

SweepBranch hysteresis_sweep(const ResonatorParams& p, double F, double omega_lo,
                             double omega_hi, SweepDirection direction, int n_points) {
    if (!(F > 0.0)) throw std::invalid_argument("hysteresis_sweep: F must be > 0");
    if (n_points < 16) throw std::invalid_argument("hysteresis_sweep: n_points >= 16");
    if (!(omega_hi > omega_lo)) throw std::invalid_argument("hysteresis_sweep: bad omega range");

    std::vector<double> w(n_points), lin(n_points), pc(n_points), pd(n_points);
    std::vector<std::vector<AmplitudeRoot>> roots(n_points);
    for (int i = 0; i < n_points; ++i) {
        double omega = omega_lo + (omega_hi - omega_lo) * i / (n_points - 1.0);
        if (direction == SweepDirection::down)
            omega = omega_hi - (omega_hi - omega_lo) * i / (n_points - 1.0);
        w[i] = omega;
        roots[i] = steady_amplitudes(p, F, omega);
        const double c = p.m_eff * (p.omega0 * p.omega0 - omega * omega);
        const double d = p.gamma() * omega;
        lin[i] = F / std::sqrt(c * c + d * d);
        pc[i] = c;
        pd[i] = d;
    }
    return trace_sweep(p, direction, w, roots, lin, pc, pd);
}

SweepBranch drive_sweep(const ResonatorParams& p, double omega, double F_lo, double F_hi,
                        SweepDirection direction, int n_points) {
    if (!(F_lo >= 0.0) || !(F_hi > F_lo))
        throw std::invalid_argument("drive_sweep: bad force range");
    if (n_points < 16) throw std::invalid_argument("drive_sweep: n_points >= 16");

    const double c = p.m_eff * (p.omega0 * p.omega0 - omega * omega);
    const double d = p.gamma() * omega;
    std::vector<double> f(n_points), lin(n_points), pc(n_points), pd(n_points);
    std::vector<std::vector<AmplitudeRoot>> roots(n_points);
    for (int i = 0; i < n_points; ++i) {
        double F = F_lo + (F_hi - F_lo) * i / (n_points - 1.0);
        if (direction == SweepDirection::down) F = F_hi - (F_hi - F_lo) * i / (n_points - 1.0);
        f[i] = F;
        roots[i] = steady_amplitudes(p, F, omega);
        lin[i] = F / std::sqrt(c * c + d * d);
        pc[i] = c;
        pd[i] = d;
    }
    return trace_sweep(p, direction, f, roots, lin, pc, pd);
}

GeometryScaling GeometryScaling::reference_beam() {
    // measured device: 50 um x 1.5 um x 0.51 um, 0.2 ng, 1.58 MHz, Q = 3000
    // for the threshold model, intrinsic alpha0 = 2.2e14 N/m^3
    constexpr double l = 50e-6, w = 1.5e-6, t = 0.51e-6, mass = 0.2e-12;
    const double omega0 = 2.0 * pi * 1.58e6;
    GeometryScaling g;
    g.density = mass / (l * w * t);
    g.t_over_l = t / l;
    g.w_over_l = w / l;
    g.freq_coeff = omega0 * l * l / t;
    g.Q = 3000.0;
    const double k_ref = 0.5 * mass * omega0 * omega0;
    g.lambda = 2.2e14 * t * t / k_ref;
    return g;
}

ResonatorParams resonator_at_mass(double mass, ThresholdMode mode, double chem_alpha,
                                  const GeometryScaling& g) {
    if (!(mass > 0.0)) throw std::invalid_argument("resonator_at_mass: mass must be > 0");
    if (g.t_over_l < g.t_over_l_floor)
        throw std::invalid_argument("resonator_at_mass: t/l below geometry floor");
    const double l = std::cbrt(mass / (g.density * g.w_over_l * g.t_over_l));
    const double t = g.t_over_l * l;
    const double omega0 = g.freq_coeff * t / (l * l);
    const double m_eff = 0.5 * mass;
    const double k = m_eff * omega0 * omega0;
    const double alpha =
        mode == ThresholdMode::intrinsic ? g.lambda * k / (t * t) : chem_alpha;
    return ResonatorParams::make(mass, m_eff, omega0, g.Q, alpha);
}

std::vector<ThresholdPoint> threshold_vs_mass(std::span<const double> mass_grid,
                                              ThresholdMode mode, double chem_alpha,
                                              const GeometryScaling& geometry) {
    for (std::size_t i = 0; i < mass_grid.size(); ++i) {
        if (!(mass_grid[i] > 0.0))
            throw std::invalid_argument("threshold_vs_mass: masses must be positive");
        if (i > 0 && !(mass_grid[i] > mass_grid[i - 1]))
            throw std::invalid_argument("threshold_vs_mass: mass grid must be ascending");
    }
    if (mode == ThresholdMode::chemical && chem_alpha == 0.0)
        throw std::invalid_argument("threshold_vs_mass: chemical mode needs chem_alpha != 0");

    std::vector<ThresholdPoint> out;
    out.reserve(mass_grid.size());
    for (const double m : mass_grid) {
        const auto p = resonator_at_mass(m, mode, chem_alpha, geometry);
        out.push_back({m, critical_point(p).F_c});
    }
    return out;
}

} // namespace bsim::duffing
