#include "bsim/tuning.hpp"

#include <algorithm>
#include <cmath>

namespace bsim::tuning {

using potential::PotentialModel;

void BeamAnchor::validate(const PotentialModel& model) const {
    if (!(k0 > 0.0)) throw std::invalid_argument("BeamAnchor: k0 must be > 0");
    if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("BeamAnchor: xi must be in (0, 1]");
    if (!model.contains(x_free))
        throw std::invalid_argument("BeamAnchor: x_free outside potential window");
}

namespace {

struct StableBranch {
    double lo, hi;          // branch interval around x_free
    bool lo_is_fold, hi_is_fold; // edge is a k_eff = 0 crossing (vs window edge)
};

// The branch of equilibria connected to x_free is the maximal interval
// around it where k_eff = k0 + U'' > 0; the restoring equation is strictly
// monotone there.
StableBranch stable_branch(const PotentialModel& model, const BeamAnchor& anchor) {
    const auto keff = [&](double x) { return anchor.k0 + potential::eval(model, x, 2); };
    constexpr int n = 4096;
    const double w_lo = model.x_min_valid, w_hi = model.x_max_valid;
    const double h = (w_hi - w_lo) / n;

    const auto refine = [&](double a, double b) {
        // bisect the k_eff sign change between a (positive) and b (non-positive)
        for (int i = 0; i < 80 && b - a > 1e-15 * std::fabs(b); ++i) {
            const double m = 0.5 * (a + b);
            (keff(m) > 0.0 ? a : b) = m;
        }
        return a;
    };

    StableBranch br{w_lo, w_hi, false, false};
    if (!(keff(anchor.x_free) > 0.0))
        throw std::invalid_argument("BeamAnchor: x_free is not a stable configuration");

    double x = anchor.x_free;
    while (x - h > w_lo) {
        if (!(keff(x - h) > 0.0)) {
            br.lo = refine(x, x - h);
            br.lo_is_fold = true;
            break;
        }
        x -= h;
    }
    x = anchor.x_free;
    while (x + h < w_hi) {
        if (!(keff(x + h) > 0.0)) {
            br.hi = refine(x, x + h);
            br.hi_is_fold = true;
            break;
        }
        x += h;
    }
    return br;
}

} // namespace

double equilibrium(const PotentialModel& model, const BeamAnchor& anchor, double F) {
    model.validate();
    anchor.validate(model);
    const auto g = [&](double x) {
        return anchor.k0 * (x - anchor.x_free) + potential::eval(model, x, 1) - F;
    };

    const StableBranch br = stable_branch(model, anchor);
    double a = br.lo, b = br.hi;
    double ga = g(a), gb = g(b);
    if (ga > 0.0 || gb < 0.0) {
        // g is increasing on the branch, so the root fell off one edge
        const bool low_side = ga > 0.0;
        const bool fold = low_side ? br.lo_is_fold : br.hi_is_fold;
        const double edge = low_side ? a : b;
        const double f_edge = anchor.k0 * (edge - anchor.x_free) + potential::eval(model, edge, 1);
        if (fold)
            throw InstabilityError("equilibrium: stable branch folds (jump to contact)", f_edge);
        throw std::domain_error("equilibrium: root outside potential validity window");
    }

    // bisection with Newton polish; tolerance 1e-18 N on the force residual
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if (std::fabs(gm) < 1e-18 || b - a <= std::fabs(m) * 4e-16) {
            a = b = m;
            break;
        }
        if ((ga <= 0.0) == (gm <= 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    (void)gb;
    double x = 0.5 * (a + b);
    for (int i = 0; i < 4; ++i) {
        const double kx = anchor.k0 + potential::eval(model, x, 2);
        if (!(kx > 0.0)) break;
        const double step = g(x) / kx;
        const double xn = std::clamp(x - step, br.lo, br.hi);
        if (xn == x) break;
        x = xn;
    }
    return x;
}

TuneCurve tune_curve(const PotentialModel& model, const BeamAnchor& anchor,
                     std::span<const double> F_grid, int force_sign) {
    if (force_sign != 1 && force_sign != -1)
        throw std::invalid_argument("tune_curve: force_sign must be +1 or -1");
    for (std::size_t i = 1; i < F_grid.size(); ++i) {
        const bool up = F_grid[1] > F_grid[0];
        if ((F_grid[i] > F_grid[i - 1]) != up || F_grid[i] == F_grid[i - 1])
            throw std::invalid_argument("tune_curve: F_grid must be strictly monotone");
    }

    TuneCurve out;
    for (const double F : F_grid) {
        double x;
        try {
            x = equilibrium(model, anchor, force_sign * F);
        } catch (const InstabilityError&) {
            out.truncated = true;
            break;
        } catch (const std::domain_error&) {
            out.truncated = true;
            break;
        }
        TunePoint p;
        p.F = F;
        p.x_eq = x;
        const double u2 = potential::eval(model, x, 2);
        p.dk = -u2;
        p.alpha = -potential::eval(model, x, 4) / 6.0;
        p.k_eff = anchor.k0 + u2;
        p.stable = p.k_eff > 0.0;
        out.points.push_back(p);
        out.last_stable_F = F;
    }
    return out;
}

std::vector<std::pair<double, double>> smooth_running_average(
    std::span<const std::pair<double, double>> series, int window) {
    if (window % 2 == 0 || window < 3)
        throw std::invalid_argument("smooth_running_average: window must be odd and >= 3");
    if (static_cast<std::size_t>(window) > series.size())
        throw std::invalid_argument("smooth_running_average: window longer than series");
    const int n = static_cast<int>(series.size());
    const int half = window / 2;
    std::vector<std::pair<double, double>> out(series.begin(), series.end());
    for (int i = 0; i < n; ++i) {
        const int h = std::min({half, i, n - 1 - i});
        double s = 0.0;
        for (int j = i - h; j <= i + h; ++j) s += series[j].second;
        out[i].second = s / (2 * h + 1);
    }
    return out;
}

std::vector<AlphaPoint> estimate_alpha_from_dk(
    std::span<const std::pair<double, double>> samples, double k, double xi) {
    if (samples.size() < 7)
        throw std::invalid_argument("estimate_alpha_from_dk: need at least 7 samples");
    if (!(k > 0.0)) throw std::invalid_argument("estimate_alpha_from_dk: k must be > 0");
    if (!(xi > 0.0)) throw std::invalid_argument("estimate_alpha_from_dk: xi must be > 0");
    const bool up = samples[1].first > samples[0].first;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].first == samples[i - 1].first)
            throw std::invalid_argument("estimate_alpha_from_dk: duplicate F values");
        if ((samples[i].first > samples[i - 1].first) != up)
            throw std::invalid_argument("estimate_alpha_from_dk: F must be strictly monotone");
    }

    // smoothing precedes differentiation, matching the measurement pipeline
    const auto sm = smooth_running_average(samples, 5);
    const int n = static_cast<int>(sm.size());

    std::vector<double> d1(n), d2(n);
    for (int i = 1; i < n - 1; ++i) {
        const double h1 = sm[i].first - sm[i - 1].first;
        const double h2 = sm[i + 1].first - sm[i].first;
        const double y0 = sm[i - 1].second, y1 = sm[i].second, y2 = sm[i + 1].second;
        d1[i] = (y2 - y1) * h1 / (h2 * (h1 + h2)) + (y1 - y0) * h2 / (h1 * (h1 + h2));
        d2[i] = 2.0 * ((y2 - y1) / h2 - (y1 - y0) / h1) / (h1 + h2);
    }
    d1[0] = (sm[1].second - sm[0].second) / (sm[1].first - sm[0].first);
    d1[n - 1] = (sm[n - 1].second - sm[n - 2].second) / (sm[n - 1].first - sm[n - 2].first);
    d2[0] = d2[1];
    d2[n - 1] = d2[n - 2];

    std::vector<AlphaPoint> out(n);
    const double c = 1.0 / (6.0 * xi * xi);
    for (int i = 0; i < n; ++i) {
        out[i].F = sm[i].first;
        out[i].alpha = c * (d2[i] * k * k + d1[i] * d1[i] * k);
        out[i].interior = i > 0 && i < n - 1;
    }
    return out;
}

} // namespace bsim::tuning
