#include "bsim/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace bsim::potential {

void PotentialModel::validate() const {
    if (!(x_min_valid > 0.0) || !(x_max_valid > x_min_valid))
        throw std::invalid_argument("PotentialModel: validity window must satisfy 0 < min < max");
    for (const auto& t : terms) {
        if (!(t.exponent > 0.0))
            throw std::invalid_argument("PowerLawTerm: exponent must be > 0");
        if (!std::isfinite(t.coefficient) || t.coefficient == 0.0)
            throw std::invalid_argument("PowerLawTerm: coefficient must be finite and nonzero");
    }
}

double eval(const PotentialModel& model, double x, int order) {
    if (order < 0 || order > 4)
        throw std::invalid_argument("eval: order must be in 0..4");
    if (!model.contains(x))
        throw std::domain_error("eval: x outside validity window");
    double sum = 0.0;
    for (const auto& t : model.terms) {
        double factor = 1.0;
        for (int j = 0; j < order; ++j) factor *= (-t.exponent - j);
        sum += t.coefficient * factor * std::pow(x, -t.exponent - order);
    }
    return sum;
}

namespace {

// 4x4 linear solve, partial pivoting. Returns false on singularity.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < 1e-300) return false;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double s = b[col];
        for (int c = col + 1; c < 4; ++c) s -= a[col][c] * b[c];
        b[col] = s / a[col][col];
    }
    return true;
}

} // namespace

FitResult fit_two_power(std::span<const std::pair<double, double>> samples,
                        const PotentialModel& init) {
    if (samples.size() < 8)
        throw std::invalid_argument("fit_two_power: need at least 8 samples");
    if (init.terms.size() != 2)
        throw std::invalid_argument("fit_two_power: init must have exactly two terms");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].first > 0.0))
            throw std::invalid_argument("fit_two_power: all x must be > 0");
        if (i > 0 && !(samples[i].first > samples[i - 1].first))
            throw std::invalid_argument("fit_two_power: x must be strictly increasing");
    }

    const double x_lo = samples.front().first;
    const double x_hi = samples.back().first;

    // Internal scaling keeps the normal equations well conditioned even for
    // SI-unit bond curves (x ~ 1e-10 m, U ~ 1e-19 J).
    double log_xr = 0.0, u_scale = 0.0;
    for (const auto& [x, u] : samples) {
        log_xr += std::log(x);
        u_scale = std::max(u_scale, std::fabs(u));
    }
    const double xr = std::exp(log_xr / static_cast<double>(samples.size()));

    double u_min = samples[0].second, u_max = samples[0].second;
    for (const auto& [x, u] : samples) {
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
    }
    PotentialModel window_only;
    window_only.x_min_valid = x_lo;
    window_only.x_max_valid = x_hi;
    if (u_max - u_min <= 0.0 || u_scale == 0.0)
        throw FitError("fit_two_power: degenerate samples (constant energy)", window_only, 0.0);

    // theta = (Ahat, a, Bhat, b), model Uhat = Ahat xh^-a + Bhat xh^-b
    const double a0 = init.terms[0].exponent;
    const double b0 = init.terms[1].exponent;
    std::array<double, 4> th = {
        init.terms[0].coefficient * std::pow(xr, -a0) / u_scale, a0,
        init.terms[1].coefficient * std::pow(xr, -b0) / u_scale, b0};

    const auto ssr_of = [&](const std::array<double, 4>& p, std::vector<double>* res) {
        double s = 0.0;
        if (res) res->clear();
        for (const auto& [x, u] : samples) {
            const double xh = x / xr;
            const double r = p[0] * std::pow(xh, -p[1]) + p[2] * std::pow(xh, -p[3]) - u / u_scale;
            s += r * r;
            if (res) res->push_back(r);
        }
        return s;
    };

    std::vector<double> res;
    double ssr = ssr_of(th, &res);
    double lambda = 1e-3;
    constexpr int max_iter = 500;
    int iter = 0;
    bool converged = false;

    for (; iter < max_iter; ++iter) {
        // normal equations from the analytic Jacobian
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        std::size_t i = 0;
        for (const auto& [x, u] : samples) {
            (void)u;
            const double xh = x / xr;
            const double lx = std::log(xh);
            const double pa = std::pow(xh, -th[1]);
            const double pb = std::pow(xh, -th[3]);
            const std::array<double, 4> row = {pa, -th[0] * lx * pa, pb, -th[2] * lx * pb};
            for (int r = 0; r < 4; ++r) {
                jtr[r] += row[r] * res[i];
                for (int c = 0; c < 4; ++c) jtj[r][c] += row[r] * row[c];
            }
            ++i;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
            auto m = jtj;
            for (int d = 0; d < 4; ++d) m[d][d] += lambda * std::max(jtj[d][d], 1e-30);
            std::array<double, 4> delta = {-jtr[0], -jtr[1], -jtr[2], -jtr[3]};
            if (!solve4(m, delta)) {
                lambda *= 4.0;
                continue;
            }
            std::array<double, 4> trial = {th[0] + delta[0], th[1] + delta[1],
                                           th[2] + delta[2], th[3] + delta[3]};
            if (!(trial[1] > 0.0) || !(trial[3] > 0.0)) {
                lambda *= 4.0;
                continue;
            }
            const double trial_ssr = ssr_of(trial, nullptr);
            if (trial_ssr <= ssr) {
                double rel_step = 0.0;
                for (int d = 0; d < 4; ++d)
                    rel_step = std::max(rel_step,
                                        std::fabs(delta[d]) / std::max(std::fabs(th[d]), 1e-30));
                th = trial;
                ssr = ssr_of(th, &res);
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (rel_step < 1e-12) converged = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (converged || !stepped) {
            converged = converged || !stepped; // stalled == no improving step exists
            break;
        }
    }

    PotentialModel out;
    out.x_min_valid = x_lo;
    out.x_max_valid = x_hi;
    out.terms = {{th[0] * u_scale * std::pow(xr, th[1]), th[1]},
                 {th[2] * u_scale * std::pow(xr, th[3]), th[3]}};
    const double residual = u_scale * std::sqrt(ssr);
    if (!converged)
        throw FitError("fit_two_power: no convergence after iteration cap", out, residual);
    return {out, residual, iter};
}

double max_attraction_point(const PotentialModel& model) {
    model.validate();
    const auto u2 = [&](double x) { return eval(model, x, 2); };

    constexpr int n_scan = 2048;
    const double lo = model.x_min_valid;
    const double hi = model.x_max_valid;
    double a = lo, fa = u2(lo);
    double b = 0.0, fb = 0.0;
    bool found = false;
    for (int i = 1; i <= n_scan; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / n_scan;
        const double fx = u2(x);
        if (fa == 0.0) return a;
        if (fa * fx < 0.0) {
            b = x;
            fb = fx;
            found = true;
            break;
        }
        a = x;
        fa = fx;
    }
    if (!found)
        throw NoSignChangeError("max_attraction_point: U'' has no sign change in window");

    while (b - a > 1e-12 * b) {
        const double m = 0.5 * (a + b);
        const double fm = u2(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    (void)fb;
    return 0.5 * (a + b);
}

PotentialModel gold_contact_model() {
    // 12-6 pair: U = A x^-12 - B x^-6.  U'' root sits at
    // x* = (26 A / 7 B)^(1/6) and U''''(x*) = 5796 B x*^-10, so the
    // curvature anchor fixes B and x* fixes A.
    const double xs = gold_contact_x_star;
    const double B = gold_contact_alpha_star * std::pow(xs, 10) / 966.0;
    const double A = (7.0 / 26.0) * B * std::pow(xs, 6);
    PotentialModel m;
    m.terms = {{A, 12.0}, {-B, 6.0}};
    m.x_min_valid = 2.4e-10;
    m.x_max_valid = 1.5e-9;
    m.validate();
    return m;
}

} // namespace bsim::potential
