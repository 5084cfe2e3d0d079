#include "bsim/noisebudget.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsim/constants.hpp"
#include "bsim/sde.hpp"

namespace bsim::noisebudget {

NoiseSource thermal_source(const duffing::ResonatorParams& p, double T) {
    return {"thermal", sde::thermal_noise_for(p, T).S_F, Provenance::thermal};
}

void Transduction::validate() const {
    if (!(B > 0.0) || !(l > 0.0) || !(R > 0.0))
        throw std::invalid_argument("Transduction: B, l, R must all be positive");
}

NoiseSource johnson_source(const Transduction& t, double T_circuit) {
    t.validate();
    if (!(T_circuit > 0.0)) throw std::invalid_argument("johnson_source: T_circuit must be > 0");
    // S_V = 4 R k_B T -> current 4 k_B T / R -> force via (B l)^2
    const double s_f = t.B * t.l * t.B * t.l * 4.0 * k_boltzmann * T_circuit / t.R;
    return {"johnson", s_f, Provenance::johnson};
}

Budget combine(const std::vector<NoiseSource>& sources, double thermal_temperature) {
    if (sources.empty()) throw std::invalid_argument("combine: need at least one source");
    Budget b;
    double s_thermal = 0.0;
    for (const auto& s : sources) {
        if (!(s.S_F >= 0.0)) throw std::invalid_argument("combine: S_F must be >= 0");
        b.S_total += s.S_F;
        if (s.provenance == Provenance::thermal) {
            b.has_thermal = true;
            s_thermal += s.S_F;
        } else {
            b.S_parametric += s.S_F;
        }
    }
    for (const auto& s : sources) {
        BudgetEntry e;
        e.name = s.name;
        e.S_F = s.S_F;
        e.fraction = b.S_total > 0.0 ? s.S_F / b.S_total : 0.0;
        e.dB_rel_thermal =
            b.has_thermal && s_thermal > 0.0 ? 10.0 * std::log10(s.S_F / s_thermal) : 0.0;
        b.breakdown.push_back(e);
    }
    b.T_parametric = std::numeric_limits<double>::quiet_NaN();
    if (b.has_thermal && s_thermal > 0.0 && thermal_temperature >= 0.0)
        b.T_parametric = thermal_temperature * b.S_parametric / s_thermal;
    return b;
}

ConsistencyReport total_vs_measured(double S_budget, double S_inferred, double tolerance_dB) {
    if (!(S_budget > 0.0) || !(S_inferred > 0.0))
        throw std::invalid_argument("total_vs_measured: both inputs must be positive");
    ConsistencyReport r;
    r.power_ratio = S_inferred / S_budget;
    r.amplitude_ratio = std::sqrt(r.power_ratio);
    r.dB = 10.0 * std::log10(r.power_ratio);
    r.pass = std::fabs(r.dB) <= tolerance_dB;
    return r;
}

} // namespace bsim::noisebudget
