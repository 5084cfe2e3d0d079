#pragma once

#include <string>
#include <vector>

#include "bsim/duffing.hpp"

namespace bsim::noisebudget {

enum class Provenance { thermal, johnson, backaction, phase, custom };

struct NoiseSource {
    std::string name;
    double S_F = 0.0; // one-sided force PSD, N^2/Hz
    Provenance provenance = Provenance::custom;
};

// Brownian thermal force noise of the mode at temperature T.
NoiseSource thermal_source(const duffing::ResonatorParams& p, double T);

// Magnetomotive transduction: force = B * l * current.
struct Transduction {
    double B = 0.0; // T
    double l = 0.0; // m
    double R = 0.0; // Ohm
    void validate() const;
};

// Johnson-Nyquist voltage noise 4 R k_B T of the circuit, converted to a
// force PSD through the transduction: S_F = (B l)^2 * 4 k_B T / R.
NoiseSource johnson_source(const Transduction& t, double T_circuit);

struct BudgetEntry {
    std::string name;
    double S_F = 0.0;
    double fraction = 0.0;        // of the total power
    double dB_rel_thermal = 0.0;  // 10 log10(S_F / S_thermal); 0 if no thermal source
};

struct Budget {
    double S_total = 0.0;
    std::vector<BudgetEntry> breakdown;
    bool has_thermal = false;
    double S_parametric = 0.0; // sum of non-thermal sources
    // T * S_para / S_th; NaN unless a thermal source and its T were given
    double T_parametric = 0.0;
};

// Incoherent power addition. thermal_temperature (K) is only used to report
// the parametric noise temperature; pass a negative value to skip it.
Budget combine(const std::vector<NoiseSource>& sources, double thermal_temperature = -1.0);

struct ConsistencyReport {
    double power_ratio = 0.0;     // S_inferred / S_budget
    double amplitude_ratio = 0.0; // sqrt of the above
    double dB = 0.0;
    bool pass = false;
};

// Compares a budgeted total against an independently inferred one; pass
// criterion is |dB| <= tolerance_dB.
ConsistencyReport total_vs_measured(double S_budget, double S_inferred, double tolerance_dB);

} // namespace bsim::noisebudget
