#pragma once

#include <optional>
#include <vector>

#include "majb/jw_ops.hpp"
#include "majb/spectra.hpp"
#include "majb/types.hpp"

namespace majb {

// Transitions closer than this to zero frequency are handled by the
// low-frequency couplings, not the rate equations (units of w).
inline constexpr double freq_floor = 1e-8;

// gamma_L = g |sum_j C^{11}_j|: coupling of the degenerate ground-state
// pair to the dissipative bath.
double gamma_low_dissipation(const MatrixElementTable& c_table, double coupling);

// gamma~_L = g~ |sum_j (D^{11}_{ej} - D^{11}_{oj})|.
double gamma_low_dephasing(const MatrixElementTable& d_even,
                           const MatrixElementTable& d_odd, double coupling);

// Incoherent site sum sum_j |C^{nm}_j|^2.
double channel_weight_dissipation(const MatrixElementTable& c_table, int n, int m);

// Coherent site sum |sum_j D^{nm}_{alpha j}|^2.
double channel_weight_dephasing(const MatrixElementTable& d_table, int n, int m);

// Mean occupations at a transition frequency; hbar = k_B = 1.
double fermi_occupation(double freq, double temperature);
double bose_occupation(double freq, double temperature);

struct LabeledValue {
    int n = 0;
    int m = 0;
    double value = 0.0;
};

struct RateChannel {
    int n = 0;
    int m = 0;
    double frequency = 0.0;   // signed transition frequency
    double weight = 0.0;      // channel weight
    double occupation = 0.0;  // mean bath occupation for this channel
    double rate = 0.0;        // 2 pi dos coupling^2 weight
    double downward = 0.0;    // rate x (1 - n_f) or rate x (1 + n_b)
    double upward = 0.0;      // rate x occupation
};

struct ValidityReport {
    std::vector<TransitionCollision> degenerate;
    std::vector<std::pair<int, int>> low_frequency;  // excluded (n, m) channels
};

struct DecoherenceReport {
    NoiseKind noise = NoiseKind::Dissipation;
    // Set for dephasing reports, whose channels live within one sector.
    std::optional<ParitySector> sector;
    // Filled by the full_* builders; plain lindblad_rates leaves it unset.
    std::optional<double> gamma_low;
    std::vector<RateChannel> channels;
    ValidityReport validity;
};

// Rates from aligned (n, m) weight and frequency lists:
// Gamma = 2 pi dos coupling^2 weight, split into downward/upward factors
// by the bath statistics. Channels below freq_floor are excluded and
// listed in the validity report.
DecoherenceReport lindblad_rates(const std::vector<LabeledValue>& weights,
                                 const std::vector<LabeledValue>& freqs,
                                 const BathSpec& bath, NoiseKind noise);

// Assembles the complete report set for one parameter point: one report
// for dissipation (cross-parity channels over all n, m <= n_max), two for
// dephasing (same-parity channels per sector, n > m pairs).
std::vector<DecoherenceReport> full_reports(const EigenSystem& even, const EigenSystem& odd,
                                            const BathSpec& bath, NoiseKind noise, int n_max);

}  // namespace majb
