#include "majb/decoherence.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace majb {

namespace {

void check_kind(const MatrixElementTable& table, TableKind want, const char* what) {
    if (table.kind != want)
        throw usage_error(std::string(what) + " needs a table of the matching kind");
}

}  // namespace

double gamma_low_dissipation(const MatrixElementTable& c_table, double coupling) {
    check_kind(c_table, TableKind::C, "gamma_low_dissipation");
    if (c_table.n_max < 1) throw usage_error("table has no (1,1) entries");
    cplx sum(0.0, 0.0);
    for (int j = 1; j <= c_table.n_sites; ++j) sum += c_table.value(1, 1, j);
    return coupling * std::abs(sum);
}

double gamma_low_dephasing(const MatrixElementTable& d_even,
                           const MatrixElementTable& d_odd, double coupling) {
    check_kind(d_even, TableKind::DEven, "gamma_low_dephasing (even table)");
    check_kind(d_odd, TableKind::DOdd, "gamma_low_dephasing (odd table)");
    if (d_even.n_sites != d_odd.n_sites)
        throw usage_error("dephasing tables disagree on the chain length");
    if (d_even.n_max < 1 || d_odd.n_max < 1) throw usage_error("table has no (1,1) entries");
    cplx sum(0.0, 0.0);
    for (int j = 1; j <= d_even.n_sites; ++j)
        sum += d_even.value(1, 1, j) - d_odd.value(1, 1, j);
    return coupling * std::abs(sum);
}

double channel_weight_dissipation(const MatrixElementTable& c_table, int n, int m) {
    check_kind(c_table, TableKind::C, "channel_weight_dissipation");
    double sum = 0.0;
    for (int j = 1; j <= c_table.n_sites; ++j) sum += std::norm(c_table.value(n, m, j));
    return sum;
}

double channel_weight_dephasing(const MatrixElementTable& d_table, int n, int m) {
    if (d_table.kind == TableKind::C)
        throw usage_error("channel_weight_dephasing needs a D table");
    cplx sum(0.0, 0.0);
    for (int j = 1; j <= d_table.n_sites; ++j) sum += d_table.value(n, m, j);
    return std::norm(sum);
}

double fermi_occupation(double freq, double temperature) {
    if (temperature < 0.0) throw usage_error("temperature must be >= 0");
    if (temperature == 0.0) {
        if (freq > 0.0) return 0.0;
        if (freq < 0.0) return 1.0;
        return 0.5;
    }
    return 1.0 / (std::exp(freq / temperature) + 1.0);
}

double bose_occupation(double freq, double temperature) {
    if (temperature < 0.0) throw usage_error("temperature must be >= 0");
    if (freq <= freq_floor)
        throw small_gap_error("transition frequency " + std::to_string(freq) +
                              " is at or below the floor " + std::to_string(freq_floor) +
                              "; the low-frequency channel applies");
    if (temperature == 0.0) return 0.0;
    return 1.0 / std::expm1(freq / temperature);
}

DecoherenceReport lindblad_rates(const std::vector<LabeledValue>& weights,
                                 const std::vector<LabeledValue>& freqs,
                                 const BathSpec& bath, NoiseKind noise) {
    bath.validate();
    if (bath.statistics != statistics_for(noise))
        throw statistics_mismatch_error(
            noise == NoiseKind::Dissipation
                ? "dissipation requires a Fermionic bath"
                : "dephasing requires a Bosonic bath");
    if (weights.size() != freqs.size())
        throw usage_error("weight and frequency lists differ in length");

    DecoherenceReport report;
    report.noise = noise;
    const double prefactor =
        2.0 * std::numbers::pi * bath.dos * bath.coupling * bath.coupling;

    TransitionTable table;
    table.kind = noise == NoiseKind::Dissipation ? TransitionKind::CrossParity
                                                 : TransitionKind::SameParityEven;

    for (std::size_t i = 0; i < weights.size(); ++i) {
        const LabeledValue& wv = weights[i];
        const LabeledValue& fv = freqs[i];
        if (wv.n != fv.n || wv.m != fv.m)
            throw usage_error("weight and frequency lists are not aligned on (n, m)");
        if (wv.value < 0.0) throw usage_error("channel weights must be >= 0");

        if (std::abs(fv.value) < freq_floor) {
            report.validity.low_frequency.emplace_back(wv.n, wv.m);
            continue;
        }
        table.entries.push_back({wv.n, wv.m, std::abs(fv.value)});

        RateChannel ch;
        ch.n = wv.n;
        ch.m = wv.m;
        ch.frequency = fv.value;
        ch.weight = wv.value;
        ch.rate = prefactor * wv.value;
        if (bath.statistics == BathStatistics::Fermionic) {
            ch.occupation = fermi_occupation(fv.value, bath.temperature);
            ch.downward = ch.rate * (1.0 - ch.occupation);
        } else {
            ch.occupation = bose_occupation(std::abs(fv.value), bath.temperature);
            ch.downward = ch.rate * (1.0 + ch.occupation);
        }
        ch.upward = ch.rate * ch.occupation;
        report.channels.push_back(ch);
    }

    report.validity.degenerate = detect_degenerate_transitions(table);
    return report;
}

std::vector<DecoherenceReport> full_reports(const EigenSystem& even, const EigenSystem& odd,
                                            const BathSpec& bath, NoiseKind noise, int n_max) {
    if (n_max < 1 || n_max > even.k_computed || n_max > odd.k_computed)
        throw usage_error("n_max exceeds the computed eigenpairs");

    std::vector<DecoherenceReport> out;

    if (noise == NoiseKind::Dissipation) {
        MatrixElementTable c = dissipative_matrix_elements(even, odd, n_max);
        std::vector<LabeledValue> weights, freqs;
        for (int n = 1; n <= n_max; ++n)
            for (int m = 1; m <= n_max; ++m) {
                weights.push_back({n, m, channel_weight_dissipation(c, n, m)});
                freqs.push_back({n, m, even.energies[n - 1] - odd.energies[m - 1]});
            }
        DecoherenceReport report = lindblad_rates(weights, freqs, bath, noise);
        report.gamma_low = gamma_low_dissipation(c, bath.coupling);
        out.push_back(std::move(report));
        return out;
    }

    MatrixElementTable d_even = dephasing_matrix_elements(even, n_max);
    MatrixElementTable d_odd = dephasing_matrix_elements(odd, n_max);
    const double gamma = gamma_low_dephasing(d_even, d_odd, bath.coupling);

    for (const auto* table : {&d_even, &d_odd}) {
        const EigenSystem& sys = table->kind == TableKind::DEven ? even : odd;
        std::vector<LabeledValue> weights, freqs;
        for (int n = 2; n <= n_max; ++n)
            for (int m = 1; m < n; ++m) {
                weights.push_back({n, m, channel_weight_dephasing(*table, n, m)});
                freqs.push_back({n, m, sys.energies[n - 1] - sys.energies[m - 1]});
            }
        DecoherenceReport report = lindblad_rates(weights, freqs, bath, noise);
        report.sector = sys.sector;
        report.gamma_low = gamma;
        out.push_back(std::move(report));
    }
    return out;
}

}  // namespace majb
