#include "majb/observables.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "majb/chain_model.hpp"
#include "majb/errors.hpp"

namespace majb {

namespace {

double zval(std::int64_t index, int j, int n) {
    return ((index >> (n - j)) & 1) ? -1.0 : 1.0;
}

void check_capacity(int n_sites) {
    if (n_sites < 2) throw usage_error("n_sites must be at least 2");
    if (n_sites > max_sites())
        throw capacity_error("n_sites exceeds the configured maximum of " +
                             std::to_string(max_sites()) + " sites");
}

void check_state(const Eigen::VectorXcd& state, int n_sites) {
    check_capacity(n_sites);
    if (state.size() != (std::int64_t{1} << n_sites))
        throw usage_error("state dimension does not match the site count");
    if (std::abs(state.norm() - 1.0) > 1e-8)
        throw usage_error("state is not normalized");
}

}  // namespace

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Topological: return "Topological";
        case Phase::TrivialPP: return "Trivial/PP";
        case Phase::DwAfm: return "DW/AFM";
        case Phase::IdwFloating: return "IDW/Floating";
        case Phase::Fm: return "FM";
        case Phase::Undetermined: return "Undetermined";
    }
    throw usage_error("unknown phase label");
}

Eigen::VectorXcd embed_state(const Eigen::VectorXcd& sector_state, const SectorBasis& basis,
                             int n_sites) {
    check_capacity(n_sites);
    if (sector_state.size() != basis.dim())
        throw usage_error("sector state dimension does not match the basis");
    if (2 * basis.dim() != (std::int64_t{1} << n_sites))
        throw usage_error("sector basis does not belong to a chain of the given length");
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(std::int64_t{1} << n_sites);
    for (Eigen::Index i = 0; i < sector_state.size(); ++i) {
        const std::int64_t idx = basis.indices[static_cast<std::size_t>(i)];
        if (idx < 0 || idx >= full.size())
            throw usage_error("sector basis index exceeds the full space");
        full[idx] = sector_state[i];
    }
    return full;
}

double magnetization(const Eigen::VectorXcd& ground, int n_sites) {
    check_state(ground, n_sites);
    double m = 0.0;
    for (Eigen::Index i = 0; i < ground.size(); ++i) {
        const double p = std::norm(ground[i]);
        if (p == 0.0) continue;
        const int ones = std::popcount(static_cast<std::uint64_t>(i));
        m += p * static_cast<double>(n_sites - 2 * ones);
    }
    return m;
}

CorrelationRow spin_correlations(const Eigen::VectorXcd& ground, int n_sites, Axis axis,
                                 int anchor) {
    check_state(ground, n_sites);
    if (anchor < 1 || anchor > n_sites) throw usage_error("anchor site out of range");

    CorrelationRow row;
    row.axis = axis;
    row.anchor = anchor;
    for (int j = 1; j <= n_sites; ++j) {
        if (j == anchor) continue;
        double value = 0.0;
        if (axis == Axis::Z) {
            for (Eigen::Index i = 0; i < ground.size(); ++i) {
                const double p = std::norm(ground[i]);
                if (p == 0.0) continue;
                value += p * zval(i, anchor, n_sites) * zval(i, j, n_sites);
            }
        } else {
            const std::int64_t mask = (std::int64_t{1} << (n_sites - anchor)) |
                                      (std::int64_t{1} << (n_sites - j));
            cplx acc = 0.0;
            for (Eigen::Index i = 0; i < ground.size(); ++i) {
                if (ground[i] == cplx(0.0)) continue;
                cplx term = std::conj(ground[i ^ mask]) * ground[i];
                if (axis == Axis::Y) term *= -zval(i, anchor, n_sites) * zval(i, j, n_sites);
                acc += term;
            }
            value = acc.real();
        }
        row.sites.push_back(j);
        row.values.push_back(value);
    }
    return row;
}

GroundReport analyze_ground(const EigenSystem& even, const EigenSystem& odd,
                            double degeneracy_threshold) {
    if (even.sector != ParitySector::Even || odd.sector != ParitySector::Odd)
        throw usage_error("eigen systems passed in the wrong sector order");
    if (even.k_computed < 1 || odd.k_computed < 1)
        throw usage_error("ground analysis needs at least one level per sector");

    GroundReport report;
    const double e1 = even.energies[0];
    const double o1 = odd.energies[0];
    report.gap = std::abs(e1 - o1);
    report.degenerate = report.gap < degeneracy_threshold;

    const bool even_lower = e1 <= o1;
    const EigenSystem& lower = even_lower ? even : odd;
    const EigenSystem& upper = even_lower ? odd : even;
    if (lower.k_computed < 2)
        throw usage_error("parity ordering needs two levels in the lower sector");
    report.same_parity = lower.energies[1] < upper.energies[0];

    report.sector = report.degenerate ? ParitySector::Even
                                      : (even_lower ? ParitySector::Even : ParitySector::Odd);
    report.energy = report.sector == ParitySector::Even ? e1 : o1;
    return report;
}

PhaseLabel classify_phase(double gap, bool same_parity, double m, const ChainParams& params,
                          double eps_gap, double eps_m) {
    params.validate();
    if (!(eps_gap > 0.0) || !(eps_m > 0.0)) throw usage_error("thresholds must be positive");

    PhaseLabel label;
    label.gap = gap;
    label.same_parity = same_parity;
    label.magnetization = m;

    const double w = params.w;
    if (gap < eps_gap * w && !same_parity)
        label.phase = Phase::Topological;
    else if (std::abs(params.mu) <= 1e-6 * w &&
             params.u < -2.0 * (1.0 + std::abs(params.delta) / w) * w)
        label.phase = Phase::Fm;
    else if (same_parity && std::abs(m) < eps_m)
        label.phase = Phase::DwAfm;
    else if (same_parity)
        label.phase = Phase::IdwFloating;
    else if (std::abs(m) > 0.9 * params.n_sites)
        label.phase = Phase::TrivialPP;
    else
        label.phase = Phase::Undetermined;
    return label;
}

}  // namespace majb
