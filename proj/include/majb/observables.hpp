#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "majb/spectra.hpp"
#include "majb/types.hpp"

namespace majb {

// One row of ground-state correlations <s^a_anchor s^a_j> for j != anchor.
struct CorrelationRow {
    Axis axis = Axis::Z;
    int anchor = 1;
    std::vector<int> sites;
    std::vector<double> values;
};

enum class Phase { Topological, TrivialPP, DwAfm, IdwFloating, Fm, Undetermined };

std::string to_string(Phase phase);

struct PhaseLabel {
    Phase phase = Phase::Undetermined;
    double gap = 0.0;
    bool same_parity = false;
    double magnetization = 0.0;
};

// Which state the ground-state diagnostics run on, and the evidence that
// picked it. When the sector gap falls below the degeneracy threshold the
// even-sector state is used regardless of ordering, so output stays
// deterministic where the two sectors cross.
struct GroundReport {
    ParitySector sector = ParitySector::Even;
    double energy = 0.0;
    double gap = 0.0;
    bool degenerate = false;
    bool same_parity = false;
};

Eigen::VectorXcd embed_state(const Eigen::VectorXcd& sector_state, const SectorBasis& basis,
                             int n_sites);

double magnetization(const Eigen::VectorXcd& ground, int n_sites);

CorrelationRow spin_correlations(const Eigen::VectorXcd& ground, int n_sites, Axis axis,
                                 int anchor = 1);

// Needs at least two levels in the lower sector to resolve whether the two
// lowest global states share a parity.
GroundReport analyze_ground(const EigenSystem& even, const EigenSystem& odd,
                            double degeneracy_threshold);

PhaseLabel classify_phase(double gap, bool same_parity, double m, const ChainParams& params,
                          double eps_gap = 1e-3, double eps_m = 0.5);

}  // namespace majb
