#pragma once

#include <vector>

#include "majb/chain_model.hpp"
#include "majb/lanczos.hpp"
#include "majb/types.hpp"

namespace majb {

enum class SolverKind { Dense, Iterative };
enum class SolverChoice { Auto, Dense, Iterative };

struct EigenSystem {
    ParitySector sector = ParitySector::Even;
    Eigen::VectorXd energies;   // ascending, units of w
    Eigen::MatrixXcd vectors;   // sector-local coordinates, orthonormal columns
    Eigen::Index k_computed = 0;
    SolverKind solver = SolverKind::Dense;
};

enum class TransitionKind { CrossParity, SameParityEven, SameParityOdd };

struct TransitionEntry {
    int n = 0;
    int m = 0;
    double frequency = 0.0;  // |E_n - E_m| between the tabulated levels
};

struct TransitionTable {
    TransitionKind kind = TransitionKind::CrossParity;
    std::vector<TransitionEntry> entries;
};

struct TransitionCollision {
    std::size_t first = 0;  // indices into TransitionTable::entries
    std::size_t second = 0;
    double separation = 0.0;
};

// Lowest k eigenpairs of one parity block. The dense path covers blocks up
// to dimension 4096 and retains the full spectrum; the iterative path
// returns exactly k pairs. energy_unit is w, used for the residual target
// (1e-9 w) and the degenerate-cluster tie-break window (1e-10 w).
EigenSystem diagonalize_sector(const OperatorMatrix& h_block, ParitySector sector,
                               Eigen::Index k, SolverChoice choice = SolverChoice::Auto,
                               double energy_unit = 1.0);

// |E^e_1 - E^o_1|, the degeneracy gap between the sector ground states.
double ground_gap(const EigenSystem& even, const EigenSystem& odd);

struct SizeGap {
    int n_sites = 0;
    double gap = 0.0;
};

// The degeneracy gap evaluated at fixed couplings for each chain length.
std::vector<SizeGap> gap_vs_size(const ChainParams& params_template,
                                 const std::vector<int>& sizes,
                                 SolverChoice choice = SolverChoice::Auto);

// CrossParity: rows (1,1), (1,n), (n,1) for n = 2..n_max. SameParity:
// rows (1,n) for n = 2..n_max within the given sector's system.
TransitionTable transition_frequencies(const EigenSystem& even, const EigenSystem& odd,
                                       TransitionKind kind, int n_max);

// All entry pairs closer than tol; an empty result certifies the secular
// master-equation validity condition.
std::vector<TransitionCollision> detect_degenerate_transitions(const TransitionTable& table,
                                                               double tol = 1e-6);

}  // namespace majb
