#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "majb/errors.hpp"

namespace majb {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// All couplings are given in units of w; w itself sets the energy scale
// and must stay positive.
struct ChainParams {
    int n_sites = 2;
    double w = 1.0;
    double delta = 0.0;
    double mu = 0.0;
    double u = 0.0;

    void validate() const;
};

enum class ParitySector { Even, Odd };

inline const char* to_string(ParitySector s) {
    return s == ParitySector::Even ? "even" : "odd";
}

// Ascending full-space basis indices (site 1 = most significant bit)
// whose product of sigma^z eigenvalues matches the sector label.
struct SectorBasis {
    ParitySector sector = ParitySector::Even;
    std::vector<std::int64_t> indices;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(indices.size()); }
};

// Sparse complex matrix plus a Hermiticity promise. Full-space operators
// have dim = 2^N; sector blocks carry the block dimension. Rectangular
// cross-sector blocks set rows != cols and hermitian = false.
struct OperatorMatrix {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    SparseOp mat;
    bool hermitian = false;

    Eigen::Index dim() const { return rows; }
    double max_abs() const;
    // Largest |A - A^dagger| element; only meaningful for square matrices.
    double hermiticity_defect() const;
    void verify_hermitian() const;
};

enum class BathStatistics { Fermionic, Bosonic };
enum class NoiseKind { Dissipation, Dephasing };

inline BathStatistics statistics_for(NoiseKind k) {
    return k == NoiseKind::Dissipation ? BathStatistics::Fermionic
                                       : BathStatistics::Bosonic;
}

// Bath side of a decoherence computation: statistics, coupling constant
// (g or g-tilde), temperature k_B T, and a flat density-of-states constant,
// all in units of w.
struct BathSpec {
    BathStatistics statistics = BathStatistics::Fermionic;
    double coupling = 0.0;
    double temperature = 0.0;
    double dos = 1.0;

    void validate() const;
};

enum class Axis { X, Y, Z };

inline const char* to_string(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        default: return "z";
    }
}

// Capacity limit on chain length: MAJB_MAX_N environment override,
// default 20.
int max_sites();

}  // namespace majb
