#pragma once

#include <cstdint>

#include "majb/types.hpp"

namespace majb {

struct LanczosOptions {
    double tol = 1e-9;             // absolute residual target
    long budget_per_pair = 10000;  // matvec budget per requested eigenpair
    Eigen::Index max_basis = 200;  // Krylov length per restart cycle
    std::uint64_t seed = 0x6d616a62;
};

struct LanczosResult {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXcd vectors;  // orthonormal columns, one per value
    long matvecs = 0;
};

// Lowest k eigenpairs of a sparse Hermitian matrix by restarted Lanczos
// with full reorthogonalization and locking of converged pairs. Fully
// deterministic: fixed-seed start vectors and chunk-ordered reductions.
LanczosResult lanczos_lowest(const SparseOp& a, Eigen::Index k,
                             const LanczosOptions& opt = {});

}  // namespace majb
