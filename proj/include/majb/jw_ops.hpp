#pragma once

#include <vector>

#include "majb/spectra.hpp"
#include "majb/types.hpp"

namespace majb {

enum class SiteOperatorKind { MajoranaCoupling, NumberOperator };

struct SiteOperatorSet {
    SiteOperatorKind kind = SiteOperatorKind::MajoranaCoupling;
    std::vector<OperatorMatrix> per_site;  // index j-1 holds site j
};

// c_j + c_j^dagger mapped to spins: (-1)^(j-1) (prod_{k<j} sigma^z_k)
// sigma^x_j in the full 2^N space. A signed permutation; Hermitian and
// squares to the identity.
OperatorMatrix majorana_site_operator(int j, int n_sites);

// c_j^dagger c_j = (sigma^z_j + 1)/2: diagonal projector onto up at site j.
OperatorMatrix number_operator(int j, int n_sites);

SiteOperatorSet build_site_operators(SiteOperatorKind kind, int n_sites);

enum class TableKind { C, DEven, DOdd };

// Eigenbasis matrix elements of the site operators: C^{nm}_j across
// parities, D^{nm}_{alpha j} within one parity.
struct MatrixElementTable {
    TableKind kind = TableKind::C;
    int n_max = 0;
    int n_sites = 0;
    std::vector<Eigen::MatrixXcd> per_site;  // index j-1: n_max x n_max block

    // 1-based level indices n, m and site j.
    cplx value(int n, int m, int j) const;
};

// C^{nm}_j = <n|_e (c_j + c_j^dagger) |m>_o for n, m <= n_max.
MatrixElementTable dissipative_matrix_elements(const EigenSystem& even,
                                               const EigenSystem& odd, int n_max);

// D^{nm}_{alpha j} = <n|_alpha n_j |m>_alpha for n, m <= n_max.
MatrixElementTable dephasing_matrix_elements(const EigenSystem& eigs, int n_max);

}  // namespace majb
