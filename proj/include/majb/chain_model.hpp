#pragma once

#include <utility>

#include "majb/types.hpp"

namespace majb {

// Spin basis convention: site 1 is the most significant bit of the basis
// index, bit 0 = up (sigma^z = +1, site occupied), bit 1 = down. Parity is
// the product of sigma^z over all sites, i.e. Even iff popcount is even.

ParitySector parity_of_basis_index(std::int64_t index, int n_sites);

std::pair<SectorBasis, SectorBasis> build_sector_basis(int n_sites);

// Hamiltonian in the hopping/pairing form: per bond w(s+s- + s-s+) +
// delta(s+s+ + s-s-), plus the -(mu/2) sigma^z field and (u/4) sigma^z
// sigma^z bond terms. Open boundary, bonds j = 1..N-1.
OperatorMatrix build_hamiltonian(const ChainParams& params);

// The same operator assembled from sigma^x sigma^x, sigma^y sigma^y and
// sigma^z sigma^z bond terms with Jx = (w+delta)/2, Jy = (w-delta)/2,
// Jz = u/4.
OperatorMatrix build_hamiltonian_xyz(const ChainParams& params);

// Square block of a parity-symmetric operator on one sector. Verifies the
// discarded off-block is numerically zero and throws otherwise.
OperatorMatrix project_to_sector(const OperatorMatrix& op, const SectorBasis& basis);

// Rectangular block <rows|op|cols> between two sector bases; used for
// parity-odd operators that map one sector into the other.
OperatorMatrix project_between_sectors(const OperatorMatrix& op,
                                       const SectorBasis& rows,
                                       const SectorBasis& cols);

}  // namespace majb
