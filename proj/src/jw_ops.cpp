#include "majb/jw_ops.hpp"

#include <bit>
#include <string>

namespace majb {

namespace {

void check_site(int j, int n_sites) {
    if (j < 1 || j > n_sites)
        throw usage_error("site index " + std::to_string(j) + " out of range for N = " +
                          std::to_string(n_sites));
}

// Number of sites from a sector dimension 2^(N-1).
int sites_from_sector_dim(Eigen::Index dim) {
    const auto u = static_cast<std::uint64_t>(dim);
    if (dim < 2 || !std::has_single_bit(u))
        throw usage_error("sector dimension must be a power of two >= 2");
    return std::bit_width(u);  // log2(dim) + 1
}

}  // namespace

OperatorMatrix majorana_site_operator(int j, int n_sites) {
    check_site(j, n_sites);
    const std::int64_t dim = std::int64_t{1} << n_sites;
    const std::int64_t flip = std::int64_t{1} << (n_sites - j);
    const double lead = (j % 2 == 1) ? 1.0 : -1.0;  // (-1)^(j-1)

    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(dim));
    for (std::int64_t i = 0; i < dim; ++i) {
        // String sign: product of sigma^z over sites k < j, i.e. parity of
        // the down-spin count in the bits above the flipped one.
        const std::uint64_t prefix = static_cast<std::uint64_t>(i) >> (n_sites - j + 1);
        const double sign = std::popcount(prefix) % 2 == 0 ? lead : -lead;
        trips.emplace_back(i ^ flip, i, cplx(sign, 0.0));
    }

    OperatorMatrix op;
    op.rows = dim;
    op.cols = dim;
    op.mat.resize(dim, dim);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    op.hermitian = true;
    return op;
}

OperatorMatrix number_operator(int j, int n_sites) {
    check_site(j, n_sites);
    const std::int64_t dim = std::int64_t{1} << n_sites;
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(dim / 2));
    for (std::int64_t i = 0; i < dim; ++i) {
        const int bit = static_cast<int>((i >> (n_sites - j)) & 1);
        if (bit == 0) trips.emplace_back(i, i, cplx(1.0, 0.0));  // up = occupied
    }
    OperatorMatrix op;
    op.rows = dim;
    op.cols = dim;
    op.mat.resize(dim, dim);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    op.hermitian = true;
    return op;
}

SiteOperatorSet build_site_operators(SiteOperatorKind kind, int n_sites) {
    SiteOperatorSet set;
    set.kind = kind;
    set.per_site.reserve(static_cast<std::size_t>(n_sites));
    for (int j = 1; j <= n_sites; ++j)
        set.per_site.push_back(kind == SiteOperatorKind::MajoranaCoupling
                                   ? majorana_site_operator(j, n_sites)
                                   : number_operator(j, n_sites));
    return set;
}

cplx MatrixElementTable::value(int n, int m, int j) const {
    if (n < 1 || n > n_max || m < 1 || m > n_max)
        throw usage_error("matrix-element level index out of range");
    check_site(j, n_sites);
    return per_site[static_cast<std::size_t>(j - 1)](n - 1, m - 1);
}

MatrixElementTable dissipative_matrix_elements(const EigenSystem& even,
                                               const EigenSystem& odd, int n_max) {
    if (even.sector != ParitySector::Even || odd.sector != ParitySector::Odd)
        throw usage_error("dissipative elements need one even and one odd system");
    if (n_max < 1 || n_max > even.k_computed || n_max > odd.k_computed)
        throw usage_error("n_max exceeds the computed eigenpairs");
    const int n = sites_from_sector_dim(even.vectors.rows());
    if (odd.vectors.rows() != even.vectors.rows())
        throw usage_error("sector dimensions disagree");

    auto [even_basis, odd_basis] = build_sector_basis(n);
    const Eigen::MatrixXcd ve = even.vectors.leftCols(n_max);
    const Eigen::MatrixXcd vo = odd.vectors.leftCols(n_max);

    MatrixElementTable table;
    table.kind = TableKind::C;
    table.n_max = n_max;
    table.n_sites = n;
    table.per_site.reserve(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        OperatorMatrix full = majorana_site_operator(j, n);
        OperatorMatrix block = project_between_sectors(full, even_basis, odd_basis);
        table.per_site.emplace_back(ve.adjoint() * (block.mat * vo));
    }
    return table;
}

MatrixElementTable dephasing_matrix_elements(const EigenSystem& eigs, int n_max) {
    if (n_max < 1 || n_max > eigs.k_computed)
        throw usage_error("n_max exceeds the computed eigenpairs");
    const int n = sites_from_sector_dim(eigs.vectors.rows());
    auto [even_basis, odd_basis] = build_sector_basis(n);
    const SectorBasis& basis =
        eigs.sector == ParitySector::Even ? even_basis : odd_basis;
    const Eigen::MatrixXcd v = eigs.vectors.leftCols(n_max);

    MatrixElementTable table;
    table.kind = eigs.sector == ParitySector::Even ? TableKind::DEven : TableKind::DOdd;
    table.n_max = n_max;
    table.n_sites = n;
    table.per_site.reserve(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        // n_j is diagonal: scale the sector rows whose basis state has
        // site j occupied (bit 0 = up).
        Eigen::MatrixXcd scaled = Eigen::MatrixXcd::Zero(v.rows(), v.cols());
        for (Eigen::Index r = 0; r < basis.dim(); ++r) {
            const std::int64_t full_index = basis.indices[static_cast<std::size_t>(r)];
            const int bit = static_cast<int>((full_index >> (n - j)) & 1);
            if (bit == 0) scaled.row(r) = v.row(r);
        }
        table.per_site.emplace_back(v.adjoint() * scaled);
    }
    return table;
}

}  // namespace majb
