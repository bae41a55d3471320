#include "majb/chain_model.hpp"

#include <bit>
#include <cstdlib>
#include <string>
#include <vector>

namespace majb {

namespace {

int bit_of(std::int64_t index, int j, int n) {
    return static_cast<int>((index >> (n - j)) & 1);
}

// sigma^z eigenvalue at site j: +1 for bit 0 (up), -1 for bit 1 (down).
double zval(std::int64_t index, int j, int n) {
    return 1.0 - 2.0 * bit_of(index, j, n);
}

void check_capacity(int n_sites) {
    if (n_sites < 2)
        throw usage_error("n_sites must be at least 2, got " + std::to_string(n_sites));
    if (n_sites > max_sites())
        throw capacity_error("n_sites " + std::to_string(n_sites) +
                             " exceeds the configured maximum " +
                             std::to_string(max_sites()) +
                             " (override with MAJB_MAX_N)");
}

using Triplet = Eigen::Triplet<cplx>;

OperatorMatrix from_triplets(Eigen::Index dim, std::vector<Triplet>& trips, bool hermitian) {
    OperatorMatrix op;
    op.rows = dim;
    op.cols = dim;
    op.mat.resize(dim, dim);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    op.hermitian = hermitian;
    return op;
}

}  // namespace

void ChainParams::validate() const {
    check_capacity(n_sites);
    if (!(w > 0.0))
        throw usage_error("w must be positive (it is the energy unit), got " +
                          std::to_string(w));
    if (!std::isfinite(delta) || !std::isfinite(mu) || !std::isfinite(u))
        throw usage_error("couplings must be finite");
}

void BathSpec::validate() const {
    if (temperature < 0.0)
        throw usage_error("temperature must be >= 0");
    if (!(dos > 0.0))
        throw usage_error("density of states must be > 0");
    if (coupling < 0.0)
        throw usage_error("bath coupling must be >= 0");
}

int max_sites() {
    if (const char* env = std::getenv("MAJB_MAX_N")) {
        const int v = std::atoi(env);
        if (v >= 2 && v <= 30) return v;
    }
    return 20;
}

double OperatorMatrix::max_abs() const {
    double m = 0.0;
    for (int k = 0; k < mat.outerSize(); ++k)
        for (SparseOp::InnerIterator it(mat, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

double OperatorMatrix::hermiticity_defect() const {
    SparseOp diff = mat - SparseOp(mat.adjoint());
    double m = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseOp::InnerIterator it(diff, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

void OperatorMatrix::verify_hermitian() const {
    if (!hermitian) return;
    if (hermiticity_defect() > 1e-12 * std::max(max_abs(), 1e-300))
        throw symmetry_violation_error("operator flagged Hermitian has |A - A^dagger| above tolerance");
}

ParitySector parity_of_basis_index(std::int64_t index, int n_sites) {
    check_capacity(n_sites);
    if (index < 0 || index >= (std::int64_t{1} << n_sites))
        throw usage_error("basis index " + std::to_string(index) +
                          " out of range for N = " + std::to_string(n_sites));
    const int downs = std::popcount(static_cast<std::uint64_t>(index));
    return downs % 2 == 0 ? ParitySector::Even : ParitySector::Odd;
}

std::pair<SectorBasis, SectorBasis> build_sector_basis(int n_sites) {
    check_capacity(n_sites);
    const std::int64_t dim = std::int64_t{1} << n_sites;
    SectorBasis even{ParitySector::Even, {}};
    SectorBasis odd{ParitySector::Odd, {}};
    even.indices.reserve(static_cast<std::size_t>(dim / 2));
    odd.indices.reserve(static_cast<std::size_t>(dim / 2));
    for (std::int64_t i = 0; i < dim; ++i) {
        if (std::popcount(static_cast<std::uint64_t>(i)) % 2 == 0)
            even.indices.push_back(i);
        else
            odd.indices.push_back(i);
    }
    return {std::move(even), std::move(odd)};
}

OperatorMatrix build_hamiltonian(const ChainParams& p) {
    p.validate();
    const int n = p.n_sites;
    const std::int64_t dim = std::int64_t{1} << n;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(dim) * (n + 1));

    for (std::int64_t i = 0; i < dim; ++i) {
        double diag = 0.0;
        for (int j = 1; j <= n; ++j) diag += -(p.mu / 2.0) * zval(i, j, n);
        for (int j = 1; j < n; ++j) diag += (p.u / 4.0) * zval(i, j, n) * zval(i, j + 1, n);
        if (diag != 0.0) trips.emplace_back(i, i, cplx(diag, 0.0));

        for (int j = 1; j < n; ++j) {
            const int b1 = bit_of(i, j, n);
            const int b2 = bit_of(i, j + 1, n);
            // s+s- + s-s+ flips an up/down bond pair; s+s+ + s-s- flips an
            // aligned pair. Both land on i with bits j, j+1 toggled.
            const std::int64_t flipped =
                i ^ ((std::int64_t{1} << (n - j)) | (std::int64_t{1} << (n - j - 1)));
            const double amp = (b1 != b2) ? p.w : p.delta;
            if (amp != 0.0) trips.emplace_back(flipped, i, cplx(amp, 0.0));
        }
    }
    return from_triplets(dim, trips, true);
}

OperatorMatrix build_hamiltonian_xyz(const ChainParams& p) {
    p.validate();
    const int n = p.n_sites;
    const std::int64_t dim = std::int64_t{1} << n;
    const double jx = (p.w + p.delta) / 2.0;
    const double jy = (p.w - p.delta) / 2.0;
    const double jz = p.u / 4.0;
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(dim) * (n + 1));

    for (std::int64_t i = 0; i < dim; ++i) {
        double diag = 0.0;
        for (int j = 1; j <= n; ++j) diag += -(p.mu / 2.0) * zval(i, j, n);
        for (int j = 1; j < n; ++j) diag += jz * zval(i, j, n) * zval(i, j + 1, n);
        if (diag != 0.0) trips.emplace_back(i, i, cplx(diag, 0.0));

        for (int j = 1; j < n; ++j) {
            const std::int64_t flipped =
                i ^ ((std::int64_t{1} << (n - j)) | (std::int64_t{1} << (n - j - 1)));
            // sigma^x sigma^x contributes jx on any double flip; sigma^y
            // sigma^y contributes -jy on aligned pairs and +jy otherwise.
            const bool aligned = bit_of(i, j, n) == bit_of(i, j + 1, n);
            const double amp = aligned ? jx - jy : jx + jy;
            if (amp != 0.0) trips.emplace_back(flipped, i, cplx(amp, 0.0));
        }
    }
    return from_triplets(dim, trips, true);
}

OperatorMatrix project_between_sectors(const OperatorMatrix& op,
                                       const SectorBasis& rows,
                                       const SectorBasis& cols) {
    std::vector<Eigen::Index> row_of(static_cast<std::size_t>(op.rows), -1);
    std::vector<Eigen::Index> col_of(static_cast<std::size_t>(op.cols), -1);
    for (Eigen::Index r = 0; r < rows.dim(); ++r)
        row_of[static_cast<std::size_t>(rows.indices[static_cast<std::size_t>(r)])] = r;
    for (Eigen::Index c = 0; c < cols.dim(); ++c)
        col_of[static_cast<std::size_t>(cols.indices[static_cast<std::size_t>(c)])] = c;

    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(op.mat.nonZeros()));
    for (int k = 0; k < op.mat.outerSize(); ++k) {
        for (SparseOp::InnerIterator it(op.mat, k); it; ++it) {
            const Eigen::Index r = row_of[static_cast<std::size_t>(it.row())];
            const Eigen::Index c = col_of[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
        }
    }
    OperatorMatrix out;
    out.rows = rows.dim();
    out.cols = cols.dim();
    out.mat.resize(rows.dim(), cols.dim());
    out.mat.setFromTriplets(trips.begin(), trips.end());
    out.mat.makeCompressed();
    out.hermitian = false;
    return out;
}

OperatorMatrix project_to_sector(const OperatorMatrix& op, const SectorBasis& basis) {
    if (op.rows != op.cols)
        throw usage_error("project_to_sector requires a square operator");
    std::vector<signed char> in_sector(static_cast<std::size_t>(op.rows), 0);
    for (std::int64_t i : basis.indices) in_sector[static_cast<std::size_t>(i)] = 1;

    // Off-block weight between the sector and its complement must vanish
    // when the caller treats the operator as parity-symmetric.
    double off = 0.0;
    for (int k = 0; k < op.mat.outerSize(); ++k)
        for (SparseOp::InnerIterator it(op.mat, k); it; ++it)
            if (in_sector[static_cast<std::size_t>(it.row())] !=
                in_sector[static_cast<std::size_t>(it.col())])
                off = std::max(off, std::abs(it.value()));
    if (off > 1e-12 * std::max(op.max_abs(), 1e-300))
        throw symmetry_violation_error(
            "operator is not block-diagonal over the parity split (off-block max " +
            std::to_string(off) + ")");

    OperatorMatrix out = project_between_sectors(op, basis, basis);
    out.hermitian = op.hermitian;
    return out;
}

}  // namespace majb
