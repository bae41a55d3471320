#include "majb/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "majb/kernels.hpp"

namespace majb {

namespace {

constexpr Eigen::Index dense_threshold = 4096;

// Largest-magnitude coordinate made real positive; first index wins ties.
// Returns that index so degenerate clusters can be ordered by it.
Eigen::Index phase_fix(Eigen::VectorXcd& v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    if (best > 0.0) v *= std::conj(v[arg]) / best;
    return arg;
}

void fix_gauge_and_ties(Eigen::VectorXd& values, Eigen::MatrixXcd& vectors, double energy_unit) {
    const Eigen::Index k = values.size();
    std::vector<Eigen::Index> anchor(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::VectorXcd col = vectors.col(i);
        anchor[static_cast<std::size_t>(i)] = phase_fix(col);
        vectors.col(i) = col;
    }
    // Within a near-degenerate cluster, order the vectors by their
    // fixed-gauge anchor index for a reproducible layout. The energy slots
    // keep the solver's ascending order: inside the cluster width the
    // value-vector pairing is arbitrary, and reordering the energies too
    // would leak solver noise into the ascending contract.
    const double cluster_tol = 1e-10 * energy_unit;
    Eigen::Index lo = 0;
    while (lo < k) {
        Eigen::Index hi = lo + 1;
        while (hi < k && values[hi] - values[hi - 1] <= cluster_tol) ++hi;
        if (hi - lo > 1) {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = lo; i < hi; ++i) idx.push_back(i);
            std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
                return anchor[static_cast<std::size_t>(a)] < anchor[static_cast<std::size_t>(b)];
            });
            Eigen::MatrixXcd tmp_vecs(vectors.rows(), hi - lo);
            for (Eigen::Index i = 0; i < hi - lo; ++i)
                tmp_vecs.col(i) = vectors.col(idx[static_cast<std::size_t>(i)]);
            vectors.middleCols(lo, hi - lo) = tmp_vecs;
        }
        lo = hi;
    }
}

void verify_residuals(const OperatorMatrix& h, const Eigen::VectorXd& values,
                      const Eigen::MatrixXcd& vectors, double energy_unit) {
    const double tol = 1e-9 * energy_unit;
    double worst = 0.0;
    Eigen::VectorXcd hv(h.rows);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Eigen::VectorXcd v = vectors.col(i);
        kernels::spmv(h.mat, v, hv);
        worst = std::max(worst, (hv - values[i] * v).norm());
    }
    if (worst > tol)
        throw solver_error("eigenpair residual " + std::to_string(worst) +
                               " exceeds the target " + std::to_string(tol),
                           worst);
}

}  // namespace

EigenSystem diagonalize_sector(const OperatorMatrix& h_block, ParitySector sector,
                               Eigen::Index k, SolverChoice choice, double energy_unit) {
    if (h_block.rows != h_block.cols)
        throw usage_error("sector block must be square");
    if (!h_block.hermitian)
        throw usage_error("sector block must be flagged Hermitian");
    const Eigen::Index dim = h_block.rows;
    if (k < 1 || k > dim)
        throw usage_error("k must lie in [1, " + std::to_string(dim) + "], got " +
                          std::to_string(k));

    const bool dense = choice == SolverChoice::Dense ||
                       (choice == SolverChoice::Auto && dim <= dense_threshold);
    if (choice == SolverChoice::Dense && dim > dense_threshold)
        throw usage_error("dense solver limited to dimension 4096, block has " +
                          std::to_string(dim));

    EigenSystem out;
    out.sector = sector;

    if (dense) {
        Eigen::MatrixXcd full(h_block.mat);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(full);
        if (es.info() != Eigen::Success)
            throw solver_error("dense eigensolver failed to converge",
                               std::numeric_limits<double>::quiet_NaN());
        out.energies = es.eigenvalues();
        out.vectors = es.eigenvectors();
        out.k_computed = dim;
        out.solver = SolverKind::Dense;
    } else {
        LanczosOptions opt;
        opt.tol = 1e-9 * energy_unit;
        LanczosResult res = lanczos_lowest(h_block.mat, k, opt);
        out.energies = res.values;
        out.vectors = res.vectors;
        out.k_computed = k;
        out.solver = SolverKind::Iterative;
    }

    fix_gauge_and_ties(out.energies, out.vectors, energy_unit);
    verify_residuals(h_block, out.energies, out.vectors, energy_unit);
    return out;
}

double ground_gap(const EigenSystem& even, const EigenSystem& odd) {
    if (even.k_computed < 1 || odd.k_computed < 1)
        throw usage_error("ground_gap needs at least one pair per sector");
    return std::abs(even.energies[0] - odd.energies[0]);
}

std::vector<SizeGap> gap_vs_size(const ChainParams& params_template,
                                 const std::vector<int>& sizes, SolverChoice choice) {
    std::vector<SizeGap> out;
    out.reserve(sizes.size());
    for (int n : sizes) {
        ChainParams p = params_template;
        p.n_sites = n;
        OperatorMatrix h = build_hamiltonian(p);
        auto [even_basis, odd_basis] = build_sector_basis(n);
        OperatorMatrix he = project_to_sector(h, even_basis);
        OperatorMatrix ho = project_to_sector(h, odd_basis);
        const Eigen::Index k = std::min<Eigen::Index>(2, he.rows);
        EigenSystem ee = diagonalize_sector(he, ParitySector::Even, k, choice, p.w);
        EigenSystem eo = diagonalize_sector(ho, ParitySector::Odd, k, choice, p.w);
        out.push_back({n, ground_gap(ee, eo)});
    }
    return out;
}

TransitionTable transition_frequencies(const EigenSystem& even, const EigenSystem& odd,
                                       TransitionKind kind, int n_max) {
    TransitionTable table;
    table.kind = kind;
    if (n_max < 1) throw usage_error("n_max must be >= 1");

    if (kind == TransitionKind::CrossParity) {
        if (n_max > even.k_computed || n_max > odd.k_computed)
            throw usage_error("n_max exceeds computed pairs in a sector");
        table.entries.push_back({1, 1, std::abs(even.energies[0] - odd.energies[0])});
        for (int n = 2; n <= n_max; ++n) {
            table.entries.push_back({1, n, std::abs(even.energies[0] - odd.energies[n - 1])});
            table.entries.push_back({n, 1, std::abs(even.energies[n - 1] - odd.energies[0])});
        }
        return table;
    }

    const EigenSystem& sys = kind == TransitionKind::SameParityEven ? even : odd;
    if (n_max > sys.k_computed)
        throw usage_error("n_max exceeds computed pairs in the sector");
    for (int n = 2; n <= n_max; ++n)
        table.entries.push_back({1, n, std::abs(sys.energies[0] - sys.energies[n - 1])});
    return table;
}

std::vector<TransitionCollision> detect_degenerate_transitions(const TransitionTable& table,
                                                               double tol) {
    if (!(tol > 0.0)) throw usage_error("tolerance must be positive");
    std::vector<TransitionCollision> out;
    for (std::size_t i = 0; i < table.entries.size(); ++i)
        for (std::size_t j = i + 1; j < table.entries.size(); ++j) {
            const double sep = std::abs(table.entries[i].frequency - table.entries[j].frequency);
            if (sep < tol) out.push_back({i, j, sep});
        }
    return out;
}

}  // namespace majb
