#include "majb/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "majb/kernels.hpp"

namespace majb {

namespace {

// splitmix64; bit-stable everywhere, unlike <random> distributions.
std::uint64_t next_u64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a2f49b5e54dULL;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t& state) {
    return static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

Eigen::VectorXcd random_vector(Eigen::Index dim, std::uint64_t seed) {
    std::uint64_t state = seed;
    Eigen::VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double re = unit_double(state);
        const double im = unit_double(state);
        v[i] = cplx(re, im);
    }
    return v;
}

void orthogonalize(Eigen::VectorXcd& w, const std::vector<Eigen::VectorXcd>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const Eigen::VectorXcd& b : basis)
            w -= kernels::dot(b, w) * b;
}

struct TridiagEigs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

TridiagEigs solve_tridiag(const std::vector<double>& alpha, const std::vector<double>& beta,
                          Eigen::Index m) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
            t(i, i + 1) = beta[static_cast<std::size_t>(i)];
            t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

LanczosResult lanczos_lowest(const SparseOp& a, Eigen::Index k, const LanczosOptions& opt) {
    const Eigen::Index dim = a.rows();
    if (k < 1 || k > dim)
        throw usage_error("requested eigenpair count must lie in [1, dim]");

    const long budget = opt.budget_per_pair * static_cast<long>(k);
    long matvecs = 0;
    // Until a Ritz pair has been tested there is no convergence estimate;
    // infinity keeps the reported residual conservative in that case.
    double blocking_residual = std::numeric_limits<double>::infinity();

    std::vector<Eigen::VectorXcd> locked;
    std::vector<double> locked_vals;
    locked.reserve(static_cast<std::size_t>(k));

    auto spmv_counted = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
        if (matvecs >= budget) {
            std::string msg = "eigensolver exhausted its matvec budget (" +
                              std::to_string(budget) + " applications)";
            if (std::isfinite(blocking_residual))
                msg += "; residual of the blocking pair: " + std::to_string(blocking_residual);
            throw solver_error(msg, blocking_residual);
        }
        kernels::spmv(a, x, y);
        ++matvecs;
    };

    // Norm scale for breakdown detection, from the infinity norm.
    double scale = 0.0;
    for (int kk = 0; kk < a.outerSize(); ++kk) {
        double row = 0.0;
        for (SparseOp::InnerIterator it(a, kk); it; ++it) row += std::abs(it.value());
        scale = std::max(scale, row);
    }
    if (scale == 0.0) scale = 1.0;
    const double breakdown_tol = 1e-13 * scale;

    const Eigen::Index m_max =
        std::min<Eigen::Index>(dim, std::max<Eigen::Index>(opt.max_basis, 2 * k + 10));

    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(static_cast<std::size_t>(m_max));
    std::vector<double> alpha, beta;

    // Re-orthogonalized copy of a converged Ritz vector joins the locked
    // set unless it is already represented there.
    auto lock_pair = [&](const Eigen::VectorXcd& y, double theta) {
        Eigen::VectorXcd v = y;
        orthogonalize(v, locked);
        const double nrm = kernels::norm(v);
        if (nrm < 1e-8) return false;
        v /= nrm;
        locked.push_back(std::move(v));
        locked_vals.push_back(theta);
        return true;
    };

    std::uint64_t restart_counter = 0;
    Eigen::VectorXcd start;
    bool have_start = false;
    int stagnant_cycles = 0;

    while (static_cast<Eigen::Index>(locked.size()) < k) {
        if (!have_start) {
            double nrm = 0.0;
            while (nrm < 1e-8) {
                start = random_vector(dim, opt.seed + 0x100 * ++restart_counter);
                orthogonalize(start, locked);
                nrm = kernels::norm(start);
            }
            start /= nrm;
        }
        have_start = false;

        basis.clear();
        alpha.clear();
        beta.clear();
        basis.push_back(start);

        bool locked_this_cycle = false;
        Eigen::VectorXcd w(dim);

        for (Eigen::Index j = 0; j < m_max; ++j) {
            spmv_counted(basis[static_cast<std::size_t>(j)], w);
            if (j > 0)
                w -= beta[static_cast<std::size_t>(j - 1)] * basis[static_cast<std::size_t>(j - 1)];
            const double aj = kernels::dot(basis[static_cast<std::size_t>(j)], w).real();
            alpha.push_back(aj);
            w -= aj * basis[static_cast<std::size_t>(j)];
            orthogonalize(w, locked);
            orthogonalize(w, basis);
            const double bj = kernels::norm(w);

            const Eigen::Index m = j + 1;
            const Eigen::Index remaining = k - static_cast<Eigen::Index>(locked.size());
            const bool breakdown = bj < breakdown_tol;
            const bool checkpoint =
                breakdown || m == m_max || (m % 16 == 0 && m >= 2 * remaining);

            if (!checkpoint) {
                beta.push_back(bj);
                basis.push_back(w / bj);
                continue;
            }

            TridiagEigs te = solve_tridiag(alpha, beta, m);

            // Lock the converged leading prefix of the Ritz spectrum, so
            // pairs always arrive lowest-first.
            for (Eigen::Index i = 0; i < m && static_cast<Eigen::Index>(locked.size()) < k; ++i) {
                const double est = breakdown ? 0.0 : std::abs(bj * te.vectors(m - 1, i));
                if (est > opt.tol) {
                    blocking_residual = est;
                    break;
                }
                Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
                for (Eigen::Index q = 0; q < m; ++q)
                    y += te.vectors(q, i) * basis[static_cast<std::size_t>(q)];
                const double ynrm = kernels::norm(y);
                if (ynrm < 1e-8) continue;
                y /= ynrm;
                Eigen::VectorXcd ay(dim);
                spmv_counted(y, ay);
                const double theta = kernels::dot(y, ay).real();
                const double res = (ay - theta * y).norm();
                if (res > opt.tol) {
                    blocking_residual = res;
                    break;
                }
                if (lock_pair(y, theta)) locked_this_cycle = true;
            }

            if (static_cast<Eigen::Index>(locked.size()) >= k) break;

            if (locked_this_cycle || breakdown) {
                // Restart so the three-term recurrence stays consistent
                // with the deflated operator; resume from the lowest
                // unconverged Ritz direction when one survives.
                for (Eigen::Index i = 0; i < m; ++i) {
                    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
                    for (Eigen::Index q = 0; q < m; ++q)
                        y += te.vectors(q, i) * basis[static_cast<std::size_t>(q)];
                    orthogonalize(y, locked);
                    const double ynrm = kernels::norm(y);
                    if (ynrm > 1e-8) {
                        start = y / ynrm;
                        have_start = true;
                        break;
                    }
                }
                stagnant_cycles = 0;
                break;
            }

            if (m == m_max) {
                ++stagnant_cycles;
                Eigen::VectorXcd y = Eigen::VectorXcd::Zero(dim);
                for (Eigen::Index q = 0; q < m; ++q)
                    y += te.vectors(q, 0) * basis[static_cast<std::size_t>(q)];
                orthogonalize(y, locked);
                double ynrm = kernels::norm(y);
                if (ynrm > 1e-8) {
                    y /= ynrm;
                    if (stagnant_cycles >= 2) {
                        // Two full cycles without progress: shake the
                        // iteration with fresh randomness.
                        Eigen::VectorXcd r =
                            random_vector(dim, opt.seed + 0x100 * ++restart_counter);
                        orthogonalize(r, locked);
                        y += 0.05 * r;
                        orthogonalize(y, locked);
                        ynrm = kernels::norm(y);
                        if (ynrm < 1e-8) break;
                        y /= ynrm;
                    }
                    start = y;
                    have_start = true;
                }
                break;
            }

            beta.push_back(bj);
            basis.push_back(w / bj);
        }
    }

    std::vector<Eigen::Index> order(locked.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return locked_vals[static_cast<std::size_t>(x)] < locked_vals[static_cast<std::size_t>(y)];
    });

    LanczosResult out;
    out.values.resize(k);
    out.vectors.resize(dim, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        out.values[i] = locked_vals[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        out.vectors.col(i) = locked[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }
    out.matvecs = matvecs;
    return out;
}

}  // namespace majb
