#pragma once

#include <cstddef>

#include "majb/types.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace majb::kernels {

// Deterministic compute primitives. Every parallel variant produces output
// bit-identical to its serial reference for any thread count: rows are
// independent in spmv, and reductions accumulate fixed-size chunk partials
// in chunk order.

inline constexpr Eigen::Index dot_chunk = 1024;

inline void spmv_serial(const SparseOp& a, const cplx* x, cplx* y) {
    const auto* outer = a.outerIndexPtr();
    const auto* inner = a.innerIndexPtr();
    const auto* vals = a.valuePtr();
    const Eigen::Index n = a.rows();
    for (Eigen::Index r = 0; r < n; ++r) {
        cplx acc(0.0, 0.0);
        for (auto p = outer[r]; p < outer[r + 1]; ++p)
            acc += vals[p] * x[inner[p]];
        y[r] = acc;
    }
}

inline void spmv_parallel(const SparseOp& a, const cplx* x, cplx* y) {
    const auto* outer = a.outerIndexPtr();
    const auto* inner = a.innerIndexPtr();
    const auto* vals = a.valuePtr();
    const Eigen::Index n = a.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < n; ++r) {
        cplx acc(0.0, 0.0);
        for (auto p = outer[r]; p < outer[r + 1]; ++p)
            acc += vals[p] * x[inner[p]];
        y[r] = acc;
    }
}

inline void spmv(const SparseOp& a, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y.resize(a.rows());
#ifdef _OPENMP
    if (a.rows() >= 2048 && omp_get_max_threads() > 1) {
        spmv_parallel(a, x.data(), y.data());
        return;
    }
#endif
    spmv_serial(a, x.data(), y.data());
}

// <x|y> accumulated over fixed chunks; the chunk partials are summed in
// order on one thread, so the result does not depend on the thread count.
inline cplx dot_serial(const cplx* x, const cplx* y, Eigen::Index n) {
    cplx total(0.0, 0.0);
    for (Eigen::Index c0 = 0; c0 < n; c0 += dot_chunk) {
        const Eigen::Index c1 = c0 + dot_chunk < n ? c0 + dot_chunk : n;
        cplx part(0.0, 0.0);
        for (Eigen::Index i = c0; i < c1; ++i)
            part += std::conj(x[i]) * y[i];
        total += part;
    }
    return total;
}

inline cplx dot_parallel(const cplx* x, const cplx* y, Eigen::Index n) {
    const Eigen::Index nchunks = (n + dot_chunk - 1) / dot_chunk;
    std::vector<cplx> parts(static_cast<std::size_t>(nchunks), cplx(0.0, 0.0));
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < nchunks; ++c) {
        const Eigen::Index c0 = c * dot_chunk;
        const Eigen::Index c1 = c0 + dot_chunk < n ? c0 + dot_chunk : n;
        cplx part(0.0, 0.0);
        for (Eigen::Index i = c0; i < c1; ++i)
            part += std::conj(x[i]) * y[i];
        parts[static_cast<std::size_t>(c)] = part;
    }
    cplx total(0.0, 0.0);
    for (const cplx& p : parts) total += p;
    return total;
}

inline cplx dot(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) {
#ifdef _OPENMP
    if (x.size() >= 8192 && omp_get_max_threads() > 1)
        return dot_parallel(x.data(), y.data(), x.size());
#endif
    return dot_serial(x.data(), y.data(), x.size());
}

inline double norm(const Eigen::VectorXcd& x) {
    return std::sqrt(dot(x, x).real());
}

}  // namespace majb::kernels
