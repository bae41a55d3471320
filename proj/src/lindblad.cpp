#include "majb/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <Eigen/Eigenvalues>

namespace majb {

namespace {

std::string level_name(const LevelRef& level) {
    return std::string(level.sector == ParitySector::Even ? "e" : "o") +
           std::to_string(level.index);
}

void format_real(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

int TruncatedModel::find_level(ParitySector sector, int index) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i].sector == sector && levels[i].index == index)
            return static_cast<int>(i);
    return -1;
}

void DensityMatrix::verify(double time) const {
    const double herm = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10)
        throw integration_error("density matrix lost Hermiticity (defect " +
                                    std::to_string(herm) + ")",
                                time);
    if (std::abs(trace_real() - 1.0) > 1e-9)
        throw integration_error("density matrix trace drifted to " +
                                    std::to_string(trace_real()),
                                time);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw integration_error("density matrix lost positivity (lowest eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()) + ")",
                                time);
}

DensityMatrix DensityMatrix::pure_level(int level, int count) {
    if (level < 0 || level >= count) throw usage_error("initial level out of range");
    DensityMatrix rho;
    rho.entries = Eigen::MatrixXcd::Zero(count, count);
    rho.entries(level, level) = 1.0;
    return rho;
}

TruncatedModel build_truncated_model(const std::vector<DecoherenceReport>& reports,
                                     const EigenSystem& even, const EigenSystem& odd,
                                     int level_budget) {
    if (level_budget < 2) throw usage_error("level budget must be >= 2");
    if (level_budget > even.k_computed + odd.k_computed)
        throw usage_error("level budget exceeds the computed eigenpairs");

    // Merge the sector spectra and keep the lowest level_budget states;
    // on an exact tie the even state precedes the odd one.
    std::vector<LevelRef> merged;
    for (Eigen::Index i = 0; i < even.k_computed; ++i)
        merged.push_back({ParitySector::Even, static_cast<int>(i) + 1, even.energies[i]});
    for (Eigen::Index i = 0; i < odd.k_computed; ++i)
        merged.push_back({ParitySector::Odd, static_cast<int>(i) + 1, odd.energies[i]});
    std::stable_sort(merged.begin(), merged.end(), [](const LevelRef& a, const LevelRef& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        if (a.sector != b.sector) return a.sector == ParitySector::Even;
        return a.index < b.index;
    });
    merged.resize(static_cast<std::size_t>(level_budget));

    TruncatedModel model;
    model.levels = std::move(merged);

    for (const DecoherenceReport& report : reports) {
        for (const RateChannel& ch : report.channels) {
            // The channel's downward rate flows from the (n) endpoint to
            // the (m) endpoint; the signed frequency already entered the
            // occupation factors, so no reordering happens here.
            int a, b;
            if (report.noise == NoiseKind::Dissipation) {
                a = model.find_level(ParitySector::Even, ch.n);
                b = model.find_level(ParitySector::Odd, ch.m);
            } else {
                if (!report.sector)
                    throw usage_error("dephasing report is missing its sector tag");
                a = model.find_level(*report.sector, ch.n);
                b = model.find_level(*report.sector, ch.m);
            }
            if (a < 0 || b < 0) continue;
            if (ch.downward > 0.0) model.channels.push_back({a, b, ch.downward});
            if (ch.upward > 0.0) model.channels.push_back({b, a, ch.upward});
        }
    }
    return model;
}

Eigen::MatrixXcd apply_lindblad_generator(const TruncatedModel& model,
                                          const DensityMatrix& rho) {
    const int count = model.level_count();
    if (rho.dim() != count)
        throw usage_error("density matrix dimension does not match the model");

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(count, count);

    // Unitary part: H is diagonal in the truncated eigenbasis.
    for (int a = 0; a < count; ++a)
        for (int b = 0; b < count; ++b) {
            const double freq = model.levels[static_cast<std::size_t>(a)].energy -
                                model.levels[static_cast<std::size_t>(b)].energy;
            d(a, b) = cplx(0.0, -freq) * rho.entries(a, b);
        }

    // Channels: s = |to><from| gives s rho s^dag = rho_ff |to><to| and
    // s^dag s = |from><from|.
    for (const JumpChannel& ch : model.channels) {
        const int f = ch.from;
        const int t = ch.to;
        d(t, t) += ch.rate * rho.entries(f, f);
        d.row(f) -= 0.5 * ch.rate * rho.entries.row(f);
        d.col(f) -= 0.5 * ch.rate * rho.entries.col(f);
    }
    return d;
}

std::vector<TrajectoryPoint> evolve(const TruncatedModel& model, const DensityMatrix& rho0,
                                    double t_final, double dt) {
    if (!(dt > 0.0)) throw usage_error("dt must be positive");
    if (!(t_final >= 0.0)) throw usage_error("t_final must be >= 0");
    rho0.verify(0.0);

    std::vector<TrajectoryPoint> out;
    const long steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back({0.0, rho0});

    DensityMatrix rho = rho0;
    for (long s = 1; s <= steps; ++s) {
        const Eigen::MatrixXcd k1 = apply_lindblad_generator(model, rho);
        DensityMatrix tmp;
        tmp.entries = rho.entries + 0.5 * dt * k1;
        const Eigen::MatrixXcd k2 = apply_lindblad_generator(model, tmp);
        tmp.entries = rho.entries + 0.5 * dt * k2;
        const Eigen::MatrixXcd k3 = apply_lindblad_generator(model, tmp);
        tmp.entries = rho.entries + dt * k3;
        const Eigen::MatrixXcd k4 = apply_lindblad_generator(model, tmp);
        rho.entries += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double t = static_cast<double>(s) * dt;
        rho.verify(t);
        out.push_back({t, rho});
    }
    return out;
}

DensityMatrix steady_state(const TruncatedModel& model) {
    const int count = model.level_count();
    std::vector<int> all_levels(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) all_levels[static_cast<std::size_t>(i)] = i;

    if (model.channels.empty())
        throw multiplicity_error(
            "model has no jump channels; every diagonal state is stationary", all_levels);

    // Population dynamics close on themselves: dP/dt = R P.
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(count, count);
    for (const JumpChannel& ch : model.channels) {
        r(ch.to, ch.from) += ch.rate;
        r(ch.from, ch.from) -= ch.rate;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double scale = std::max(sv.size() > 0 ? sv[0] : 0.0, 1e-300);
    int kernel_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] <= 1e-12 * scale) ++kernel_dim;

    if (kernel_dim != 1) {
        // Union of the kernel basis supports: the level set over which
        // stationary populations can be distributed freely.
        std::vector<int> support;
        for (Eigen::Index c = sv.size() - kernel_dim; c < sv.size(); ++c)
            for (int i = 0; i < count; ++i)
                if (std::abs(svd.matrixV()(i, c)) > 1e-8) support.push_back(i);
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        throw multiplicity_error("steady state is not unique (stationary subspace dimension " +
                                     std::to_string(kernel_dim) + ")",
                                 support);
    }

    Eigen::VectorXd p = svd.matrixV().col(sv.size() - 1);
    if (p.sum() < 0.0) p = -p;
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = std::max(p[i], 0.0);
    const double total = p.sum();
    if (total <= 0.0)
        throw solver_error("population null vector degenerated to zero",
                           std::numeric_limits<double>::quiet_NaN());
    p /= total;

    DensityMatrix rho;
    rho.entries = Eigen::MatrixXcd::Zero(count, count);
    for (int i = 0; i < count; ++i) rho.entries(i, i) = p[i];

    const double residual = apply_lindblad_generator(model, rho).cwiseAbs().maxCoeff();
    if (residual > 1e-10)
        throw solver_error("steady-state generator residual " + std::to_string(residual),
                           residual);
    return rho;
}

void export_trajectory(const std::vector<TrajectoryPoint>& trajectory,
                       const TruncatedModel& model, const std::string& path, int stride) {
    if (stride < 1) throw usage_error("stride must be >= 1");
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");

    const int count = model.level_count();
    std::string line = "t";
    for (const LevelRef& level : model.levels) line += ",pop_" + level_name(level);
    for (int a = 0; a < count; ++a)
        for (int b = a + 1; b < count; ++b)
            line += ",coh_" + level_name(model.levels[static_cast<std::size_t>(a)]) + "_" +
                    level_name(model.levels[static_cast<std::size_t>(b)]);
    out << line << "\r\n";

    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (i % static_cast<std::size_t>(stride) != 0 && i + 1 != trajectory.size()) continue;
        line.clear();
        format_real(line, trajectory[i].t);
        for (int a = 0; a < count; ++a) {
            line += ',';
            format_real(line, trajectory[i].rho.entries(a, a).real());
        }
        for (int a = 0; a < count; ++a)
            for (int b = a + 1; b < count; ++b) {
                line += ',';
                format_real(line, std::abs(trajectory[i].rho.entries(a, b)));
            }
        out << line << "\r\n";
    }
    if (!out) throw io_error("write failed for " + path);
}

}  // namespace majb
