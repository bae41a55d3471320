#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "majb/chain_model.hpp"
#include "majb/decoherence.hpp"
#include "majb/errors.hpp"
#include "majb/lindblad.hpp"
#include "majb/spectra.hpp"
#include "test_support.hpp"

using majb::BathSpec;
using majb::BathStatistics;
using majb::ChainParams;
using majb::cplx;
using majb::DensityMatrix;
using majb::NoiseKind;
using majb::ParitySector;
using majb::TruncatedModel;

namespace {

struct SolvedPoint {
    majb::EigenSystem even, odd;
};

SolvedPoint solve(const ChainParams& p, Eigen::Index k) {
    const auto h = majb::build_hamiltonian(p);
    auto [eb, ob] = majb::build_sector_basis(p.n_sites);
    return {majb::diagonalize_sector(majb::project_to_sector(h, eb), ParitySector::Even, k),
            majb::diagonalize_sector(majb::project_to_sector(h, ob), ParitySector::Odd, k)};
}

TruncatedModel model_for(const ChainParams& p, NoiseKind noise, double temperature,
                         int budget, int n_max) {
    const auto point = solve(p, n_max);
    BathSpec bath;
    bath.statistics = majb::statistics_for(noise);
    bath.coupling = 0.4;
    bath.temperature = temperature;
    bath.dos = 1.0;
    const auto reports = majb::full_reports(point.even, point.odd, bath, noise, n_max);
    return majb::build_truncated_model(reports, point.even, point.odd, budget);
}

// Two bare levels at the given splitting joined by one decay channel.
TruncatedModel two_level(double splitting, double down_rate, double up_rate) {
    TruncatedModel m;
    m.levels = {{ParitySector::Even, 1, 0.0}, {ParitySector::Odd, 1, splitting}};
    if (down_rate > 0.0) m.channels.push_back({1, 0, down_rate});
    if (up_rate > 0.0) m.channels.push_back({0, 1, up_rate});
    return m;
}

DensityMatrix equal_superposition() {
    DensityMatrix rho;
    rho.entries = Eigen::MatrixXcd::Constant(2, 2, cplx(0.5, 0.0));
    return rho;
}

}  // namespace

TEST_CASE("pure states pass the density-matrix invariants") {
    const auto rho = DensityMatrix::pure_level(2, 4);
    CHECK(rho.dim() == 4);
    CHECK(rho.trace_real() == doctest::Approx(1.0));
    CHECK(rho.entries(2, 2) == cplx(1, 0));
    CHECK_NOTHROW(rho.verify(0.0));
}

TEST_CASE("invariant violations carry the offending time") {
    DensityMatrix bad;
    bad.entries = Eigen::MatrixXcd::Zero(2, 2);
    bad.entries(0, 0) = cplx(0.9, 0.0);  // trace short of one
    try {
        bad.verify(1.25);
        FAIL("expected an integration error");
    } catch (const majb::integration_error& e) {
        CHECK(e.time == 1.25);
    }

    DensityMatrix skew;
    skew.entries = Eigen::MatrixXcd::Identity(2, 2) * cplx(0.5, 0.0);
    skew.entries(0, 1) = cplx(0.3, 0.0);  // missing conjugate partner
    CHECK_THROWS_AS(skew.verify(0.0), majb::integration_error);

    DensityMatrix negative;
    negative.entries = Eigen::MatrixXcd::Zero(2, 2);
    negative.entries(0, 0) = cplx(1.5, 0.0);
    negative.entries(1, 1) = cplx(-0.5, 0.0);
    CHECK_THROWS_AS(negative.verify(0.0), majb::integration_error);
}

TEST_CASE("level lookup reports retained positions") {
    const auto m = two_level(1.0, 0.5, 0.0);
    CHECK(m.level_count() == 2);
    CHECK(m.find_level(ParitySector::Even, 1) == 0);
    CHECK(m.find_level(ParitySector::Odd, 1) == 1);
    CHECK(m.find_level(ParitySector::Even, 2) == -1);
}

TEST_CASE("degenerate ground pair keeps no channels at zero temperature") {
    // Exactly decoupled edge modes: the cross-parity ground transition sits
    // at zero frequency and is routed to the low-frequency treatment.
    const auto m = model_for(ChainParams{6, 1.0, 1.0, 0.0, 0.0}, NoiseKind::Dissipation,
                             0.0, 2, 4);
    CHECK(m.level_count() == 2);
    CHECK(m.channels.empty());
    CHECK(m.levels[0].sector != m.levels[1].sector);  // one ground state per parity
    CHECK(std::abs(m.levels[0].energy - m.levels[1].energy) < 1e-10);
}

TEST_CASE("zero-temperature channels all point down in energy") {
    const auto m = model_for(ChainParams{6, 1.0, 1.0, 0.0, 0.0}, NoiseKind::Dissipation,
                             0.0, 4, 4);
    CHECK(m.level_count() == 4);
    CHECK_FALSE(m.channels.empty());
    for (const auto& ch : m.channels) {
        CHECK(ch.rate > 0.0);
        CHECK(m.levels[ch.from].energy > m.levels[ch.to].energy);
    }
}

TEST_CASE("channel endpoints respect the noise parity structure") {
    const ChainParams p{5, 1.0, 1.3, 2.5, 0.8};
    const auto diss = model_for(p, NoiseKind::Dissipation, 0.6, 6, 4);
    CHECK_FALSE(diss.channels.empty());
    for (const auto& ch : diss.channels)
        CHECK(diss.levels[ch.from].sector != diss.levels[ch.to].sector);

    const auto deph = model_for(p, NoiseKind::Dephasing, 0.6, 6, 4);
    CHECK_FALSE(deph.channels.empty());
    for (const auto& ch : deph.channels)
        CHECK(deph.levels[ch.from].sector == deph.levels[ch.to].sector);
}

TEST_CASE("level budgets outside the computed range are rejected") {
    const ChainParams p{4, 1.0, 0.5, 2.0, 0.3};
    const auto point = solve(p, 3);
    BathSpec bath{BathStatistics::Fermionic, 0.4, 0.0, 1.0};
    const auto reports =
        majb::full_reports(point.even, point.odd, bath, NoiseKind::Dissipation, 3);
    CHECK_THROWS_AS(majb::build_truncated_model(reports, point.even, point.odd, 1),
                    majb::usage_error);
    CHECK_THROWS_AS(majb::build_truncated_model(reports, point.even, point.odd, 17),
                    majb::usage_error);
    CHECK_NOTHROW(majb::build_truncated_model(reports, point.even, point.odd, 6));
}

TEST_CASE("generator reduces to the commutator when rates vanish") {
    const auto m = two_level(0.8, 0.0, 0.0);
    const auto rho = equal_superposition();
    const Eigen::MatrixXcd d = majb::apply_lindblad_generator(m, rho);
    CHECK(std::abs(d(0, 0)) < 1e-15);
    CHECK(std::abs(d(1, 1)) < 1e-15);
    // d rho_01/dt = -i (E_0 - E_1) rho_01
    CHECK(d(0, 1) == cplx(0.0, 0.8 * 0.5));
    CHECK(std::abs(d.trace()) < 1e-15);
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("excited population drains at the channel rate") {
    const auto m = two_level(1.0, 0.7, 0.0);
    const auto rho = DensityMatrix::pure_level(1, 2);
    const Eigen::MatrixXcd d = majb::apply_lindblad_generator(m, rho);
    CHECK(d(1, 1).real() == doctest::Approx(-0.7).epsilon(1e-14));
    CHECK(d(0, 0).real() == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(std::abs(d.trace()) < 1e-14);
}

TEST_CASE("generator rejects mismatched dimensions") {
    const auto m = two_level(1.0, 0.7, 0.0);
    const auto rho = DensityMatrix::pure_level(0, 3);
    CHECK_THROWS_AS(majb::apply_lindblad_generator(m, rho), majb::usage_error);
}

TEST_CASE("two-level decay follows the exponential law") {
    const double rate = 0.5;
    const auto m = two_level(2.0, rate, 0.0);
    const auto trajectory = majb::evolve(m, DensityMatrix::pure_level(1, 2), 5.0, 1e-3);
    REQUIRE(trajectory.size() == 5001);
    for (std::size_t i = 0; i < trajectory.size(); i += 500) {
        const auto& pt = trajectory[i];
        CHECK(std::abs(pt.rho.entries(1, 1).real() - std::exp(-rate * pt.t)) < 1e-6);
        CHECK(std::abs(pt.rho.trace_real() - 1.0) < 1e-8);
    }
}

TEST_CASE("coherences rotate at the level splitting when rates vanish") {
    const double splitting = 1.1;
    const auto m = two_level(splitting, 0.0, 0.0);
    const auto trajectory = majb::evolve(m, equal_superposition(), 2.0, 1e-3);
    const auto& last = trajectory.back();
    const cplx expected = 0.5 * std::exp(cplx(0.0, splitting * last.t));
    CHECK(std::abs(last.rho.entries(0, 1) - expected) < 1e-8);
    CHECK(last.rho.entries(0, 0).real() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("finite-temperature evolution reaches the detailed-balance ratio") {
    const double freq = 1.4, temp = 0.9, rate = 0.8;
    const double occ = majb::fermi_occupation(freq, temp);
    const auto m = two_level(freq, rate * (1.0 - occ), rate * occ);
    const auto trajectory = majb::evolve(m, DensityMatrix::pure_level(1, 2), 40.0, 1e-2);
    const auto& final = trajectory.back().rho;
    CHECK(final.entries(1, 1).real() / final.entries(0, 0).real() ==
          doctest::Approx(occ / (1.0 - occ)).epsilon(1e-6));
}

TEST_CASE("halving the step shrinks the error as fourth order") {
    const double rate = 1.0, t_final = 2.0;
    const auto m = two_level(1.0, rate, 0.0);
    const auto rho0 = DensityMatrix::pure_level(1, 2);
    auto error_at = [&](double dt) {
        const auto trajectory = majb::evolve(m, rho0, t_final, dt);
        return std::abs(trajectory.back().rho.entries(1, 1).real() -
                        std::exp(-rate * t_final));
    };
    const double coarse = error_at(0.2);
    const double fine = error_at(0.1);
    CHECK(coarse > 1e-12);  // above roundoff, so the ratio is meaningful
    CHECK(fine <= coarse / 8.0);
}

TEST_CASE("trajectories preserve the invariants over ten thousand steps") {
    const ChainParams p{4, 1.0, 0.9, 2.2, 0.7};
    const auto m = model_for(p, NoiseKind::Dissipation, 0.5, 4, 3);
    const auto trajectory =
        majb::evolve(m, DensityMatrix::pure_level(m.level_count() - 1, m.level_count()),
                     10.0, 1e-3);
    REQUIRE(trajectory.size() == 10001);
    for (std::size_t i = 0; i < trajectory.size(); i += 1000) {
        const auto& rho = trajectory[i].rho;
        CHECK(std::abs(rho.trace_real() - 1.0) < 1e-8);
        CHECK((rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.entries);
        CHECK(es.eigenvalues()(0) >= -1e-7);
    }
}

TEST_CASE("ground population never decreases at zero temperature") {
    const auto m = model_for(ChainParams{6, 1.0, 1.0, 0.0, 0.0}, NoiseKind::Dissipation,
                             0.0, 4, 4);
    const auto trajectory =
        majb::evolve(m, DensityMatrix::pure_level(3, 4), 8.0, 2e-3);
    double prev = 0.0;
    for (const auto& pt : trajectory) {
        const double ground =
            pt.rho.entries(0, 0).real() + pt.rho.entries(1, 1).real();
        CHECK(ground >= prev - 1e-10);
        prev = ground;
    }
    CHECK(prev > 0.999);
}

TEST_CASE("evolution rejects invalid initial states and steps") {
    const auto m = two_level(1.0, 0.5, 0.0);
    DensityMatrix bad;
    bad.entries = Eigen::MatrixXcd::Identity(2, 2) * cplx(0.45, 0.0);
    CHECK_THROWS_AS(majb::evolve(m, bad, 1.0, 1e-2), majb::integration_error);
    CHECK_THROWS_AS(majb::evolve(m, DensityMatrix::pure_level(0, 2), 1.0, 0.0),
                    majb::usage_error);
    CHECK_THROWS_AS(majb::evolve(m, DensityMatrix::pure_level(0, 2), -1.0, 1e-2),
                    majb::usage_error);
}

TEST_CASE("steady state of a thermal pair is the Gibbs ratio") {
    const double freq = 1.2, temp = 0.8, rate = 0.6;
    const double occ = majb::fermi_occupation(freq, temp);
    const auto m = two_level(freq, rate * (1.0 - occ), rate * occ);
    const auto rho = majb::steady_state(m);
    CHECK(rho.entries(1, 1).real() / rho.entries(0, 0).real() ==
          doctest::Approx(occ / (1.0 - occ)).epsilon(1e-10));
    CHECK(majb::apply_lindblad_generator(m, rho).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("channel-free models have no unique steady state") {
    const auto m = two_level(1.0, 0.0, 0.0);
    try {
        majb::steady_state(m);
        FAIL("expected a multiplicity error");
    } catch (const majb::multiplicity_error& e) {
        CHECK(e.stationary_levels == std::vector<int>{0, 1});
    }
}

TEST_CASE("dark ground pair shows up as a stationary subspace") {
    const auto m = model_for(ChainParams{6, 1.0, 1.0, 0.0, 0.0}, NoiseKind::Dissipation,
                             0.0, 4, 4);
    try {
        majb::steady_state(m);
        FAIL("expected a multiplicity error");
    } catch (const majb::multiplicity_error& e) {
        CHECK(e.stationary_levels == std::vector<int>{0, 1});
    }
}

TEST_CASE("trajectory export honors stride and reports every column") {
    const auto m = two_level(1.0, 0.5, 0.0);
    const auto trajectory = majb::evolve(m, DensityMatrix::pure_level(1, 2), 1.0, 0.1);
    REQUIRE(trajectory.size() == 11);

    const std::string path = "trajectory_test.csv";
    majb::export_trajectory(trajectory, m, path, 4);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    in.close();
    std::remove(path.c_str());

    REQUIRE(lines.size() == 5);  // header + rows 0, 4, 8, 10
    CHECK(lines[0] == "t,pop_e1,pop_o1,coh_e1_o1");
    CHECK(lines[1].substr(0, 2) == "0,");
    std::istringstream last(lines[4]);
    double t = -1.0;
    last >> t;
    CHECK(t == doctest::Approx(1.0));
}
