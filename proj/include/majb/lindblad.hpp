#pragma once

#include <string>
#include <vector>

#include "majb/decoherence.hpp"
#include "majb/spectra.hpp"
#include "majb/types.hpp"

namespace majb {

struct LevelRef {
    ParitySector sector = ParitySector::Even;
    int index = 0;  // 1-based within the sector's eigensystem
    double energy = 0.0;
};

struct JumpChannel {
    int from = 0;  // levels[] positions
    int to = 0;
    double rate = 0.0;
};

// Truncated eigenbasis model: the retained levels (ascending energy) and
// the incoherent jump channels between them. Dissipative channels connect
// opposite sectors, dephasing channels the same sector.
struct TruncatedModel {
    std::vector<LevelRef> levels;
    std::vector<JumpChannel> channels;

    int level_count() const { return static_cast<int>(levels.size()); }
    int find_level(ParitySector sector, int index) const;  // -1 when absent
};

struct DensityMatrix {
    Eigen::MatrixXcd entries;

    Eigen::Index dim() const { return entries.rows(); }
    double trace_real() const { return entries.trace().real(); }
    // Hermiticity / unit-trace / positivity invariants; throws
    // integration_error stamped with `time` on violation.
    void verify(double time) const;

    static DensityMatrix pure_level(int level, int count);
};

// Keeps the level_budget lowest states across both sectors and attaches
// every channel from the reports whose endpoints are both retained,
// splitting each into downward rate Gamma (1 - n_f) (or Gamma (1 + n_b))
// and upward rate Gamma n_f (or Gamma n_b).
TruncatedModel build_truncated_model(const std::vector<DecoherenceReport>& reports,
                                     const EigenSystem& even, const EigenSystem& odd,
                                     int level_budget);

// drho/dt = -i[H, rho] + sum over channels of
// rate (s rho s^dag - (rho s^dag s + s^dag s rho)/2) with s = |to><from|.
Eigen::MatrixXcd apply_lindblad_generator(const TruncatedModel& model,
                                          const DensityMatrix& rho);

struct TrajectoryPoint {
    double t = 0.0;
    DensityMatrix rho;
};

// Fixed-step RK4; every emitted state is invariant-checked.
std::vector<TrajectoryPoint> evolve(const TruncatedModel& model, const DensityMatrix& rho0,
                                    double t_final, double dt);

// Unique stationary state via the population rate matrix null space.
// Throws multiplicity_error (listing the stationary level set) when the
// steady state is not unique.
DensityMatrix steady_state(const TruncatedModel& model);

// CSV with columns t, one population per level, then |coherence| per
// retained level pair.
void export_trajectory(const std::vector<TrajectoryPoint>& trajectory,
                       const TruncatedModel& model, const std::string& path,
                       int stride = 1);

}  // namespace majb
