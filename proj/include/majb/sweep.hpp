#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "majb/spectra.hpp"
#include "majb/types.hpp"

namespace majb {

enum class SweepTask {
    Gap,
    GapVsN,
    PhaseDiagram,
    GammaLowDissipation,
    GammaLowDephasing,
    ChannelWeights,
    Rates,
    Correlations,
    Evolve,
};

std::string to_string(SweepTask task);
SweepTask sweep_task_from_string(const std::string& name);

const char* to_string(NoiseKind noise);
NoiseKind noise_from_string(const std::string& name);
Axis axis_from_string(const std::string& name);
const char* to_string(SolverChoice choice);
SolverChoice solver_from_string(const std::string& name);

// One swept parameter: a recognized name and its value list. n_sites values
// must be integral.
struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

// Non-swept inputs shared by every grid point. Chain couplings are in
// units of w; bath fields cover the tasks that need one.
struct SweepSettings {
    ChainParams chain;
    double coupling = 1.0;
    double temperature = 0.0;
    double dos = 1.0;
    NoiseKind noise = NoiseKind::Dissipation;
    int levels = 6;
    Axis axis = Axis::Z;
    int anchor = 1;
    double eps_gap = 1e-3;
    double eps_m = 0.5;
    double t_final = 10.0;
    double dt = 1e-3;
    SolverChoice solver = SolverChoice::Auto;

    BathSpec bath(NoiseKind kind) const;
};

struct SweepGrid {
    SweepTask task = SweepTask::Gap;
    std::vector<SweepAxis> axes;
    SweepSettings fixed;

    void validate() const;
    std::size_t size() const;
};

enum class ColumnType { Real, Integer, Text };

using Cell = std::variant<double, std::int64_t, std::string>;

enum class TableFormat { Csv, Json };

TableFormat format_from_string(const std::string& name);

// Grid results in row-major grid order (last axis fastest). A trailing
// "error" text column isolates per-point failures; failed rows keep their
// parameter cells and zero out the rest.
struct ResultTable {
    std::vector<std::string> names;
    std::vector<ColumnType> types;
    std::vector<std::vector<Cell>> rows;
    std::string manifest_json;
};

bool tables_equal(const ResultTable& a, const ResultTable& b);

// Both parity blocks of the Hamiltonian diagonalized under the sweep
// solver policy: Auto switches to the iterative path at block dimension
// 1024 to keep wide grids affordable.
struct SectorSolution {
    SectorBasis even_basis, odd_basis;
    EigenSystem even, odd;
};

SectorSolution solve_sector_pair(const SweepSettings& settings, int k);

ResultTable run_sweep(const SweepGrid& grid, int parallelism);

void write_table(const ResultTable& table, TableFormat format, const std::string& path);

// JSON reads back exactly (types and manifest carried in the file). CSV
// reads values exactly but infers column types from the cell texts and
// carries no manifest.
ResultTable read_table(const std::string& path, TableFormat format);

std::vector<std::string> preset_names();
SweepGrid preset_grid(const std::string& name);

// Config-file schema: {"task": ..., "axes": [{"name", "values"} or
// {"name", "start", "stop", "step"}], "fixed": {...}}. Unknown keys are
// rejected.
SweepGrid parse_grid_json(const std::string& text);
std::string grid_to_json(const SweepGrid& grid);

}  // namespace majb
