#include "majb/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "majb/chain_model.hpp"
#include "majb/decoherence.hpp"
#include "majb/errors.hpp"
#include "majb/jw_ops.hpp"
#include "majb/lindblad.hpp"
#include "majb/observables.hpp"
#include "majb/spectra.hpp"
#include "majb/version.hpp"

namespace majb {

namespace {

using nlohmann::json;

const char* const axis_names[] = {"mu", "u", "delta", "n_sites", "temperature"};

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_not_of("-0123456789") == std::string::npos) s += ".0";
    return s;
}

std::string format_cell(const Cell& cell) {
    if (std::holds_alternative<double>(cell)) return format_real(std::get<double>(cell));
    if (std::holds_alternative<std::int64_t>(cell))
        return std::to_string(std::get<std::int64_t>(cell));
    return std::get<std::string>(cell);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_open = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_open = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                field_open = true;
                break;
            case ',':
                end_field();
                field_open = true;
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                field_open = true;
                break;
        }
    }
    if (quoted) throw io_error("unterminated quoted field in CSV input");
    if (field_open || !field.empty() || !record.empty()) end_record();
    return records;
}

bool parse_integer(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size()) return false;
    out = v;
    return true;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size()) return false;
    out = v;
    return true;
}

const char* to_string(ColumnType t) {
    switch (t) {
        case ColumnType::Real: return "real";
        case ColumnType::Integer: return "integer";
        default: return "text";
    }
}

ColumnType column_type_from_string(const std::string& s) {
    if (s == "real") return ColumnType::Real;
    if (s == "integer") return ColumnType::Integer;
    if (s == "text") return ColumnType::Text;
    throw io_error("unknown column type '" + s + "'");
}

// ---------------------------------------------------------------------
// Schema and row plumbing

struct Schema {
    std::vector<std::string> names;
    std::vector<ColumnType> types;

    void add(std::string name, ColumnType type) {
        names.push_back(std::move(name));
        types.push_back(type);
    }
};

std::string pair_tag(int n, int m) { return std::to_string(n) + "_" + std::to_string(m); }

Schema make_schema(const SweepGrid& grid) {
    Schema s;
    s.add("n_sites", ColumnType::Integer);
    s.add("mu", ColumnType::Real);
    s.add("delta", ColumnType::Real);
    s.add("u", ColumnType::Real);
    s.add("temperature", ColumnType::Real);

    const int levels = grid.fixed.levels;
    switch (grid.task) {
        case SweepTask::Gap:
        case SweepTask::GapVsN:
            s.add("e_even", ColumnType::Real);
            s.add("e_odd", ColumnType::Real);
            s.add("gap", ColumnType::Real);
            s.add("same_parity", ColumnType::Integer);
            break;
        case SweepTask::PhaseDiagram:
            s.add("e_even", ColumnType::Real);
            s.add("e_odd", ColumnType::Real);
            s.add("gap", ColumnType::Real);
            s.add("same_parity", ColumnType::Integer);
            s.add("m", ColumnType::Real);
            s.add("phase", ColumnType::Text);
            break;
        case SweepTask::GammaLowDissipation:
        case SweepTask::GammaLowDephasing:
            s.add("gap", ColumnType::Real);
            s.add("gamma_low", ColumnType::Real);
            break;
        case SweepTask::ChannelWeights:
            s.add("gap", ColumnType::Real);
            if (grid.fixed.noise == NoiseKind::Dissipation) {
                s.add("weight_1_1", ColumnType::Real);
                for (int n = 2; n <= levels; ++n) {
                    s.add("weight_" + pair_tag(1, n), ColumnType::Real);
                    s.add("weight_" + pair_tag(n, 1), ColumnType::Real);
                }
            } else {
                for (const char* sec : {"e", "o"})
                    for (int n = 2; n <= levels; ++n)
                        for (int m = 1; m < n; ++m)
                            s.add("weight_" + std::string(sec) + "_" + pair_tag(n, m),
                                  ColumnType::Real);
            }
            break;
        case SweepTask::Rates:
            s.add("gap", ColumnType::Real);
            s.add("n_excluded", ColumnType::Integer);
            s.add("n_degenerate", ColumnType::Integer);
            if (grid.fixed.noise == NoiseKind::Dissipation) {
                for (int n = 1; n <= levels; ++n)
                    for (int m = 1; m <= levels; ++m) {
                        const std::string tag = pair_tag(n, m);
                        s.add("freq_" + tag, ColumnType::Real);
                        s.add("down_" + tag, ColumnType::Real);
                        s.add("up_" + tag, ColumnType::Real);
                    }
            } else {
                for (const char* sec : {"e", "o"})
                    for (int n = 2; n <= levels; ++n)
                        for (int m = 1; m < n; ++m) {
                            const std::string tag = std::string(sec) + "_" + pair_tag(n, m);
                            s.add("freq_" + tag, ColumnType::Real);
                            s.add("down_" + tag, ColumnType::Real);
                            s.add("up_" + tag, ColumnType::Real);
                        }
            }
            break;
        case SweepTask::Correlations: {
            s.add("gap", ColumnType::Real);
            s.add("same_parity", ColumnType::Integer);
            s.add("m", ColumnType::Real);
            s.add("phase", ColumnType::Text);
            const int n_sites = grid.fixed.chain.n_sites;
            for (const char* ax : {"x", "y", "z"})
                for (int j = 1; j <= n_sites; ++j)
                    if (j != grid.fixed.anchor)
                        s.add(std::string(ax) + "_" + std::to_string(j), ColumnType::Real);
            break;
        }
        case SweepTask::Evolve:
            s.add("gap", ColumnType::Real);
            s.add("ground_pop", ColumnType::Real);
            s.add("purity", ColumnType::Real);
            s.add("levels_retained", ColumnType::Integer);
            break;
    }
    s.add("error", ColumnType::Text);
    return s;
}

Cell blank_cell(ColumnType type) {
    switch (type) {
        case ColumnType::Real: return Cell(0.0);
        case ColumnType::Integer: return Cell(std::int64_t{0});
        default: return Cell(std::string());
    }
}

std::vector<Cell> blank_row(const Schema& schema) {
    std::vector<Cell> row;
    row.reserve(schema.types.size());
    for (ColumnType t : schema.types) row.push_back(blank_cell(t));
    return row;
}

struct RowCursor {
    std::vector<Cell>* row;
    std::size_t i;

    void real(double v) { (*row)[i++] = v; }
    void integer(std::int64_t v) { (*row)[i++] = v; }
    void text(std::string v) { (*row)[i++] = std::move(v); }
};

// ---------------------------------------------------------------------
// Point evaluation

void apply_axis(SweepSettings& s, const std::string& name, double value) {
    if (name == "mu") s.chain.mu = value;
    else if (name == "u") s.chain.u = value;
    else if (name == "delta") s.chain.delta = value;
    else if (name == "temperature") s.temperature = value;
    else if (name == "n_sites") s.chain.n_sites = static_cast<int>(std::llround(value));
    else throw usage_error("unknown sweep axis '" + name + "'");
}

SweepSettings settings_at(const SweepGrid& grid, std::size_t point) {
    SweepSettings s = grid.fixed;
    std::size_t rem = point;
    for (std::size_t a = grid.axes.size(); a-- > 0;) {
        const SweepAxis& ax = grid.axes[a];
        apply_axis(s, ax.name, ax.values[rem % ax.values.size()]);
        rem /= ax.values.size();
    }
    return s;
}

SolverChoice pick_solver(const SweepSettings& s, Eigen::Index dim) {
    if (s.solver != SolverChoice::Auto) return s.solver;
    return dim >= 1024 ? SolverChoice::Iterative : SolverChoice::Dense;
}

int table_n_max(const SweepSettings& s, const SectorSolution& sp) {
    return static_cast<int>(std::min<Eigen::Index>(
        {static_cast<Eigen::Index>(s.levels), sp.even.k_computed, sp.odd.k_computed}));
}

void fill_gap(const SweepSettings& s, RowCursor& c, bool with_phase) {
    const SectorSolution sp = solve_sector_pair(s, 2);
    const GroundReport g = analyze_ground(sp.even, sp.odd, s.eps_gap * s.chain.w);
    c.real(sp.even.energies[0]);
    c.real(sp.odd.energies[0]);
    c.real(g.gap);
    c.integer(g.same_parity ? 1 : 0);
    if (!with_phase) return;

    const EigenSystem& sys = g.sector == ParitySector::Even ? sp.even : sp.odd;
    const SectorBasis& basis = g.sector == ParitySector::Even ? sp.even_basis : sp.odd_basis;
    const Eigen::VectorXcd full = embed_state(sys.vectors.col(0), basis, s.chain.n_sites);
    const double m = magnetization(full, s.chain.n_sites);
    const PhaseLabel label =
        classify_phase(g.gap, g.same_parity, m, s.chain, s.eps_gap, s.eps_m);
    c.real(m);
    c.text(to_string(label.phase));
}

void fill_gamma_low(const SweepSettings& s, NoiseKind noise, RowCursor& c) {
    const SectorSolution sp = solve_sector_pair(s, 1);
    c.real(ground_gap(sp.even, sp.odd));
    if (noise == NoiseKind::Dissipation) {
        const MatrixElementTable t = dissipative_matrix_elements(sp.even, sp.odd, 1);
        c.real(gamma_low_dissipation(t, s.coupling));
    } else {
        const MatrixElementTable te = dephasing_matrix_elements(sp.even, 1);
        const MatrixElementTable to = dephasing_matrix_elements(sp.odd, 1);
        c.real(gamma_low_dephasing(te, to, s.coupling));
    }
}

void fill_channel_weights(const SweepSettings& s, RowCursor& c) {
    const SectorSolution sp = solve_sector_pair(s, s.levels);
    const int n_max = table_n_max(s, sp);
    c.real(ground_gap(sp.even, sp.odd));
    if (s.noise == NoiseKind::Dissipation) {
        const MatrixElementTable t = dissipative_matrix_elements(sp.even, sp.odd, n_max);
        c.real(channel_weight_dissipation(t, 1, 1));
        for (int n = 2; n <= s.levels; ++n) {
            c.real(n <= n_max ? channel_weight_dissipation(t, 1, n) : 0.0);
            c.real(n <= n_max ? channel_weight_dissipation(t, n, 1) : 0.0);
        }
    } else {
        const MatrixElementTable te = dephasing_matrix_elements(sp.even, n_max);
        const MatrixElementTable to = dephasing_matrix_elements(sp.odd, n_max);
        for (const MatrixElementTable* t : {&te, &to})
            for (int n = 2; n <= s.levels; ++n)
                for (int m = 1; m < n; ++m)
                    c.real(n <= n_max ? channel_weight_dephasing(*t, n, m) : 0.0);
    }
}

void fill_rates(const SweepSettings& s, RowCursor& c) {
    const SectorSolution sp = solve_sector_pair(s, s.levels);
    const int n_max = table_n_max(s, sp);
    const std::vector<DecoherenceReport> reports =
        full_reports(sp.even, sp.odd, s.bath(s.noise), s.noise, n_max);

    c.real(ground_gap(sp.even, sp.odd));
    std::int64_t excluded = 0, degenerate = 0;
    for (const DecoherenceReport& r : reports) {
        excluded += static_cast<std::int64_t>(r.validity.low_frequency.size());
        degenerate += static_cast<std::int64_t>(r.validity.degenerate.size());
    }
    c.integer(excluded);
    c.integer(degenerate);

    auto emit = [&](const DecoherenceReport& report, const Eigen::VectorXd& hi_energies,
                    const Eigen::VectorXd& lo_energies, int n, int m) {
        if (n > n_max || m > n_max) {
            c.real(0.0);
            c.real(0.0);
            c.real(0.0);
            return;
        }
        c.real(hi_energies[n - 1] - lo_energies[m - 1]);
        const RateChannel* found = nullptr;
        for (const RateChannel& ch : report.channels)
            if (ch.n == n && ch.m == m) {
                found = &ch;
                break;
            }
        c.real(found ? found->downward : 0.0);
        c.real(found ? found->upward : 0.0);
    };

    if (s.noise == NoiseKind::Dissipation) {
        for (int n = 1; n <= s.levels; ++n)
            for (int m = 1; m <= s.levels; ++m)
                emit(reports[0], sp.even.energies, sp.odd.energies, n, m);
    } else {
        for (std::size_t r = 0; r < 2; ++r) {
            const Eigen::VectorXd& e = r == 0 ? sp.even.energies : sp.odd.energies;
            for (int n = 2; n <= s.levels; ++n)
                for (int m = 1; m < n; ++m) emit(reports[r], e, e, n, m);
        }
    }
}

void fill_correlations(const SweepSettings& s, RowCursor& c) {
    const SectorSolution sp = solve_sector_pair(s, 2);
    const GroundReport g = analyze_ground(sp.even, sp.odd, s.eps_gap * s.chain.w);
    const EigenSystem& sys = g.sector == ParitySector::Even ? sp.even : sp.odd;
    const SectorBasis& basis = g.sector == ParitySector::Even ? sp.even_basis : sp.odd_basis;
    const Eigen::VectorXcd full = embed_state(sys.vectors.col(0), basis, s.chain.n_sites);

    const double m = magnetization(full, s.chain.n_sites);
    const PhaseLabel label =
        classify_phase(g.gap, g.same_parity, m, s.chain, s.eps_gap, s.eps_m);
    c.real(g.gap);
    c.integer(g.same_parity ? 1 : 0);
    c.real(m);
    c.text(to_string(label.phase));

    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        const CorrelationRow row = spin_correlations(full, s.chain.n_sites, axis, s.anchor);
        for (double v : row.values) c.real(v);
    }
}

void fill_evolve(const SweepSettings& s, RowCursor& c) {
    const SectorSolution sp = solve_sector_pair(s, s.levels);
    const int n_max = table_n_max(s, sp);
    const std::vector<DecoherenceReport> reports =
        full_reports(sp.even, sp.odd, s.bath(s.noise), s.noise, n_max);
    const int budget = static_cast<int>(
        std::min<Eigen::Index>(2 * s.levels, sp.even.k_computed + sp.odd.k_computed));
    const TruncatedModel model = build_truncated_model(reports, sp.even, sp.odd, budget);

    const int count = model.level_count();
    const DensityMatrix rho0 = DensityMatrix::pure_level(count - 1, count);
    const std::vector<TrajectoryPoint> traj = evolve(model, rho0, s.t_final, s.dt);
    const DensityMatrix& last = traj.back().rho;

    c.real(ground_gap(sp.even, sp.odd));
    c.real(last.entries(0, 0).real() + (count > 1 ? last.entries(1, 1).real() : 0.0));
    c.real((last.entries * last.entries).trace().real());
    c.integer(count);
}

std::vector<Cell> evaluate_point(const SweepGrid& grid, const Schema& schema,
                                 std::size_t point) {
    const SweepSettings s = settings_at(grid, point);
    std::vector<Cell> row = blank_row(schema);
    row[0] = static_cast<std::int64_t>(s.chain.n_sites);
    row[1] = s.chain.mu;
    row[2] = s.chain.delta;
    row[3] = s.chain.u;
    row[4] = s.temperature;

    RowCursor c{&row, 5};
    try {
        switch (grid.task) {
            case SweepTask::Gap:
            case SweepTask::GapVsN: fill_gap(s, c, false); break;
            case SweepTask::PhaseDiagram: fill_gap(s, c, true); break;
            case SweepTask::GammaLowDissipation:
                fill_gamma_low(s, NoiseKind::Dissipation, c);
                break;
            case SweepTask::GammaLowDephasing:
                fill_gamma_low(s, NoiseKind::Dephasing, c);
                break;
            case SweepTask::ChannelWeights: fill_channel_weights(s, c); break;
            case SweepTask::Rates: fill_rates(s, c); break;
            case SweepTask::Correlations: fill_correlations(s, c); break;
            case SweepTask::Evolve: fill_evolve(s, c); break;
        }
    } catch (const std::exception& e) {
        for (std::size_t i = 5; i + 1 < row.size(); ++i) row[i] = blank_cell(schema.types[i]);
        row.back() = std::string(e.what());
    }
    return row;
}

// ---------------------------------------------------------------------
// Manifest

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

std::string make_manifest(const SweepGrid& grid) {
    json m;
    m["generated_at"] = iso_timestamp();
    m["version"] = version_string;
    m["grid"] = json::parse(grid_to_json(grid));
    m["tolerances"] = {
        {"eigensolver_residual_rel", 1e-9},
        {"degenerate_cluster_rel", 1e-10},
        {"sector_symmetry_rel", 1e-12},
        {"degenerate_transition_tol", 1e-6},
        {"freq_floor", freq_floor},
        {"eps_gap", grid.fixed.eps_gap},
        {"eps_m", grid.fixed.eps_m},
    };
    return m.dump();
}

double jreal(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) throw usage_error("config key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int jint(const json& j, const std::string& key) {
    if (!j.at(key).is_number_integer())
        throw usage_error("config key '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::string jstr(const json& j, const std::string& key) {
    if (!j.at(key).is_string()) throw usage_error("config key '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

std::vector<double> grid_range(double start, double stop, double step) {
    if (!(step > 0.0)) throw usage_error("axis step must be positive");
    if (stop < start) throw usage_error("axis stop must be >= start");
    const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------
// Public surface

std::string to_string(SweepTask task) {
    switch (task) {
        case SweepTask::Gap: return "gap";
        case SweepTask::GapVsN: return "gap-vs-n";
        case SweepTask::PhaseDiagram: return "phase-diagram";
        case SweepTask::GammaLowDissipation: return "gamma-low-dissipation";
        case SweepTask::GammaLowDephasing: return "gamma-low-dephasing";
        case SweepTask::ChannelWeights: return "channel-weights";
        case SweepTask::Rates: return "rates";
        case SweepTask::Correlations: return "correlations";
        case SweepTask::Evolve: return "evolve";
    }
    throw usage_error("unknown sweep task");
}

SweepTask sweep_task_from_string(const std::string& name) {
    for (SweepTask t :
         {SweepTask::Gap, SweepTask::GapVsN, SweepTask::PhaseDiagram,
          SweepTask::GammaLowDissipation, SweepTask::GammaLowDephasing,
          SweepTask::ChannelWeights, SweepTask::Rates, SweepTask::Correlations,
          SweepTask::Evolve})
        if (to_string(t) == name) return t;
    throw usage_error("unknown sweep task '" + name + "'");
}

const char* to_string(NoiseKind noise) {
    return noise == NoiseKind::Dissipation ? "dissipation" : "dephasing";
}

NoiseKind noise_from_string(const std::string& name) {
    if (name == "dissipation") return NoiseKind::Dissipation;
    if (name == "dephasing") return NoiseKind::Dephasing;
    throw usage_error("unknown noise kind '" + name + "' (expected dissipation or dephasing)");
}

Axis axis_from_string(const std::string& name) {
    if (name == "x") return Axis::X;
    if (name == "y") return Axis::Y;
    if (name == "z") return Axis::Z;
    throw usage_error("unknown axis '" + name + "' (expected x, y or z)");
}

TableFormat format_from_string(const std::string& name) {
    if (name == "csv") return TableFormat::Csv;
    if (name == "json") return TableFormat::Json;
    throw usage_error("unknown format '" + name + "' (expected csv or json)");
}

const char* to_string(SolverChoice choice) {
    switch (choice) {
        case SolverChoice::Dense: return "dense";
        case SolverChoice::Iterative: return "iterative";
        default: return "auto";
    }
}

SolverChoice solver_from_string(const std::string& name) {
    if (name == "auto") return SolverChoice::Auto;
    if (name == "dense") return SolverChoice::Dense;
    if (name == "iterative") return SolverChoice::Iterative;
    throw usage_error("unknown solver '" + name + "' (expected auto, dense or iterative)");
}

BathSpec SweepSettings::bath(NoiseKind kind) const {
    BathSpec b;
    b.statistics = statistics_for(kind);
    b.coupling = coupling;
    b.temperature = temperature;
    b.dos = dos;
    return b;
}

SectorSolution solve_sector_pair(const SweepSettings& settings, int k) {
    const ChainParams& cp = settings.chain;
    SectorSolution out;
    std::tie(out.even_basis, out.odd_basis) = build_sector_basis(cp.n_sites);
    const OperatorMatrix h = build_hamiltonian(cp);
    const OperatorMatrix he = project_to_sector(h, out.even_basis);
    const OperatorMatrix ho = project_to_sector(h, out.odd_basis);
    out.even = diagonalize_sector(he, ParitySector::Even,
                                  std::min<Eigen::Index>(k, he.dim()),
                                  pick_solver(settings, he.dim()), cp.w);
    out.odd = diagonalize_sector(ho, ParitySector::Odd, std::min<Eigen::Index>(k, ho.dim()),
                                 pick_solver(settings, ho.dim()), cp.w);
    return out;
}

void SweepGrid::validate() const {
    std::set<std::string> seen;
    for (const SweepAxis& ax : axes) {
        bool known = false;
        for (const char* name : axis_names) known = known || ax.name == name;
        if (!known) throw usage_error("unknown sweep axis '" + ax.name + "'");
        if (!seen.insert(ax.name).second)
            throw usage_error("sweep axis '" + ax.name + "' appears twice");
        if (ax.values.empty()) throw usage_error("sweep axis '" + ax.name + "' has no values");
        for (double v : ax.values) {
            if (!std::isfinite(v))
                throw usage_error("sweep axis '" + ax.name + "' has a non-finite value");
            if (ax.name == "n_sites") {
                if (std::abs(v - std::llround(v)) > 1e-9)
                    throw usage_error("n_sites axis values must be integers");
                if (std::llround(v) < 2) throw usage_error("n_sites axis values must be >= 2");
            }
        }
    }
    if (task == SweepTask::Correlations && seen.count("n_sites"))
        throw usage_error("correlations sweeps need a fixed n_sites (it sets the columns)");
    if (fixed.levels < 1) throw usage_error("levels must be >= 1");
    if (fixed.anchor < 1 || fixed.anchor > fixed.chain.n_sites)
        throw usage_error("anchor site out of range");
    if (!(fixed.eps_gap > 0.0) || !(fixed.eps_m > 0.0))
        throw usage_error("thresholds must be positive");
    if (!(fixed.dt > 0.0)) throw usage_error("dt must be positive");
    if (!(fixed.t_final >= 0.0)) throw usage_error("t_final must be >= 0");
    if (fixed.coupling < 0.0) throw usage_error("coupling must be >= 0");
    if (fixed.temperature < 0.0) throw usage_error("temperature must be >= 0");
    if (!(fixed.dos > 0.0)) throw usage_error("dos must be positive");
}

std::size_t SweepGrid::size() const {
    std::size_t n = 1;
    for (const SweepAxis& ax : axes) n *= ax.values.size();
    return n;
}

bool tables_equal(const ResultTable& a, const ResultTable& b) {
    if (a.names != b.names) return false;
    if (a.types != b.types) return false;
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        if (a.rows[r].size() != b.rows[r].size()) return false;
        for (std::size_t c = 0; c < a.rows[r].size(); ++c)
            if (a.rows[r][c] != b.rows[r][c]) return false;
    }
    return true;
}

ResultTable run_sweep(const SweepGrid& grid, int parallelism) {
    if (parallelism < 1) throw usage_error("parallelism must be >= 1");
    grid.validate();

    const Schema schema = make_schema(grid);
    const std::int64_t total = static_cast<std::int64_t>(grid.size());
    std::vector<std::vector<Cell>> rows(static_cast<std::size_t>(total));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(parallelism)
#endif
    for (std::int64_t p = 0; p < total; ++p)
        rows[static_cast<std::size_t>(p)] =
            evaluate_point(grid, schema, static_cast<std::size_t>(p));

    ResultTable table;
    table.names = schema.names;
    table.types = schema.types;
    table.rows = std::move(rows);
    table.manifest_json = make_manifest(grid);
    return table;
}

void write_table(const ResultTable& table, TableFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");

    if (format == TableFormat::Csv) {
        std::string line;
        for (std::size_t c = 0; c < table.names.size(); ++c) {
            if (c) line += ',';
            line += csv_escape(table.names[c]);
        }
        out << line << "\r\n";
        for (const std::vector<Cell>& row : table.rows) {
            line.clear();
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) line += ',';
                line += csv_escape(format_cell(row[c]));
            }
            out << line << "\r\n";
        }
    } else {
        json j;
        j["manifest"] =
            table.manifest_json.empty() ? json::object() : json::parse(table.manifest_json);
        j["columns"] = json::array();
        for (std::size_t c = 0; c < table.names.size(); ++c)
            j["columns"].push_back({{"name", table.names[c]}, {"type", to_string(table.types[c])}});
        j["rows"] = json::array();
        for (const std::vector<Cell>& row : table.rows) {
            json jr = json::array();
            for (const Cell& cell : row) {
                if (std::holds_alternative<double>(cell)) jr.push_back(std::get<double>(cell));
                else if (std::holds_alternative<std::int64_t>(cell))
                    jr.push_back(std::get<std::int64_t>(cell));
                else jr.push_back(std::get<std::string>(cell));
            }
            j["rows"].push_back(std::move(jr));
        }
        out << j.dump(2) << '\n';
    }
    if (!out) throw io_error("write failed for " + path);
}

ResultTable read_table(const std::string& path, TableFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    ResultTable table;
    if (format == TableFormat::Csv) {
        const std::vector<std::vector<std::string>> records = parse_csv(text);
        if (records.empty()) throw io_error(path + " has no header row");
        table.names = records[0];
        const std::size_t cols = table.names.size();

        table.types.assign(cols, ColumnType::Text);
        for (std::size_t c = 0; c < cols; ++c) {
            bool all_int = records.size() > 1, all_real = records.size() > 1;
            for (std::size_t r = 1; r < records.size(); ++r) {
                if (records[r].size() != cols)
                    throw io_error(path + " row " + std::to_string(r) +
                                   " has the wrong number of fields");
                std::int64_t iv;
                double rv;
                if (!parse_integer(records[r][c], iv)) all_int = false;
                if (!parse_real(records[r][c], rv)) all_real = false;
            }
            if (all_int) table.types[c] = ColumnType::Integer;
            else if (all_real) table.types[c] = ColumnType::Real;
        }

        for (std::size_t r = 1; r < records.size(); ++r) {
            std::vector<Cell> row;
            row.reserve(cols);
            for (std::size_t c = 0; c < cols; ++c) {
                const std::string& s = records[r][c];
                if (table.types[c] == ColumnType::Integer) {
                    std::int64_t v = 0;
                    parse_integer(s, v);
                    row.emplace_back(v);
                } else if (table.types[c] == ColumnType::Real) {
                    double v = 0.0;
                    parse_real(s, v);
                    row.emplace_back(v);
                } else {
                    row.emplace_back(s);
                }
            }
            table.rows.push_back(std::move(row));
        }
        return table;
    }

    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw io_error(path + " is not valid JSON: " + e.what());
    }
    try {
        table.manifest_json = j.at("manifest").dump();
        for (const json& col : j.at("columns")) {
            table.names.push_back(col.at("name").get<std::string>());
            table.types.push_back(column_type_from_string(col.at("type").get<std::string>()));
        }
        for (const json& jr : j.at("rows")) {
            if (jr.size() != table.names.size())
                throw io_error(path + " has a row with the wrong number of cells");
            std::vector<Cell> row;
            row.reserve(jr.size());
            for (std::size_t c = 0; c < jr.size(); ++c) {
                switch (table.types[c]) {
                    case ColumnType::Real: row.emplace_back(jr[c].get<double>()); break;
                    case ColumnType::Integer:
                        row.emplace_back(jr[c].get<std::int64_t>());
                        break;
                    default: row.emplace_back(jr[c].get<std::string>()); break;
                }
            }
            table.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw io_error(path + " does not match the table schema: " + e.what());
    }
    return table;
}

std::vector<std::string> preset_names() {
    return {"fig1a", "fig3", "fig5", "fig7", "fig9", "fig10", "appendixA"};
}

SweepGrid preset_grid(const std::string& name) {
    SweepGrid g;
    SweepSettings& f = g.fixed;
    f.chain.n_sites = 12;

    if (name == "fig1a") {
        g.task = SweepTask::Gap;
        f.chain.mu = 1.0;
        f.chain.delta = 5.0;
        g.axes = {{"u", grid_range(0.0, 12.0, 0.25)}};
    } else if (name == "fig3") {
        g.task = SweepTask::PhaseDiagram;
        f.chain.delta = 1.0;
        g.axes = {{"mu", grid_range(0.0, 10.0, 0.5)}, {"u", grid_range(-12.0, 12.0, 0.5)}};
    } else if (name == "fig5" || name == "fig9") {
        g.task = name == "fig5" ? SweepTask::GammaLowDissipation : SweepTask::GammaLowDephasing;
        f.chain.mu = 1.0;
        g.axes = {{"delta", {1.0, 2.0, 3.0, 4.0, 5.0}}, {"u", grid_range(0.0, 12.0, 0.25)}};
    } else if (name == "fig7" || name == "fig10") {
        g.task = SweepTask::ChannelWeights;
        f.noise = name == "fig7" ? NoiseKind::Dissipation : NoiseKind::Dephasing;
        f.chain.mu = 1.0;
        f.chain.delta = 5.0;
        f.levels = 5;
        g.axes = {{"u", grid_range(5.0, 10.0, 0.1)}};
    } else if (name == "appendixA") {
        g.task = SweepTask::Correlations;
        g.axes = {{"mu", {1.0, 10.0}},
                  {"delta", {1.0, 3.0, 5.0}},
                  {"u", {-20.0, 0.0, 20.0}}};
    } else {
        std::string known;
        for (const std::string& p : preset_names()) known += (known.empty() ? "" : ", ") + p;
        throw usage_error("unknown preset '" + name + "' (available: " + known + ")");
    }
    return g;
}

std::string grid_to_json(const SweepGrid& grid) {
    json g;
    g["task"] = to_string(grid.task);
    g["axes"] = json::array();
    for (const SweepAxis& ax : grid.axes)
        g["axes"].push_back({{"name", ax.name}, {"values", ax.values}});
    const SweepSettings& f = grid.fixed;
    g["fixed"] = {
        {"n_sites", f.chain.n_sites},
        {"w", f.chain.w},
        {"delta", f.chain.delta},
        {"mu", f.chain.mu},
        {"u", f.chain.u},
        {"coupling", f.coupling},
        {"temperature", f.temperature},
        {"dos", f.dos},
        {"noise", to_string(f.noise)},
        {"levels", f.levels},
        {"axis", to_string(f.axis)},
        {"anchor", f.anchor},
        {"eps_gap", f.eps_gap},
        {"eps_m", f.eps_m},
        {"t_final", f.t_final},
        {"dt", f.dt},
        {"solver", to_string(f.solver)},
    };
    return g.dump();
}

SweepGrid parse_grid_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw usage_error(std::string("sweep config is not valid JSON: ") + e.what());
    }

    SweepGrid grid;
    for (const auto& item : j.items()) {
        if (item.key() == "task") {
            grid.task = sweep_task_from_string(jstr(j, "task"));
        } else if (item.key() == "axes") {
            if (!item.value().is_array()) throw usage_error("config key 'axes' must be a list");
            for (const json& ja : item.value()) {
                SweepAxis ax;
                bool have_values = false;
                for (const auto& key : ja.items()) {
                    if (key.key() == "name") ax.name = jstr(ja, "name");
                    else if (key.key() == "values") {
                        if (!key.value().is_array())
                            throw usage_error("axis 'values' must be a list of numbers");
                        for (const json& v : key.value()) {
                            if (!v.is_number())
                                throw usage_error("axis 'values' must be a list of numbers");
                            ax.values.push_back(v.get<double>());
                        }
                        have_values = true;
                    } else if (key.key() == "start" || key.key() == "stop" ||
                               key.key() == "step") {
                        // handled together below
                    } else {
                        throw usage_error("unknown axis key '" + key.key() + "'");
                    }
                }
                if (ja.contains("start") || ja.contains("stop") || ja.contains("step")) {
                    if (have_values)
                        throw usage_error("axis gives both 'values' and a start/stop/step range");
                    if (!(ja.contains("start") && ja.contains("stop") && ja.contains("step")))
                        throw usage_error("a range axis needs all of start, stop and step");
                    ax.values = grid_range(jreal(ja, "start"), jreal(ja, "stop"),
                                           jreal(ja, "step"));
                    have_values = true;
                }
                if (ax.name.empty()) throw usage_error("axis is missing its 'name'");
                if (!have_values) throw usage_error("axis '" + ax.name + "' has no values");
                grid.axes.push_back(std::move(ax));
            }
        } else if (item.key() == "fixed") {
            const json& jf = item.value();
            if (!jf.is_object()) throw usage_error("config key 'fixed' must be an object");
            SweepSettings& f = grid.fixed;
            for (const auto& key : jf.items()) {
                const std::string& k = key.key();
                if (k == "n_sites") f.chain.n_sites = jint(jf, k);
                else if (k == "w") f.chain.w = jreal(jf, k);
                else if (k == "delta") f.chain.delta = jreal(jf, k);
                else if (k == "mu") f.chain.mu = jreal(jf, k);
                else if (k == "u") f.chain.u = jreal(jf, k);
                else if (k == "coupling") f.coupling = jreal(jf, k);
                else if (k == "temperature") f.temperature = jreal(jf, k);
                else if (k == "dos") f.dos = jreal(jf, k);
                else if (k == "noise") f.noise = noise_from_string(jstr(jf, k));
                else if (k == "levels") f.levels = jint(jf, k);
                else if (k == "axis") f.axis = axis_from_string(jstr(jf, k));
                else if (k == "anchor") f.anchor = jint(jf, k);
                else if (k == "eps_gap") f.eps_gap = jreal(jf, k);
                else if (k == "eps_m") f.eps_m = jreal(jf, k);
                else if (k == "t_final") f.t_final = jreal(jf, k);
                else if (k == "dt") f.dt = jreal(jf, k);
                else if (k == "solver") f.solver = solver_from_string(jstr(jf, k));
                else throw usage_error("unknown fixed key '" + k + "'");
            }
        } else {
            throw usage_error("unknown config key '" + item.key() + "'");
        }
    }
    return grid;
}

}  // namespace majb
