#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "majb/chain_model.hpp"
#include "majb/decoherence.hpp"
#include "majb/errors.hpp"
#include "majb/lindblad.hpp"
#include "majb/observables.hpp"
#include "majb/spectra.hpp"
#include "majb/sweep.hpp"
#include "majb/version.hpp"

namespace {

using namespace majb;

struct CliState {
    SweepSettings fixed;
    std::string noise_name = "dissipation";
    std::string axis_name = "z";
    std::string solver_name = "auto";
    std::string format_name = "csv";
    std::string out_path;
    std::string config_path;
    std::string preset_name;
    int parallelism = 1;
    int stride = 10;
    int initial_level = 0;  // 0 = highest retained level
    std::vector<int> sizes = {4, 6, 8, 10, 12};
};

void add_common(CLI::App* cmd, CliState& st) {
    cmd->add_option("--n-sites", st.fixed.chain.n_sites, "chain length")
        ->check(CLI::Range(2, max_sites()));
    cmd->add_option("--delta", st.fixed.chain.delta, "pairing strength (units of w)");
    cmd->add_option("--mu", st.fixed.chain.mu, "chemical potential (units of w)");
    cmd->add_option("--u", st.fixed.chain.u, "interaction strength (units of w)");
    cmd->add_option("--temperature", st.fixed.temperature, "bath temperature (units of w)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--coupling", st.fixed.coupling, "system-bath coupling")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--dos", st.fixed.dos, "bath density of states")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--levels", st.fixed.levels, "eigenpairs kept per parity sector")
        ->check(CLI::Range(1, 1024));
    cmd->add_option("--out", st.out_path, "write the result table to this path");
    cmd->add_option("--format", st.format_name, "result table format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--parallelism", st.parallelism, "worker threads for grid points")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eps-gap", st.fixed.eps_gap, "degeneracy threshold (units of w)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eps-m", st.fixed.eps_m, "magnetization threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--solver", st.solver_name, "eigensolver path")
        ->check(CLI::IsMember({"auto", "dense", "iterative"}));
}

void add_noise(CLI::App* cmd, CliState& st) {
    cmd->add_option("--noise", st.noise_name, "bath channel kind")
        ->check(CLI::IsMember({"dissipation", "dephasing"}));
}

std::size_t column_index(const ResultTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.names.size(); ++i)
        if (t.names[i] == name) return i;
    throw error("result table is missing column '" + name + "'");
}

double real_cell(const ResultTable& t, const std::string& name) {
    return std::get<double>(t.rows.at(0)[column_index(t, name)]);
}

std::int64_t int_cell(const ResultTable& t, const std::string& name) {
    return std::get<std::int64_t>(t.rows.at(0)[column_index(t, name)]);
}

std::string text_cell(const ResultTable& t, const std::string& name) {
    return std::get<std::string>(t.rows.at(0)[column_index(t, name)]);
}

void print_point(const CliState& st) {
    std::printf("point: n_sites=%d mu=%g delta=%g u=%g temperature=%g\n",
                st.fixed.chain.n_sites, st.fixed.chain.mu, st.fixed.chain.delta,
                st.fixed.chain.u, st.fixed.temperature);
}

void maybe_write(const ResultTable& table, const CliState& st) {
    if (st.out_path.empty()) return;
    write_table(table, format_from_string(st.format_name), st.out_path);
    std::printf("wrote %s\n", st.out_path.c_str());
}

ResultTable run_single(SweepTask task, const CliState& st) {
    SweepGrid grid;
    grid.task = task;
    grid.fixed = st.fixed;
    ResultTable table = run_sweep(grid, 1);
    const std::string& err = std::get<std::string>(table.rows.at(0).back());
    if (!err.empty()) throw error(err);
    return table;
}

int run_gap(const CliState& st) {
    const ResultTable t = run_single(SweepTask::Gap, st);
    print_point(st);
    const double ee = real_cell(t, "e_even");
    const double eo = real_cell(t, "e_odd");
    const bool same = int_cell(t, "same_parity") != 0;
    const char* ground = ee <= eo ? "even" : "odd";
    const char* second = same ? ground : (ee <= eo ? "odd" : "even");
    std::printf("gap = %.10g\n", real_cell(t, "gap"));
    std::printf("E_even(1) = %.10g\nE_odd(1) = %.10g\n", ee, eo);
    std::printf("ground pair parities: %s, %s\n", ground, second);
    maybe_write(t, st);
    return 0;
}

int run_gap_vs_n(const CliState& st) {
    SweepGrid grid;
    grid.task = SweepTask::GapVsN;
    grid.fixed = st.fixed;
    SweepAxis ax;
    ax.name = "n_sites";
    for (int n : st.sizes) ax.values.push_back(static_cast<double>(n));
    grid.axes.push_back(std::move(ax));

    const ResultTable t = run_sweep(grid, st.parallelism);
    std::printf("%8s  %22s\n", "n_sites", "gap");
    for (const std::vector<Cell>& row : t.rows) {
        const std::string& err = std::get<std::string>(row.back());
        if (!err.empty()) throw error(err);
        std::printf("%8lld  %22.15g\n",
                    static_cast<long long>(std::get<std::int64_t>(row[0])),
                    std::get<double>(row[column_index(t, "gap")]));
    }
    maybe_write(t, st);
    return 0;
}

int run_phase_diagram(const CliState& st) {
    const ResultTable t = run_single(SweepTask::PhaseDiagram, st);
    print_point(st);
    std::printf("gap = %.10g\nsame_parity = %lld\nm = %.10g\nphase = %s\n",
                real_cell(t, "gap"), static_cast<long long>(int_cell(t, "same_parity")),
                real_cell(t, "m"), text_cell(t, "phase").c_str());
    maybe_write(t, st);
    return 0;
}

int run_gamma_low(const CliState& st) {
    const NoiseKind noise = noise_from_string(st.noise_name);
    const ResultTable t = run_single(noise == NoiseKind::Dissipation
                                         ? SweepTask::GammaLowDissipation
                                         : SweepTask::GammaLowDephasing,
                                     st);
    print_point(st);
    std::printf("noise = %s\ngap = %.10g\ngamma_low = %.10g\n", st.noise_name.c_str(),
                real_cell(t, "gap"), real_cell(t, "gamma_low"));
    maybe_write(t, st);
    return 0;
}

int run_channels(const CliState& st) {
    const ResultTable t = run_single(SweepTask::ChannelWeights, st);
    print_point(st);
    std::printf("noise = %s\ngap = %.10g\n", st.noise_name.c_str(), real_cell(t, "gap"));
    for (std::size_t c = 0; c < t.names.size(); ++c)
        if (t.names[c].rfind("weight_", 0) == 0)
            std::printf("%-14s = %.10g\n", t.names[c].c_str(),
                        std::get<double>(t.rows[0][c]));
    maybe_write(t, st);
    return 0;
}

int run_rates(const CliState& st) {
    const SweepSettings& s = st.fixed;
    const NoiseKind noise = noise_from_string(st.noise_name);
    const SectorSolution sol = solve_sector_pair(s, s.levels);
    const int n_max = static_cast<int>(std::min<Eigen::Index>(
        {static_cast<Eigen::Index>(s.levels), sol.even.k_computed, sol.odd.k_computed}));
    const std::vector<DecoherenceReport> reports =
        full_reports(sol.even, sol.odd, s.bath(noise), noise, n_max);

    print_point(st);
    std::printf("noise = %s, gap = %.10g\n", st.noise_name.c_str(),
                ground_gap(sol.even, sol.odd));
    for (const DecoherenceReport& report : reports) {
        if (report.sector)
            std::printf("sector %s:\n", to_string(*report.sector));
        if (report.gamma_low)
            std::printf("  gamma_low = %.10g\n", *report.gamma_low);
        std::printf("  %4s %4s %18s %18s %18s %18s\n", "n", "m", "frequency", "weight",
                    "down", "up");
        for (const RateChannel& ch : report.channels)
            std::printf("  %4d %4d %18.10g %18.10g %18.10g %18.10g\n", ch.n, ch.m,
                        ch.frequency, ch.weight, ch.downward, ch.upward);
        for (const auto& [n, m] : report.validity.low_frequency)
            std::printf("  (%d,%d) below the frequency floor; handled by gamma_low\n", n, m);
        if (!report.validity.degenerate.empty())
            std::printf("  warning: %zu degenerate transition pair(s); secular rates are "
                        "unreliable there\n",
                        report.validity.degenerate.size());
    }

    if (!st.out_path.empty()) {
        CliState st2 = st;
        st2.fixed.noise = noise;
        const ResultTable t = run_single(SweepTask::Rates, st2);
        maybe_write(t, st);
    }
    return 0;
}

int run_correlations(const CliState& st) {
    CliState st2 = st;
    st2.fixed.axis = axis_from_string(st.axis_name);
    const ResultTable t = run_single(SweepTask::Correlations, st2);
    print_point(st);
    std::printf("gap = %.10g\nm = %.10g\nphase = %s\n", real_cell(t, "gap"),
                real_cell(t, "m"), text_cell(t, "phase").c_str());
    std::printf("<s^%s_%d s^%s_j>:\n", st.axis_name.c_str(), st.fixed.anchor,
                st.axis_name.c_str());
    const std::string prefix = st.axis_name + "_";
    for (std::size_t c = 0; c < t.names.size(); ++c)
        if (t.names[c].rfind(prefix, 0) == 0)
            std::printf("  j=%-3s % .10g\n", t.names[c].c_str() + prefix.size(),
                        std::get<double>(t.rows[0][c]));
    maybe_write(t, st);
    return 0;
}

int run_evolve(const CliState& st) {
    const SweepSettings& s = st.fixed;
    const NoiseKind noise = noise_from_string(st.noise_name);
    const SectorSolution sol = solve_sector_pair(s, s.levels);
    const int n_max = static_cast<int>(std::min<Eigen::Index>(
        {static_cast<Eigen::Index>(s.levels), sol.even.k_computed, sol.odd.k_computed}));
    const std::vector<DecoherenceReport> reports =
        full_reports(sol.even, sol.odd, s.bath(noise), noise, n_max);
    const int budget = static_cast<int>(std::min<Eigen::Index>(
        2 * s.levels, sol.even.k_computed + sol.odd.k_computed));
    const TruncatedModel model = build_truncated_model(reports, sol.even, sol.odd, budget);

    const int count = model.level_count();
    int initial = st.initial_level == 0 ? count : st.initial_level;
    if (initial < 1 || initial > count)
        throw usage_error("--initial-level must be between 1 and the retained level count");

    const DensityMatrix rho0 = DensityMatrix::pure_level(initial - 1, count);
    const std::vector<TrajectoryPoint> traj = evolve(model, rho0, s.t_final, s.dt);

    const std::string path = st.out_path.empty() ? "trajectory.csv" : st.out_path;
    export_trajectory(traj, model, path, st.stride);

    print_point(st);
    std::printf("noise = %s, levels retained = %d, jump channels = %zu\n",
                st.noise_name.c_str(), count, model.channels.size());
    std::printf("evolved to t = %g in %zu steps; trajectory written to %s\n", s.t_final,
                traj.size() - 1, path.c_str());
    std::printf("final populations:");
    for (int i = 0; i < count; ++i)
        std::printf(" %.6g", traj.back().rho.entries(i, i).real());
    std::printf("\n");
    return 0;
}

int run_sweep_cmd(CLI::App* cmd, const CliState& st) {
    if (!st.config_path.empty() && !st.preset_name.empty())
        throw usage_error("give either --config or --preset, not both");
    SweepGrid grid;
    if (!st.preset_name.empty()) {
        grid = preset_grid(st.preset_name);
    } else if (!st.config_path.empty()) {
        std::ifstream in(st.config_path);
        if (!in) throw io_error("cannot open " + st.config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        grid = parse_grid_json(buf.str());
    } else {
        throw usage_error("sweep needs --config <file> or --preset <name>");
    }

    if (cmd->count("--n-sites")) grid.fixed.chain.n_sites = st.fixed.chain.n_sites;
    if (cmd->count("--delta")) grid.fixed.chain.delta = st.fixed.chain.delta;
    if (cmd->count("--mu")) grid.fixed.chain.mu = st.fixed.chain.mu;
    if (cmd->count("--u")) grid.fixed.chain.u = st.fixed.chain.u;
    if (cmd->count("--temperature")) grid.fixed.temperature = st.fixed.temperature;
    if (cmd->count("--coupling")) grid.fixed.coupling = st.fixed.coupling;
    if (cmd->count("--dos")) grid.fixed.dos = st.fixed.dos;
    if (cmd->count("--levels")) grid.fixed.levels = st.fixed.levels;
    if (cmd->count("--eps-gap")) grid.fixed.eps_gap = st.fixed.eps_gap;
    if (cmd->count("--eps-m")) grid.fixed.eps_m = st.fixed.eps_m;
    if (cmd->count("--noise")) grid.fixed.noise = noise_from_string(st.noise_name);
    if (cmd->count("--solver")) grid.fixed.solver = solver_from_string(st.solver_name);

    const ResultTable table = run_sweep(grid, st.parallelism);

    std::size_t failures = 0;
    for (const std::vector<Cell>& row : table.rows)
        if (!std::get<std::string>(row.back()).empty()) ++failures;

    const std::string path = st.out_path.empty()
                                 ? "sweep." + st.format_name
                                 : st.out_path;
    write_table(table, format_from_string(st.format_name), path);
    std::printf("task %s: %zu points -> %s", to_string(grid.task).c_str(),
                table.rows.size(), path.c_str());
    if (failures > 0)
        std::printf(" (%zu point(s) failed; see the error column)", failures);
    std::printf("\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectra, decoherence channels and Lindblad dynamics of the interacting "
                 "Kitaev/XYZ chain"};
    app.set_version_flag("--version", majb::version_string);
    app.require_subcommand(0, 1);

    CliState st;

    CLI::App* gap = app.add_subcommand("gap", "degeneracy gap at one parameter point");
    add_common(gap, st);

    CLI::App* gapn = app.add_subcommand("gap-vs-n", "degeneracy gap across chain lengths");
    add_common(gapn, st);
    gapn->add_option("--sizes", st.sizes, "chain lengths to compare")
        ->delimiter(',')
        ->check(CLI::Range(2, majb::max_sites()));

    CLI::App* phase = app.add_subcommand("phase-diagram",
                                         "classify the phase at one parameter point");
    add_common(phase, st);

    CLI::App* glow = app.add_subcommand("gamma-low",
                                        "ground-pair bath coupling (gamma_L or its "
                                        "dephasing analog)");
    add_common(glow, st);
    add_noise(glow, st);

    CLI::App* chan = app.add_subcommand("channels", "transition channel weights");
    add_common(chan, st);
    add_noise(chan, st);

    CLI::App* rates = app.add_subcommand("rates", "secular master-equation rate table");
    add_common(rates, st);
    add_noise(rates, st);

    CLI::App* corr = app.add_subcommand("correlations", "ground-state spin correlations");
    add_common(corr, st);
    corr->add_option("--axis", st.axis_name, "correlation axis")
        ->check(CLI::IsMember({"x", "y", "z"}));
    corr->add_option("--anchor", st.fixed.anchor, "anchor site")->check(CLI::PositiveNumber);

    CLI::App* evolve = app.add_subcommand("evolve", "integrate the truncated master equation");
    add_common(evolve, st);
    add_noise(evolve, st);
    evolve->add_option("--t-final", st.fixed.t_final, "integration end time (units of 1/w)")
        ->check(CLI::NonNegativeNumber);
    evolve->add_option("--dt", st.fixed.dt, "integrator step")->check(CLI::PositiveNumber);
    evolve->add_option("--stride", st.stride, "trajectory output stride")
        ->check(CLI::PositiveNumber);
    evolve->add_option("--initial-level", st.initial_level,
                       "1-based initial level (default: highest retained)")
        ->check(CLI::PositiveNumber);

    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
    add_common(sweep, st);
    add_noise(sweep, st);
    sweep->add_option("--config", st.config_path, "JSON sweep description")
        ->check(CLI::ExistingFile);
    sweep->add_option("--preset", st.preset_name, "named preset grid");

    if (argc <= 1) {
        std::printf("%s\n", app.help().c_str());
        return 2;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return code;
        return 2;
    }

    try {
        st.fixed.solver = majb::solver_from_string(st.solver_name);
        if (gap->parsed()) return run_gap(st);
        if (gapn->parsed()) return run_gap_vs_n(st);
        if (phase->parsed()) return run_phase_diagram(st);
        if (glow->parsed()) {
            CliState st2 = st;
            st2.fixed.noise = majb::noise_from_string(st.noise_name);
            return run_gamma_low(st2);
        }
        if (chan->parsed()) {
            st.fixed.noise = majb::noise_from_string(st.noise_name);
            return run_channels(st);
        }
        if (rates->parsed()) return run_rates(st);
        if (corr->parsed()) return run_correlations(st);
        if (evolve->parsed()) return run_evolve(st);
        if (sweep->parsed()) return run_sweep_cmd(sweep, st);
        std::printf("%s\n", app.help().c_str());
        return 2;
    } catch (const majb::usage_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
