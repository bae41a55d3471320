#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "majb/errors.hpp"
#include "majb/sweep.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using majb::Axis;
using majb::ColumnType;
using majb::NoiseKind;
using majb::ResultTable;
using majb::SolverChoice;
using majb::SweepAxis;
using majb::SweepGrid;
using majb::SweepTask;
using majb::TableFormat;

namespace {

SweepGrid gap_grid(int n_sites, std::vector<double> u_values) {
    SweepGrid g;
    g.task = SweepTask::Gap;
    g.fixed.chain.n_sites = n_sites;
    g.fixed.chain.delta = 1.5;
    g.fixed.chain.mu = 0.7;
    g.axes = {{"u", std::move(u_values)}};
    return g;
}

double real_at(const ResultTable& t, std::size_t row, const std::string& name) {
    for (std::size_t c = 0; c < t.names.size(); ++c)
        if (t.names[c] == name) return std::get<double>(t.rows.at(row).at(c));
    FAIL("no column named ", name);
    return 0.0;
}

std::string text_at(const ResultTable& t, std::size_t row, const std::string& name) {
    for (std::size_t c = 0; c < t.names.size(); ++c)
        if (t.names[c] == name) return std::get<std::string>(t.rows.at(row).at(c));
    FAIL("no column named ", name);
    return {};
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("sweep_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("enum names round trip and reject unknowns") {
    for (SweepTask t :
         {SweepTask::Gap, SweepTask::GapVsN, SweepTask::PhaseDiagram,
          SweepTask::GammaLowDissipation, SweepTask::GammaLowDephasing,
          SweepTask::ChannelWeights, SweepTask::Rates, SweepTask::Correlations,
          SweepTask::Evolve})
        CHECK(majb::sweep_task_from_string(majb::to_string(t)) == t);
    CHECK_THROWS_AS(majb::sweep_task_from_string("spectra"), majb::usage_error);

    CHECK(majb::noise_from_string("dissipation") == NoiseKind::Dissipation);
    CHECK(majb::noise_from_string("dephasing") == NoiseKind::Dephasing);
    CHECK_THROWS_AS(majb::noise_from_string("depolarizing"), majb::usage_error);

    CHECK(majb::axis_from_string("x") == Axis::X);
    CHECK(majb::axis_from_string("y") == Axis::Y);
    CHECK(majb::axis_from_string("z") == Axis::Z);
    CHECK_THROWS_AS(majb::axis_from_string("w"), majb::usage_error);

    for (SolverChoice s : {SolverChoice::Auto, SolverChoice::Dense, SolverChoice::Iterative})
        CHECK(majb::solver_from_string(majb::to_string(s)) == s);
    CHECK_THROWS_AS(majb::solver_from_string("lanczos"), majb::usage_error);

    CHECK(majb::format_from_string("csv") == TableFormat::Csv);
    CHECK(majb::format_from_string("json") == TableFormat::Json);
    CHECK_THROWS_AS(majb::format_from_string("parquet"), majb::usage_error);
}

TEST_CASE("grid validation rejects malformed input") {
    SweepGrid g = gap_grid(4, {0.0, 1.0});
    CHECK_NOTHROW(g.validate());
    CHECK(g.size() == 2);

    SweepGrid bad = g;
    bad.axes[0].name = "coupling";
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.axes.push_back({"u", {2.0}});
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.axes[0].values.clear();
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.axes[0].values.push_back(std::nan(""));
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.axes = {{"n_sites", {4.5}}};
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);
    bad.axes = {{"n_sites", {1.0}}};
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.task = SweepTask::Correlations;
    bad.axes = {{"n_sites", {4.0, 6.0}}};
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.fixed.levels = 0;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.fixed.anchor = 5;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.fixed.eps_gap = 0.0;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);
    bad.fixed.eps_gap = 1e-3;
    bad.fixed.eps_m = -0.5;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.fixed.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);
    bad.fixed.dt = 1e-3;
    bad.fixed.t_final = -1.0;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);

    bad = g;
    bad.fixed.coupling = -0.1;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);
    bad.fixed.coupling = 1.0;
    bad.fixed.temperature = -0.1;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);
    bad.fixed.temperature = 0.0;
    bad.fixed.dos = 0.0;
    CHECK_THROWS_AS(bad.validate(), majb::usage_error);
}

TEST_CASE("grid size is the axis product") {
    SweepGrid g = gap_grid(4, {0.0, 1.0, 2.0});
    g.axes.push_back({"mu", {0.0, 0.5}});
    g.axes.push_back({"delta", {1.0, 2.0, 3.0, 4.0}});
    CHECK(g.size() == 24);
}

TEST_CASE("gap sweep rows match direct sector solves") {
    const SweepGrid g = gap_grid(4, {0.0, 4.0, 8.0});
    const ResultTable t = majb::run_sweep(g, 1);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.names.front() == "n_sites");
    CHECK(t.names.back() == "error");
    CHECK(t.types.front() == ColumnType::Integer);
    CHECK(t.types.back() == ColumnType::Text);

    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(text_at(t, r, "error").empty());
        majb::SweepSettings s = g.fixed;
        s.chain.u = g.axes[0].values[r];
        CHECK(real_at(t, r, "u") == s.chain.u);
        const auto sp = majb::solve_sector_pair(s, 2);
        CHECK(real_at(t, r, "e_even") == doctest::Approx(sp.even.energies(0)).epsilon(1e-12));
        CHECK(real_at(t, r, "e_odd") == doctest::Approx(sp.odd.energies(0)).epsilon(1e-12));
        CHECK(real_at(t, r, "gap") ==
              doctest::Approx(std::abs(sp.even.energies(0) - sp.odd.energies(0)))
                  .epsilon(1e-12));
    }
}

TEST_CASE("rows come out in row-major order with the last axis fastest") {
    SweepGrid g = gap_grid(3, {0.0, 2.0, 4.0});
    g.axes.insert(g.axes.begin(), {"mu", {0.0, 1.0}});
    const ResultTable t = majb::run_sweep(g, 1);
    REQUIRE(t.rows.size() == 6);
    const double expect[6][2] = {{0, 0}, {0, 2}, {0, 4}, {1, 0}, {1, 2}, {1, 4}};
    for (std::size_t r = 0; r < 6; ++r) {
        CHECK(real_at(t, r, "mu") == expect[r][0]);
        CHECK(real_at(t, r, "u") == expect[r][1]);
    }
}

TEST_CASE("parallel evaluation gives the serial table") {
    SweepGrid g = gap_grid(5, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
    const ResultTable serial = majb::run_sweep(g, 1);
    const ResultTable parallel = majb::run_sweep(g, 4);
    CHECK(majb::tables_equal(serial, parallel));
    CHECK_THROWS_AS(majb::run_sweep(g, 0), majb::usage_error);
}

TEST_CASE("a failing point is isolated to its own row") {
    SweepGrid g;
    g.task = SweepTask::Gap;
    g.fixed.chain.delta = 1.0;
    g.fixed.chain.mu = 0.7;
    g.axes = {{"n_sites", {4.0, 24.0}}};
    const ResultTable t = majb::run_sweep(g, 1);
    REQUIRE(t.rows.size() == 2);

    CHECK(text_at(t, 0, "error").empty());
    CHECK(real_at(t, 0, "gap") > 0.0);

    CHECK(std::get<std::int64_t>(t.rows[1][0]) == 24);
    const std::string err = text_at(t, 1, "error");
    CHECK(err.find("MAJB_MAX_N") != std::string::npos);
    CHECK(real_at(t, 1, "e_even") == 0.0);
    CHECK(real_at(t, 1, "gap") == 0.0);
}

TEST_CASE("csv files round trip cell for cell") {
    const ResultTable t = majb::run_sweep(gap_grid(4, {0.0, 1.5, 3.0}), 1);
    TempFile f("roundtrip.csv");
    majb::write_table(t, TableFormat::Csv, f.path);
    const ResultTable back = majb::read_table(f.path, TableFormat::Csv);
    CHECK(majb::tables_equal(t, back));
    CHECK(back.manifest_json.empty());
}

TEST_CASE("csv cells with commas and quotes survive the trip") {
    ResultTable t;
    t.names = {"label", "value"};
    t.types = {ColumnType::Text, ColumnType::Real};
    t.rows = {{std::string("plain"), 1.25},
              {std::string("comma, inside"), -2.0},
              {std::string("say \"hi\""), 0.0},
              {std::string(""), 3.5}};
    TempFile f("quoting.csv");
    majb::write_table(t, TableFormat::Csv, f.path);
    const ResultTable back = majb::read_table(f.path, TableFormat::Csv);
    CHECK(majb::tables_equal(t, back));
}

TEST_CASE("json files round trip with types and manifest intact") {
    const ResultTable t = majb::run_sweep(gap_grid(4, {0.0, 2.0}), 1);
    TempFile f("roundtrip.json");
    majb::write_table(t, TableFormat::Json, f.path);
    const ResultTable back = majb::read_table(f.path, TableFormat::Json);
    CHECK(majb::tables_equal(t, back));
    CHECK(back.manifest_json == t.manifest_json);
}

TEST_CASE("empty tables write a bare header") {
    ResultTable t;
    t.names = {"a", "b"};
    t.types = {ColumnType::Integer, ColumnType::Real};

    TempFile csv("empty.csv");
    majb::write_table(t, TableFormat::Csv, csv.path);
    {
        std::ifstream in(csv.path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        CHECK(buf.str() == "a,b\r\n");
    }
    const ResultTable csv_back = majb::read_table(csv.path, TableFormat::Csv);
    CHECK(csv_back.names == t.names);
    CHECK(csv_back.rows.empty());
    // CSV types are inferred from cells, so a header-only file reads as text.
    CHECK(csv_back.types == std::vector<ColumnType>{ColumnType::Text, ColumnType::Text});

    TempFile js("empty.json");
    majb::write_table(t, TableFormat::Json, js.path);
    const ResultTable json_back = majb::read_table(js.path, TableFormat::Json);
    CHECK(majb::tables_equal(t, json_back));
}

TEST_CASE("io failures surface as io errors") {
    const ResultTable t = majb::run_sweep(gap_grid(4, {0.0}), 1);
    CHECK_THROWS_AS(majb::write_table(t, TableFormat::Csv, "/no_such_dir_majb/x.csv"),
                    majb::io_error);
    CHECK_THROWS_AS(majb::read_table("no_such_file_majb.csv", TableFormat::Csv),
                    majb::io_error);
    TempFile f("notjson.json");
    {
        std::ofstream out(f.path);
        out << "not json at all\n";
    }
    CHECK_THROWS_AS(majb::read_table(f.path, TableFormat::Json), majb::io_error);
}

TEST_CASE("the manifest records versions, the grid and the tolerances") {
    const SweepGrid g = gap_grid(4, {0.0, 1.0});
    const ResultTable t = majb::run_sweep(g, 1);
    const auto m = nlohmann::json::parse(t.manifest_json);

    CHECK(m.contains("generated_at"));
    CHECK(m.contains("version"));
    REQUIRE(m.contains("tolerances"));
    for (const char* key :
         {"eigensolver_residual_rel", "degenerate_cluster_rel", "sector_symmetry_rel",
          "degenerate_transition_tol", "freq_floor", "eps_gap", "eps_m"})
        CHECK(m["tolerances"].contains(key));

    REQUIRE(m.contains("grid"));
    CHECK(m["grid"]["task"] == "gap");
    REQUIRE(m["grid"].contains("fixed"));
    for (const char* key :
         {"n_sites", "w", "delta", "mu", "u", "coupling", "temperature", "dos", "noise",
          "levels", "axis", "anchor", "eps_gap", "eps_m", "t_final", "dt", "solver"})
        CHECK(m["grid"]["fixed"].contains(key));
    CHECK(m["grid"]["fixed"].size() == 17);
}

TEST_CASE("repeat runs are identical up to the timestamp") {
    const SweepGrid g = gap_grid(4, {0.0, 3.0});
    const ResultTable a = majb::run_sweep(g, 1);
    const ResultTable b = majb::run_sweep(g, 1);
    CHECK(majb::tables_equal(a, b));
    auto ma = nlohmann::json::parse(a.manifest_json);
    auto mb = nlohmann::json::parse(b.manifest_json);
    ma.erase("generated_at");
    mb.erase("generated_at");
    CHECK(ma == mb);
}

TEST_CASE("presets are valid grids with the published names") {
    const std::vector<std::string> names = majb::preset_names();
    CHECK(names == std::vector<std::string>{"fig1a", "fig3", "fig5", "fig7", "fig9",
                                            "fig10", "appendixA"});
    for (const std::string& name : names) {
        const SweepGrid g = majb::preset_grid(name);
        CHECK_NOTHROW(g.validate());
        CHECK(g.size() > 0);
    }
    CHECK(majb::preset_grid("fig1a").size() == 49);
    CHECK(majb::preset_grid("fig1a").task == SweepTask::Gap);
    CHECK(majb::preset_grid("appendixA").task == SweepTask::Correlations);
    CHECK_THROWS_AS(majb::preset_grid("fig2"), majb::usage_error);
}

TEST_CASE("grid json round trips and rejects unknown keys") {
    SweepGrid g = gap_grid(6, {0.0, 0.5, 1.0});
    g.fixed.noise = NoiseKind::Dephasing;
    g.fixed.levels = 4;
    g.fixed.solver = SolverChoice::Dense;
    const std::string text = majb::grid_to_json(g);
    const SweepGrid back = majb::parse_grid_json(text);
    CHECK(majb::grid_to_json(back) == text);

    CHECK_THROWS_AS(majb::parse_grid_json("{ nope"), majb::usage_error);
    CHECK_THROWS_AS(majb::parse_grid_json(R"({"tsak": "gap"})"), majb::usage_error);
    CHECK_THROWS_AS(majb::parse_grid_json(R"({"axes": [{"name": "u", "vals": [1]}]})"),
                    majb::usage_error);
    CHECK_THROWS_AS(
        majb::parse_grid_json(R"({"fixed": {"n_site": 4}})"), majb::usage_error);
    CHECK_THROWS_AS(majb::parse_grid_json(R"({"axes": [{"values": [1.0]}]})"),
                    majb::usage_error);
    CHECK_THROWS_AS(majb::parse_grid_json(R"({"axes": [{"name": "u"}]})"),
                    majb::usage_error);
    CHECK_THROWS_AS(
        majb::parse_grid_json(
            R"({"axes": [{"name": "u", "values": [1.0], "start": 0.0, "stop": 1.0, "step": 0.5}]})"),
        majb::usage_error);
    CHECK_THROWS_AS(
        majb::parse_grid_json(R"({"axes": [{"name": "u", "start": 0.0, "stop": 1.0}]})"),
        majb::usage_error);
}

TEST_CASE("range axes expand to inclusive grids") {
    const SweepGrid g = majb::parse_grid_json(
        R"({"task": "gap", "axes": [{"name": "u", "start": 0.0, "stop": 1.0, "step": 0.25}]})");
    REQUIRE(g.axes.size() == 1);
    const std::vector<double> expect{0.0, 0.25, 0.5, 0.75, 1.0};
    REQUIRE(g.axes[0].values.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(g.axes[0].values[i] == doctest::Approx(expect[i]).epsilon(1e-12));

    CHECK_THROWS_AS(
        majb::parse_grid_json(
            R"({"axes": [{"name": "u", "start": 1.0, "stop": 0.0, "step": 0.5}]})"),
        majb::usage_error);
    CHECK_THROWS_AS(
        majb::parse_grid_json(
            R"({"axes": [{"name": "u", "start": 0.0, "stop": 1.0, "step": 0.0}]})"),
        majb::usage_error);
}

TEST_CASE("the sweep solver policy switches to the iterative path on big blocks") {
    majb::SweepSettings small;
    small.chain.n_sites = 4;
    const auto dense = majb::solve_sector_pair(small, 2);
    CHECK(dense.even.k_computed == 8);  // dense solves keep the whole block

    majb::SweepSettings big;
    big.chain.n_sites = 11;
    big.chain.delta = 1.0;
    const auto iterative = majb::solve_sector_pair(big, 2);
    CHECK(iterative.even.k_computed == 2);
    CHECK(iterative.odd.k_computed == 2);
    CHECK(iterative.even.energies(0) <= iterative.even.energies(1));
}

TEST_CASE("the command line front end wires up to the library") {
    const char* cli = std::getenv("MAJB_CLI");
    if (cli == nullptr) {
        MESSAGE("MAJB_CLI not set; skipping the end-to-end command checks");
        return;
    }
    const std::string exe = cli;
    TempFile out("cli_stdout.txt");

    auto run = [&](const std::string& args) {
        const std::string cmd = exe + " " + args + " > " + out.path + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    auto output = [&] {
        std::ifstream in(out.path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    CHECK(run("") == 2);

    CHECK(run("gap --n-sites 2 --delta 2 --mu 3 --u 4") == 0);
    const double expect = std::abs(4.0 / 2.0 + 1.0 - std::sqrt(9.0 + 4.0));
    CHECK(output().find("gap") != std::string::npos);
    {
        std::istringstream in(output());
        bool found = false;
        std::string token;
        while (in >> token) {
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end != token.c_str() && *end == '\0' &&
                std::abs(v - expect) < 1e-9)
                found = true;
        }
        CHECK(found);
    }

    CHECK(run("gap --n-sites 1") == 2);
    CHECK(run("gap --n-sites 24") == 2);
    CHECK(run("gap --n-sites 2 --out /nonexistent_dir_majb/out.csv") == 1);
    CHECK(run("sweep --preset fig2") == 2);
}
