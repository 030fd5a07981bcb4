#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"

using namespace fastflux;
using namespace fastflux::harness;

namespace {

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("fastflux_harness_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

// A free run small enough for a unit test.
ExperimentConfig small_free_run()
{
    ExperimentConfig c;
    c.grid = {12.0, 64};
    c.detector.radii = {6.0};
    c.detector.n_theta = 8;
    c.detector.n_phi = 16;
    c.time.T = 2.0;
    return c;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FASTFLUX_CLI) + " -q " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsRoundTrip)
{
    const ExperimentConfig c;
    EXPECT_EQ(parse_config(emit_config(c)), c);
    EXPECT_NO_THROW(validate(c));
}

TEST(Config, RandomConfigsRoundTrip)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::uniform_int_distribution<int> e(-300, 300);
    auto any = [&] { return u(rng) * std::pow(10.0, e(rng) / 10); };
    for (int trial = 0; trial < 200; ++trial) {
        ExperimentConfig c;
        c.potential.kind = trial % 2 ? "gaussian" : "point";
        c.potential.amplitude = any();
        c.potential.alpha = any();
        c.potential.location = {any(), any(), any()};
        c.packet.sigma = std::abs(any());
        c.packet.momentum = {any(), 0.1 + 0.2, -0.0};
        c.grid.points = std::size_t{1} << (trial % 10);
        c.detector.radii = {any(), any(), 1e-7, 1e7};
        c.time.tail_epsilon = std::abs(any());
        c.probe.times = {any()};
        c.probe.density_check = trial % 3 == 0;
        c.output.csv = "out dir/report " + std::to_string(trial) + ".csv";
        c.seed = rng();
        const ExperimentConfig back = parse_config(emit_config(c));
        ASSERT_EQ(back, c) << emit_config(c);
        EXPECT_EQ(emit_config(back), emit_config(c));
    }
}

TEST(Config, SectionsCommentsAndDottedKeysAgree)
{
    const auto a = parse_config("# detector sweep\n[detector]\nradii = 10, 20  # two radii\nhalf_angle_deg=45\n"
                                "[grid]\npoints = 32\n[]\nseed = 9\n");
    const auto b = parse_config("detector.radii = 10,20\ndetector.half_angle_deg = 45\ngrid.points = 32\nseed = 9\n");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.detector.radii, (std::vector<double>{10.0, 20.0}));
    EXPECT_EQ(a.seed, 9u);
}

TEST(Config, MalformedInputIsRejected)
{
    for (const char* text : {"nope = 1", "grid.points = -3", "grid.half_width = 1x", "packet.center = 1, 2",
                             "probe.density_check = yes", "[grid\npoints = 8", "just words"}) {
        try {
            parse_config(text);
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::invalid_argument) << text;
        }
    }
}

TEST(Config, ValidationNamesTheKey)
{
    auto rejects = [](const std::string& text, const std::string& key) {
        try {
            validate(parse_config(text));
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
        }
    };
    rejects("grid.points = 48", "grid.points");
    rejects("potential.kind = square_well", "potential.kind");
    rejects("packet.sigma = 0", "packet.sigma");
    rejects("kgrid.k_min = 5\nkgrid.k_max = 2", "kgrid.k_max");
    rejects("time.T = nan", "time.T");
    rejects("class.name = g1", "class.name");
}

TEST(Config, CacheDirectoryEnvironmentOverride)
{
    ExperimentConfig c;
    c.cache_dir = "configured";
    ::unsetenv("FASTFLUX_CACHE_DIR");
    EXPECT_EQ(cache_directory(c), std::filesystem::path("configured"));
    ::setenv("FASTFLUX_CACHE_DIR", "/tmp/elsewhere", 1);
    EXPECT_EQ(cache_directory(c), std::filesystem::path("/tmp/elsewhere"));
    ::unsetenv("FASTFLUX_CACHE_DIR");
}

TEST(ExitCodes, ErrorsMapToTheirClass)
{
    EXPECT_EQ(exit_code_for(ErrorCode::invalid_argument), 1);
    EXPECT_EQ(exit_code_for(ErrorCode::singular_system), 2);
    EXPECT_EQ(exit_code_for(ErrorCode::cache_corrupt), 3);
    EXPECT_EQ(exit_code_for(ErrorCode::io), 3);
    EXPECT_EQ(exit_code_for(ErrorCode::under_resolved), 4);
}

TEST(SolveEigen, SecondRunHitsTheCacheAndCorruptionIsReported)
{
    ExperimentConfig c;
    c.cache_dir = scratch_dir("cache").string();
    c.k_grid = {0.0, 4.0, 2, "lebedev26", 1};
    std::ostringstream first, second;
    EXPECT_EQ(solve_eigen(c, first), exit_ok);
    EXPECT_NE(first.str().find("solved"), std::string::npos);
    EXPECT_EQ(solve_eigen(c, second), exit_ok);
    EXPECT_NE(second.str().find("cache_hit"), std::string::npos);

    const auto file = std::filesystem::directory_iterator(c.cache_dir)->path();
    std::filesystem::resize_file(file, std::filesystem::file_size(file) - 3);
    std::ostringstream third;
    try {
        solve_eigen(c, third);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(exit_code_for(e.code()), exit_persistence);
        EXPECT_NE(std::string(e.what()).find(file.filename().string()), std::string::npos);
    }
}

TEST(SolveEigen, GaussianPotentialResidual)
{
    ExperimentConfig c;
    c.cache_dir = scratch_dir("gaussian").string();
    c.potential.kind = "gaussian";
    c.k_grid = {0.5, 3.0, 1, "lebedev26", 1};
    c.solver.points = 16;
    std::ostringstream out;
    EXPECT_EQ(solve_eigen(c, out), exit_ok);
    std::istringstream rows(out.str());
    std::string header, row;
    std::getline(rows, header);
    std::getline(rows, row);
    const double residual = std::stod(row.substr(row.find(',', row.find(',') + 1) + 1));
    EXPECT_LE(residual, c.tolerance.solver);
}

TEST(FastRun, DeterministicWithFailedRowsKept)
{
    ExperimentConfig c = small_free_run();
    c.detector.radii = {6.0, -1.0};
    std::ostringstream a, b;
    EXPECT_EQ(fast_run(c, a), exit_solver);
    EXPECT_EQ(fast_run(c, b), exit_solver);
    EXPECT_EQ(a.str(), b.str());
    const std::string csv = a.str();
    EXPECT_EQ(csv.rfind("R,lhs,lhs_abs,rhs,early_fraction,tail_estimate,status\n", 0), 0u);
    EXPECT_NE(csv.find("\n6,"), std::string::npos);
    EXPECT_NE(csv.find(",ok\n"), std::string::npos);
    EXPECT_NE(csv.find("\n-1,,,"), std::string::npos);
    EXPECT_NE(csv.find("FAILED"), std::string::npos);
}

TEST(FastRun, WritesFilesAndFlushesAFailedRowOnSetupErrors)
{
    const auto dir = scratch_dir("fast");
    ExperimentConfig c = small_free_run();
    c.output.csv = (dir / "fast.csv").string();
    c.output.svg = (dir / "fast.svg").string();
    std::ostringstream unused;
    EXPECT_EQ(fast_run(c, unused), exit_ok);
    EXPECT_TRUE(unused.str().empty());
    std::ifstream svg(c.output.svg);
    std::stringstream text;
    text << svg.rdbuf();
    EXPECT_NE(text.str().find("<svg"), std::string::npos);

    // The packet does not fit a box of half-width 3.
    c.grid = {3.0, 16};
    try {
        fast_run(c, unused);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(exit_code_for(e.code()), exit_resolution);
    }
    std::ifstream csv(c.output.csv);
    std::stringstream rows;
    rows << csv.rdbuf();
    EXPECT_NE(rows.str().find("FAILED: "), std::string::npos);
}

TEST(StatphaseProbe, CoarseQuadratureIsAResolutionError)
{
    ExperimentConfig c;
    c.probe.nodes_per_period = 4.0;
    c.probe.density_check = false;
    std::ostringstream out;
    try {
        statphase_probe(c, out);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(exit_code_for(e.code()), exit_resolution);
    }
}

TEST(ClassCheck, VerdictsInTheReport)
{
    auto value_pass = [](const ExperimentConfig& c) {
        std::ostringstream out;
        EXPECT_EQ(class_check(c, out), exit_ok);
        const std::string csv = out.str();
        const auto line = csv.substr(csv.find("\nvalue,") + 1);
        return line.substr(0, line.find('\n')).back() == '1';
    };
    ExperimentConfig c;
    c.check.symbol = "gaussian";
    EXPECT_TRUE(value_pass(c));
    c.check.symbol = "bracket";
    c.check.power = 5.0;
    EXPECT_FALSE(value_pass(c));
    c.check.symbol = "zero";
    EXPECT_TRUE(value_pass(c));
    c.check.name = "khat";
    EXPECT_TRUE(value_pass(c));
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run_cli("self-test"), 0);
    EXPECT_EQ(run_cli("--set nope=1 self-test"), 1);
    EXPECT_EQ(run_cli("no-such-command"), 1);
    EXPECT_EQ(run_cli("statphase-probe -s probe.nodes_per_period=4 -s probe.density_check=false"), 4);
    const auto dir = scratch_dir("cli");
    const std::string cache = "-s cache.dir=" + dir.string() + " -s kgrid.radial=2 -s kgrid.angular=lebedev26";
    EXPECT_EQ(run_cli("solve-eigen " + cache), 0);
    const auto file = std::filesystem::directory_iterator(dir)->path();
    std::ofstream(file, std::ios::binary | std::ios::trunc) << "FAST";
    EXPECT_EQ(run_cli("solve-eigen " + cache), 3);
}
