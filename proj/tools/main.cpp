#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "fastflux/parallel.hpp"

using namespace fastflux;
using namespace fastflux::harness;

namespace {

struct Settings {
    std::string config_path;
    std::vector<std::string> overrides;
    std::size_t workers = 0;
    std::string output;
    std::string svg;
    std::string class_name;
    bool quiet = false;
};

ExperimentConfig resolve(const Settings& s)
{
    std::string text;
    if (!s.config_path.empty()) {
        std::ifstream in(s.config_path);
        if (!in) throw Error(ErrorCode::invalid_argument, "cannot read config '" + s.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    // Overrides come last so they win; a trailing section header would capture them otherwise.
    text += "\n[]\n";
    for (const auto& o : s.overrides) text += o + "\n";
    ExperimentConfig c = parse_config(text);
    if (!s.output.empty()) c.output.csv = s.output;
    if (!s.svg.empty()) c.output.svg = s.svg;
    if (!s.class_name.empty()) c.check.name = s.class_name;
    return c;
}

}  // namespace

int main(int argc, char** argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_st("fastflux"));
    spdlog::set_pattern("%^%l%$: %v");

    CLI::App app{"Time-integrated quantum flux across spheres: eigenfunction tables, flux runs and checks."};
    app.require_subcommand(1);
    app.fallthrough();
    Settings s;
    app.add_option("-c,--config", s.config_path, "Config file (key = value, [section] headers)");
    app.add_option("-s,--set", s.overrides, "Override one key, e.g. --set detector.radii=20,40")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("-j,--workers", s.workers, "Worker threads (default: all logical cores)");
    app.add_option("-o,--output", s.output, "Write the CSV report here instead of stdout");
    app.add_flag("-q,--quiet", s.quiet, "Only warnings and errors on stderr");

    auto* solve = app.add_subcommand("solve-eigen", "Solve or load the eigenfunction table and print its residual");
    auto* fast = app.add_subcommand("fast-run", "Time-integrated flux across the detector for each radius");
    fast->add_option("--svg", s.svg, "Also write a plot of the relative error against R");
    auto* probe = app.add_subcommand("statphase-probe", "Error of the stationary-phase leading term over time");
    auto* cls = app.add_subcommand("class-check", "Decay class check of a symbol or a state");
    cls->add_option("--class", s.class_name, "gplus, khat or g0")->check(CLI::IsMember({"gplus", "khat", "g0"}));
    auto* self = app.add_subcommand("self-test", "Quick built-in consistency checks");
    auto* show = app.add_subcommand("show-config", "Print the effective config with comments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_usage;
    }
    if (s.quiet) spdlog::set_level(spdlog::level::warn);

    try {
        const ExperimentConfig c = resolve(s);
        set_worker_count(s.workers);
        if (*show) {
            std::cout << emit_config(c);
            return exit_ok;
        }
        if (*solve) return solve_eigen(c, std::cout);
        if (*fast) return fast_run(c, std::cout);
        if (*probe) return statphase_probe(c, std::cout);
        if (*cls) return class_check(c, std::cout);
        if (*self) return self_test(c, std::cout);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return exit_solver;
    }
    return exit_usage;
}
