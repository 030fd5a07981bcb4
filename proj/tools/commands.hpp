#pragma once

#include <ostream>
#include <string>

#include "config.hpp"
#include "fastflux/error.hpp"

namespace fastflux::harness {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_solver = 2,
    exit_persistence = 3,
    exit_resolution = 4,
    exit_self_test = 5,
};

int exit_code_for(ErrorCode code);

// Each command writes its report to `out` (or to the configured output file) and a short summary to the log.
// Library errors propagate as fastflux::Error.
int solve_eigen(const ExperimentConfig& config, std::ostream& out);
int fast_run(const ExperimentConfig& config, std::ostream& out);
int statphase_probe(const ExperimentConfig& config, std::ostream& out);
int class_check(const ExperimentConfig& config, std::ostream& out);
int self_test(const ExperimentConfig& config, std::ostream& out);

}  // namespace fastflux::harness
