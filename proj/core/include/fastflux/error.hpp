#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fastflux {

enum class ErrorCode {
    invalid_argument,
    grid_mismatch,
    not_power_of_two,
    singular_system,
    no_convergence,
    divergence,
    under_resolved,
    resolution_limited,
    cap_outside_grid,
    tail_not_convergent,
    cache_corrupt,
    io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace fastflux
