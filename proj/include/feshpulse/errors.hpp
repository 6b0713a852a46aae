#pragma once

#include <stdexcept>
#include <string>

namespace feshpulse {

// Invalid or inconsistent user input (config file, pulse sequence, grid spec).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical routine failed to reach its tolerance.
struct numeric_error : std::runtime_error {
    numeric_error(const std::string& msg, double achieved)
        : std::runtime_error(msg), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

// Integration band does not cover enough of the spectrum.
struct coverage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Time grid too coarse to resolve the decay rate near a threshold crossing.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// erfi(x) exceeds double range; carries the scaled value e^{-x^2} erfi(x).
struct erfi_overflow : std::range_error {
    erfi_overflow(const std::string& msg, double scaled_value)
        : std::range_error(msg), scaled(scaled_value) {}
    double scaled;
};

} // namespace feshpulse
