#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

// Rejected inputs: bad parameters, unphysical states, malformed data.
// The CLI maps this to exit code 2.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure: an iteration or series that did not converge within
// its budget. The CLI maps this to exit code 3.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sqz
