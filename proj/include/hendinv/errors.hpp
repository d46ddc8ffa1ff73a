#ifndef HENDINV_ERRORS_HPP
#define HENDINV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hendinv {

// Configuration / usage problems; CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Computation-level refusal (tolerance unmeetable, cost ceiling, degenerate
// input); CLI exit code 1.
struct RefusalError : std::runtime_error {
    explicit RefusalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hendinv

#endif
