#pragma once

#include <stdexcept>
#include <string>

namespace spikesim {

// Model/input files that cannot be parsed or fail validation.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad simulator or run configuration (nonpositive clock, zero-sized PE grid, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller broke an API precondition, e.g. reading a virtual SDU.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// A K write-back reached the attention register before Q completed for that token.
struct OrderingViolation : std::logic_error {
    using std::logic_error::logic_error;
};

[[noreturn]] inline void contract_fail(const std::string &what)
{
    throw ContractViolation(what);
}

#define SPIKESIM_REQUIRE(cond, msg)                                            \
    do {                                                                       \
        if (!(cond)) {                                                         \
            ::spikesim::contract_fail(msg);                                    \
        }                                                                      \
    } while (0)

} // namespace spikesim
