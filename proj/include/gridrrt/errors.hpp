#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace gridrrt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Raised by the Newton loops when the residual fails to converge within the
// iteration budget. `at_time` carries the simulation time of the failing step
// when the error surfaces from simulate(); NaN otherwise.
struct NewtonDivergence : Error {
    explicit NewtonDivergence(const std::string& msg, double t = std::numeric_limits<double>::quiet_NaN())
        : Error(msg), at_time(t) {}
    double at_time;
};

struct SingularJacobian : Error {
    explicit SingularJacobian(const std::string& msg, double t = std::numeric_limits<double>::quiet_NaN())
        : Error(msg), at_time(t) {}
    double at_time;
};

struct PowerFlowDivergence : Error {
    using Error::Error;
};

struct IslandedNetwork : Error {
    using Error::Error;
};

struct EdgeAbsent : Error {
    using Error::Error;
};

struct GuardFailed : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

}  // namespace gridrrt
