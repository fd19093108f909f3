#pragma once

#include <stdexcept>
#include <string>

namespace dampwave {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: parameters out of range, malformed config.
struct InvalidArgument : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct NewtonDiverged : Error {
    NewtonDiverged(double t, double residual, const std::string& what)
        : Error(what), time(t), residual(residual) {}
    double time;
    double residual;
};

struct DegeneratePhase : Error {
    using Error::Error;
};

struct NotPositiveDiagonalizable : Error {
    using Error::Error;
};

struct SingularCharacteristic : Error {
    using Error::Error;
};

struct SizeCapExceeded : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace dampwave
