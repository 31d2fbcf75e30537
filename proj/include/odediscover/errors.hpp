#pragma once

#include <stdexcept>
#include <string>

namespace odediscover {

/// Root of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Integrator hit a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double t) : Error(what), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace odediscover
