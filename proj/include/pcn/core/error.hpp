#pragma once

#include <stdexcept>
#include <string>

namespace pcn {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed parameters outside the documented range.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A config file or CLI flag could not be parsed or validated.
class ConfigError : public Error {
public:
    using Error::Error;
};

// No feasible plan exists, or the instance exceeds the solver bound.
class Infeasible : public Error {
public:
    using Error::Error;
};

// A checked runtime invariant failed. Always a bug or a corrupted run.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

inline void ensure(bool cond, const std::string& what) {
    if (!cond) throw InvariantViolation(what);
}

}  // namespace pcn
