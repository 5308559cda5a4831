#ifndef POROSTAB_COMMON_HPP
#define POROSTAB_COMMON_HPP

#include <stdexcept>
#include <string>

namespace porostab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateEquilibrium : public Error {
public:
    using Error::Error;
};

class RegimeMismatch : public Error {
public:
    using Error::Error;
};

class RhoZero : public Error {
public:
    using Error::Error;
};

class UnsupportedDegree : public Error {
public:
    using Error::Error;
};

class ZeroLeadingCoefficient : public Error {
public:
    using Error::Error;
};

class DegenerateAllZero : public Error {
public:
    using Error::Error;
};

class NoSignChange : public Error {
public:
    using Error::Error;
};

class InvalidMesh : public Error {
public:
    using Error::Error;
};

class LinearSolveFailure : public Error {
public:
    using Error::Error;
};

class NewtonDiverged : public Error {
public:
    using Error::Error;
};

/// Configuration validation failure; carries the offending key path in the message.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Well-formed configuration with an out-of-range or inconsistent value.
class ValueError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace porostab

#endif
