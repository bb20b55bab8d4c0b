#pragma once

#include <stdexcept>
#include <string>

namespace wavecone {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// Operator has no nonzero coefficient matrix.
struct OperatorIsZero : Error {
    explicit OperatorIsZero(const std::string& msg) : Error(msg) {}
};

struct UnsupportedOrderZero : Error {
    explicit UnsupportedOrderZero(const std::string& msg) : Error(msg) {}
};

/// xi = 0 has no direction; symbol queries need a nonzero frequency.
struct DegenerateFrequency : Error {
    explicit DegenerateFrequency(const std::string& msg) : Error(msg) {}
};

struct DegenerateVector : Error {
    explicit DegenerateVector(const std::string& msg) : Error(msg) {}
};

struct DegreeOverflow : Error {
    explicit DegreeOverflow(const std::string& msg) : Error(msg) {}
};

struct DegreeUnderflow : Error {
    explicit DegreeUnderflow(const std::string& msg) : Error(msg) {}
};

struct EmptyFamily : Error {
    explicit EmptyFamily(const std::string& msg) : Error(msg) {}
};

struct EmptyMeasure : Error {
    explicit EmptyMeasure(const std::string& msg) : Error(msg) {}
};

struct InvalidExponent : Error {
    explicit InvalidExponent(const std::string& msg) : Error(msg) {}
};

/// Experiment setup requires a base vector outside the wave cone.
struct ScenarioContradictsHypothesis : Error {
    explicit ScenarioContradictsHypothesis(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace wavecone
