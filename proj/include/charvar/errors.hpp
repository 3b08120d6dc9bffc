#pragma once

#include <stdexcept>
#include <string>

namespace charvar {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DetDrift : Error {
    explicit DetDrift(const std::string& msg) : Error(msg) {}
};

struct InconsistentFricke : Error {
    explicit InconsistentFricke(const std::string& msg) : Error(msg) {}
};

struct ReduciblePair : Error {
    explicit ReduciblePair(const std::string& msg) : Error(msg) {}
};

struct TraceMismatch : Error {
    explicit TraceMismatch(const std::string& msg) : Error(msg) {}
};

struct DegenerateTarget : Error {
    explicit DegenerateTarget(const std::string& msg) : Error(msg) {}
};

struct DegenerateTrace : Error {
    explicit DegenerateTrace(const std::string& msg) : Error(msg) {}
};

struct ExcludedLocus : Error {
    explicit ExcludedLocus(const std::string& msg) : Error(msg) {}
};

struct UnknownGenerator : Error {
    explicit UnknownGenerator(const std::string& msg) : Error(msg) {}
};

struct IllConditioned : Error {
    explicit IllConditioned(const std::string& msg) : Error(msg) {}
};

struct ChainClosureFailure : Error {
    explicit ChainClosureFailure(const std::string& msg) : Error(msg) {}
};

struct AlignmentFailure : Error {
    explicit AlignmentFailure(const std::string& msg) : Error(msg) {}
};

struct InvalidFraction : Error {
    explicit InvalidFraction(const std::string& msg) : Error(msg) {}
};

struct EmptySolutionSet : Error {
    explicit EmptySolutionSet(const std::string& msg) : Error(msg) {}
};

struct PropagationStall : Error {
    explicit PropagationStall(const std::string& msg) : Error(msg) {}
};

// Tangle mini-language parse failure; carries the offending position.
struct ParseError : Error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

} // namespace charvar
