#pragma once

#include <stdexcept>
#include <string>

namespace bbw {

// Base class for everything thrown by this library. Subclasses distinguish
// caller mistakes (bad arguments, malformed input) from numerical failures
// discovered mid-computation; the CLI maps the former to exit code 2 and the
// latter to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// An argument is outside its admissible range (x off [0,1], derivative order
// too high, knots not strictly increasing, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A container or grid has the wrong size for the requested operation.
class SizeError : public Error {
public:
    using Error::Error;
};

// A matrix involved in a solve is singular or too ill-conditioned to trust.
// `index` locates the offending interval or pivot where that is meaningful,
// -1 otherwise.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& msg, long idx = -1) : Error(msg), index(idx) {}
    long index;
};

// A structural zero pattern that must hold exactly was violated (for example
// a nonzero entry in a block that the construction guarantees vanishes).
class StructureError : public Error {
public:
    using Error::Error;
};

// The band elimination hit a pivot it cannot use; `step` is the lifting step
// at which the factorization failed.
class FactoringError : public Error {
public:
    FactoringError(const std::string& msg, long s = -1) : Error(msg), step(s) {}
    long step;
};

// The moment system for one wavelet column is singular; `column` identifies it.
class DesignError : public Error {
public:
    DesignError(const std::string& msg, long col = -1) : Error(msg), column(col) {}
    long column;
};

// A least-squares system that should be consistent has a residual above
// tolerance; signals a defect in upstream data rather than in the solver.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

// File or stream input could not be read or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace bbw
