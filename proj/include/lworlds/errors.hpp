#pragma once

#include <stdexcept>
#include <string>

namespace lw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor product of subsystems whose labels overlap.
class CompositionError : public Error {
public:
    using Error::Error;
};

/// A subsystem label, party or event id that does not exist.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Numeric precondition violated (normalization, unitarity, trace).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Searcher refused an input that exceeds its exhaustive size limit.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

/// Boost with |v| >= 1.
class FrameError : public Error {
public:
    using Error::Error;
};

/// Scenario failed load-time validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Ensemble too small to represent the outcome branches, or unpairable residue.
class ProportionError : public Error {
public:
    using Error::Error;
};

/// Serialized trace cannot be replayed against its scenario.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Scenario pair does not differ in exactly one remote setting.
class ComparisonError : public Error {
public:
    using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace lw
