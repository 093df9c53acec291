#pragma once

#include <stdexcept>
#include <string>

namespace abcd {

// Base class for all toolkit errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A required column is missing or a schema file is malformed.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A cell could not be parsed; the message carries the data row number.
class ParseError : public Error {
public:
    using Error::Error;
};

// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Design matrix is rank deficient; the message names a dependent column.
class SingularDesignError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// f_test_nested called with models that are not actually nested.
class NestingError : public Error {
public:
    using Error::Error;
};

// Instruments do not move the endogenous belief (zero or undefined first stage).
class NoFirstStageError : public Error {
public:
    using Error::Error;
};

// Instrument coding cannot be built from the data (constant column, wrong
// number of anchor conditions, ...).
class CodingError : public Error {
public:
    using Error::Error;
};

// A group needed by an estimator is empty.
class GroupingError : public Error {
public:
    using Error::Error;
};

// Experiments passed to the placebo matrix do not share participants.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Degenerate input: constant baseline, single-level ordinal scale, flat
// response curve, zero-spread KDE sample.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Response-curve evaluation requested outside the fitted anchor domain.
class ExtrapolationError : public Error {
public:
    using Error::Error;
};

}  // namespace abcd
