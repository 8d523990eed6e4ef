#pragma once

#include <stdexcept>
#include <string>

namespace qtyp {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Time index outside the schedule of a structure.
class RangeError : public Error {
public:
    using Error::Error;
};

// Malformed input: unknown cell labels, bad scenario files.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A value violates an operation's precondition or a type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A computation guard (dimension, path-space, enumeration size) was exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

// Bad command line: unknown subcommand, missing or malformed flag.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace qtyp
