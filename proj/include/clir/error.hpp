#pragma once

#include <stdexcept>
#include <string>

namespace clir {

// Exception families map onto the CLI exit-code contract:
// UsageError -> 1, DataError -> 2, TransportError -> 3.

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text that does not parse as a language code, combination or direction.
class ParseError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed on-disk content (JSONL, EMB1, tensor archives, qrels).
class FormatError : public DataError {
public:
    using DataError::DataError;
};

/// A caller broke an operation's precondition (empty input, missing id, ...).
class PreconditionError : public DataError {
public:
    using DataError::DataError;
};

/// Tensor archives that cannot be combined element-wise.
class StructuralError : public DataError {
public:
    using DataError::DataError;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The embedding service answered, but with something we cannot use.
class ProtocolError : public TransportError {
public:
    using TransportError::TransportError;
};

}  // namespace clir
