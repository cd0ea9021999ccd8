#pragma once

#include <stdexcept>
#include <string>

namespace svtas {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Streaming protocol violations: out-of-order chunks, cache shape mismatches.
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Segments that do not tile their frame range.
class StructuralError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class VocabularyError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

// Zero-norm rows handed to an operation that requires unit-norm inputs.
class NormalizationError : public Error {
public:
    using Error::Error;
};

} // namespace svtas
