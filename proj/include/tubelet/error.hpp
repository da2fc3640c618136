#pragma once

#include <stdexcept>
#include <string>

namespace tubelet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rejected configuration values (bad ranges, impossible sizes, unknown kinds).
class InvalidConfigError : public Error {
public:
    using Error::Error;
};

// Structurally invalid runtime inputs (length mismatches, empty negative sets).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Rejection sampling ran out of budget; carries the attempt count.
class GenerationFailedError : public Error {
public:
    GenerationFailedError(const std::string& what, int attempts)
        : Error(what), attempts(attempts) {}
    int attempts;
};

// Affine matrix is not invertible (|det| below threshold).
class DegenerateTransformError : public Error {
public:
    using Error::Error;
};

// Non-finite loss encountered; carries where it happened.
class TrainingDivergedError : public Error {
public:
    TrainingDivergedError(const std::string& what, int epoch, int batch)
        : Error(what), epoch(epoch), batch(batch) {}
    int epoch;
    int batch;
};

class IoError : public Error {
public:
    using Error::Error;
};

// File-format violations, each its own type so callers can distinguish them.
class FormatError : public IoError {
public:
    using IoError::IoError;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedPayloadError : public FormatError {
public:
    using FormatError::FormatError;
};

// Config file could not be parsed; message carries line/column.
class ConfigParseError : public Error {
public:
    using Error::Error;
};

// Config parsed but violates a constraint; message carries the key path.
class ConfigConstraintError : public Error {
public:
    using Error::Error;
};

}  // namespace tubelet
