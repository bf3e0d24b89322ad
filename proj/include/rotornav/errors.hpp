#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rotornav {

// Base class for all rotornav exceptions.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape mismatch between an input and what a consumer expects.
struct DimensionError : Error {
    DimensionError(long expected_, long actual_, const std::string& context)
        : Error(context + ": expected dimension " + std::to_string(expected_) +
                ", got " + std::to_string(actual_)),
          expected(expected_),
          actual(actual_) {}

    long expected;
    long actual;
};

// Argument outside the operation's valid domain (bad config value,
// near-singular geodetic input, rate above native rate, ...).
struct DomainError : Error {
    using Error::Error;
};

// Flight-log ingestion failure with a row diagnostic.
struct ParseError : Error {
    enum class Kind { MissingColumn, BadNumber, NonMonotonicTime, RpmRange, QuatNorm, Schema };

    ParseError(Kind kind_, std::size_t line_, const std::string& msg)
        : Error("parse error (line " + std::to_string(line_) + "): " + msg),
          kind(kind_),
          line(line_) {}

    Kind kind;
    std::size_t line;  // 1-based; 0 when not tied to a specific line
};

// Model container read/write failure.
struct ModelIoError : Error {
    enum class Kind { BadMagic, VersionMismatch, Truncated, DimensionMismatch, InvalidValue };

    ModelIoError(Kind kind_, const std::string& msg) : Error("model io: " + msg), kind(kind_) {}

    Kind kind;
};

// NaN/Inf or other numerical breakdown.
struct NumericalError : Error {
    using Error::Error;
};

// Training aborted because loss or weights became non-finite.
struct TrainDivergedError : NumericalError {
    TrainDivergedError(int epoch_, std::size_t sample_)
        : NumericalError("training diverged (non-finite loss or weights) at epoch " +
                         std::to_string(epoch_) + ", sample " + std::to_string(sample_)),
          epoch(epoch_),
          sample(sample_) {}

    int epoch;
    std::size_t sample;
};

}  // namespace rotornav
