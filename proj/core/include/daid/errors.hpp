#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace daid {

/// Base class for all library errors. Subclasses exist so callers can map
/// failure categories to exit codes without parsing messages.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- configuration / input validation ---

struct ConfigError : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

// --- data file ingestion ---

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};

struct SchemaError : Error {
    using Error::Error;
};

// --- metrics ---

struct DegenerateLabels : Error {
    using Error::Error;
};

// --- rebalancing ---

struct UnseenCategory : Error {
    using Error::Error;
};

// --- model / optimization ---

struct NonFiniteLoss : Error {
    NonFiniteLoss(const std::string& msg, int epoch, int batch)
        : Error(msg + " (epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ")"),
          epoch(epoch),
          batch(batch) {}
    int epoch;
    int batch;
};

struct NonFiniteGradient : Error {
    using Error::Error;
};

// --- causal graph queries ---

struct UnknownNode : Error {
    using Error::Error;
};

struct DegenerateStratum : Error {
    using Error::Error;
};

struct DegenerateReplicate : Error {
    using Error::Error;
};

struct MissingCell : Error {
    using Error::Error;
};

struct WeightSumError : Error {
    using Error::Error;
};

}  // namespace daid
