#pragma once

#include <stdexcept>
#include <string>

namespace wildfire {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes disagree (matmul inner dims, batch sizes, feature widths).
class DimensionError : public Error {
public:
    using Error::Error;
};

// An operation was configured so that it cannot produce a valid result
// (non-positive conv output, pool padding >= kernel, bad layer widths).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file (CSV syntax, image container). Carries a location
// in the message whenever one is known.
class ParseError : public Error {
public:
    using Error::Error;
};

// Input passed structural parsing but violates a domain rule: out-of-range
// latitude, insufficient weather coverage, missing image joins, impossible
// resampling ratios, degenerate metric inputs.
class DataError : public Error {
public:
    using Error::Error;
};

// Autodiff/optimizer misuse or numeric divergence during training.
class OptimError : public Error {
public:
    using Error::Error;
};

// A checkpoint file failed its version, manifest, or checksum validation.
class IntegrityError : public Error {
public:
    using Error::Error;
};

}  // namespace wildfire
