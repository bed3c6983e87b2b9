#pragma once

#include <stdexcept>
#include <string>

namespace sfm {

/// Malformed or invalid input data (bad CSV rows, gaps, non-positive levels).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sample statistic is undefined because a series has zero variance.
class DegenerateSeriesError : public DataError {
public:
    using DataError::DataError;
};

/// An argument lies outside the domain of a function (log of a non-positive value, etc.).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sfm
