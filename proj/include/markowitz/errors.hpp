#pragma once

#include <stdexcept>
#include <string>

namespace markowitz {

/// Base class for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- market validation ---

struct NonFiniteError : Error {
    using Error::Error;
};

struct NotSymmetricError : Error {
    using Error::Error;
};

struct NotPositiveSemidefiniteError : Error {
    using Error::Error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

// --- transforms and classification ---

struct SingularTransformError : Error {
    using Error::Error;
};

struct ArbitrageMarketError : Error {
    using Error::Error;
};

struct IllConditionedError : Error {
    using Error::Error;
};

struct DegenerateMarketError : Error {
    using Error::Error;
};

struct UnsupportedCostClassError : Error {
    using Error::Error;
};

// --- optimization ---

struct InfeasibleTargetError : Error {
    using Error::Error;
};

struct ZeroCostPortfolioError : Error {
    using Error::Error;
};

struct ZeroCostMarketError : Error {
    using Error::Error;
};

struct ZeroGError : Error {
    using Error::Error;
};

struct GNotPositiveError : Error {
    using Error::Error;
};

// --- io ---

struct ParseError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

} // namespace markowitz
