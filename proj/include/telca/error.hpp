#pragma once

#include <stdexcept>
#include <string>

namespace telca {

/// Invalid numeric argument or parameter value. The message names the field.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Grid geometry that the model cannot run on (e.g. smaller than 3x3).
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Not enough usable data points to produce an estimate.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace telca
