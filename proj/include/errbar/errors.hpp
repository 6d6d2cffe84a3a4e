#pragma once

#include <stdexcept>
#include <string>

namespace errbar {

// Bad user input: config values, file schemas, shape mismatches.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Failure while fitting a model (e.g. the loss went non-finite).
// The CLI maps this to exit code 2.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace errbar
