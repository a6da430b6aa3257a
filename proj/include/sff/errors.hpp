#pragma once

#include <stdexcept>
#include <string>

namespace sff {

// Bad inputs, broken invariants, malformed configs. CLI maps this to exit 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / serialization failures. CLI maps this to exit 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Referenced actor / lane / node does not exist.
class LookupError : public ValidationError {
public:
    explicit LookupError(const std::string& what) : ValidationError(what) {}
};

// Claimed-set window too small for the actor's stopping envelope.
class WindowOverflowError : public ValidationError {
public:
    explicit WindowOverflowError(const std::string& what) : ValidationError(what) {}
};

// Could not place the requested traffic on the map.
class SpawnError : public ValidationError {
public:
    explicit SpawnError(const std::string& what) : ValidationError(what) {}
};

// Optimizer produced a non-finite loss.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sff
