#ifndef SPECLAB_ERRORS_HPP
#define SPECLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace speclab {

// Validation failures: bad shapes, bad config values, bad CLI arguments.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / parse failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered during numerics (e.g. diverging training).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace speclab

#endif
