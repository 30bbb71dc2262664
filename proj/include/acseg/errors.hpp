#ifndef ACSEG_ERRORS_HPP
#define ACSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace acseg {

// File could not be read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File exists but its contents are not in a supported format.
struct FormatError : IoError {
    using IoError::IoError;
};

// An iterative computation failed to reach its declared accuracy.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace acseg

#endif
