#pragma once

#include <stdexcept>
#include <string>

namespace openable {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad values fed to a geometry/kinematics operation (zero axis, degenerate
// OBB, rank-deficient rotation, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// A file violated the schema or a declared invariant. Messages carry the
// offending field path, e.g. "frames[3].annotations[0].bbox".
class ValidationError : public Error {
public:
    using Error::Error;
};

// Ground truth and predictions do not describe the same set of frames.
class AlignmentError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInputError(msg);
}

}  // namespace openable
