// error.hpp: exception hierarchy shared by all ccqed modules

#pragma once

#include <stdexcept>
#include <string>

namespace ccqed {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition or invariant violation on caller-supplied data.
struct InvalidArgument : Error {
    using Error::Error;
};

// An iterative routine (eigen refinement, Gauss-Newton) hit its iteration cap.
struct ConvergenceError : Error {
    using Error::Error;
};

// The requested physical quantity is degenerate (e.g. zero total loss, zero energy).
struct DegenerateError : Error {
    using Error::Error;
};

struct IntegrationInstability : Error {
    using Error::Error;
};

// Time window of the reconstruction is longer than the continuum recurrence time.
struct AliasingError : Error {
    using Error::Error;
};

struct InfeasibleTarget : Error {
    using Error::Error;
};

// Config syntax/schema errors; `path` is the dotted JSON field path when known.
struct ConfigError : Error {
    ConfigError(const std::string& path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace ccqed
