#pragma once

#include <stdexcept>
#include <string>

namespace tbn {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Format,     // malformed file, inconsistent encoding, bad shapes in a file
    Config,     // invalid network / DVS / accelerator configuration
    Overflow,   // partial sum left the 16-bit range
    Mismatch,   // simulator disagrees with the golden model
    Calibration // requested density cannot be reached
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace tbn
