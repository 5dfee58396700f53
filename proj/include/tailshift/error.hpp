#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tailshift {

// Machine-readable failure classes. The CLI maps these onto exit codes and
// the "category" field of its error document.
enum class ErrorCategory {
    InvalidInput,     // rejected data or parameters
    TooShort,         // series/segment too short for the requested operation
    Degenerate,       // zero self-normalizer, zero dispersion, degenerate path
    MissingTable,     // no critical-value table for the requested key
    Io,               // file system / parse failures
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

// Raised when an interval or statistic collapses; carries the value the
// computation was centered on so callers can still report it.
class DegenerateError : public Error {
public:
    DegenerateError(const std::string& what, double center)
        : Error(ErrorCategory::Degenerate, what), center_(center) {}

    double center() const noexcept { return center_; }

private:
    double center_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& what) { throw Error(c, what); }

inline void require(bool cond, ErrorCategory c, const std::string& what) {
    if (!cond) fail(c, what);
}

}  // namespace tailshift
