#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace subsense {

/// Input that violates a documented precondition (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: singular system, non-convergence, etc. (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Warnings go through a process-wide sink; default prints to stderr.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace subsense
