#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace ektau {

// Error taxonomy shared across modules.  Everything derives from
// std::runtime_error so callers can catch coarsely or precisely.

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedSpaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an immersion loses rank 2; carries the metric singular
// values of dF at the offending parameter point.
struct DegeneracyError : std::runtime_error {
    DegeneracyError(const std::string& what, double s1, double s2)
        : std::runtime_error(what), sigma1(s1), sigma2(s2) {}
    double sigma1;
    double sigma2;
};

// Raised by iterative solvers on non-convergence; carries the residual
// trace so the caller can diagnose.
struct SolverError : std::runtime_error {
    SolverError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("EKTAU_LOG");
        if (!env) return LogLevel::Error;
        const std::string s(env);
        if (s == "debug") return LogLevel::Debug;
        if (s == "info") return LogLevel::Info;
        return LogLevel::Error;
    }();
    return level;
}

inline void log_msg(LogLevel level, const char* fmt, ...) {
    if (level > log_level()) return;
    std::va_list args;
    va_start(args, fmt);
    std::fprintf(stderr, "[ektau] ");
    std::vfprintf(stderr, fmt, args);
    std::fprintf(stderr, "\n");
    va_end(args);
}

}  // namespace ektau
