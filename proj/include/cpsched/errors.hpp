#pragma once

#include <stdexcept>
#include <string>

namespace cpsched {

// Error categories, mapped to CLI exit codes (see README).
enum class ErrorCategory {
    invalid_input,  // bad field values, broken invariants, bad config
    infeasible,     // instance cannot be scheduled on the given cluster
    io,             // file cannot be opened/read/written
    parse,          // malformed or schema-violating input file
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

    static const char* category_name(ErrorCategory c) {
        switch (c) {
            case ErrorCategory::invalid_input: return "invalid_input";
            case ErrorCategory::infeasible: return "infeasible";
            case ErrorCategory::io: return "io";
            case ErrorCategory::parse: return "parse";
        }
        return "unknown";
    }

private:
    ErrorCategory category_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& message)
        : Error(ErrorCategory::invalid_input, message) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& message)
        : Error(ErrorCategory::infeasible, message) {}
};

struct IoError : Error {
    explicit IoError(const std::string& message)
        : Error(ErrorCategory::io, message) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& message)
        : Error(ErrorCategory::parse, message) {}
};

}  // namespace cpsched
