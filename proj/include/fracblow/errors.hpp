#ifndef FRACBLOW_ERRORS_HPP
#define FRACBLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fracblow {

enum class ErrorCode {
    DomainError,
    InvalidSpec,
    NonConvergence,
    BracketError,
    InvalidLevel,
    SubcriticalityViolated,
    SupersolutionViolated,
    DivergentIntegrand,
    InsufficientWindow,
    DegenerateField,
    ConfigError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::BracketError: return "BracketError";
        case ErrorCode::InvalidLevel: return "InvalidLevel";
        case ErrorCode::SubcriticalityViolated: return "SubcriticalityViolated";
        case ErrorCode::SupersolutionViolated: return "SupersolutionViolated";
        case ErrorCode::DivergentIntegrand: return "DivergentIntegrand";
        case ErrorCode::InsufficientWindow: return "InsufficientWindow";
        case ErrorCode::DegenerateField: return "DegenerateField";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

} // namespace fracblow

#endif
