#pragma once

#include <stdexcept>
#include <string>

namespace realize {

/// Failure categories reported by the library. The CLI maps all of them to
/// exit code 1 except where noted in the tool.
enum class ErrorKind {
    InvalidDistribution,
    InvalidDiscount,
    InvalidIndex,
    InvalidProbability,
    DimensionMismatch,
    PolicySpaceTooLarge,
    SearchSpaceTooLarge,
    SingularSystem,
    EmptySoap,
    InconsistentOrder,
    InvalidTask,
    StateActionMismatch,
    MalformedProgram,
    EntropyOutOfRange,
    InvalidConfig,
    Parse,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::InvalidDiscount: return "InvalidDiscount";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::PolicySpaceTooLarge: return "PolicySpaceTooLarge";
    case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::EmptySoap: return "EmptySoap";
    case ErrorKind::InconsistentOrder: return "InconsistentOrder";
    case ErrorKind::InvalidTask: return "InvalidTask";
    case ErrorKind::StateActionMismatch: return "StateActionMismatch";
    case ErrorKind::MalformedProgram: return "MalformedProgram";
    case ErrorKind::EntropyOutOfRange: return "EntropyOutOfRange";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace realize
