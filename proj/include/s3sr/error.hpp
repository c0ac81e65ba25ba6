#pragma once

#include <stdexcept>
#include <string>

namespace s3sr {

enum class ErrorCode {
    NonUnitInput,
    ChartBoundary,
    EmptyInput,
    DomainError,
    ExcludedEndpoint,
    BranchInconsistency,
    NegativeRadicand,
    DegenerateOscillation,
    ArgumentOutOfRange,
    PoleCrossing,
    NoSolutionInBranchRange,
    BranchMismatch,
    StencilOutOfDomain,
    VerticalLineTarget,
    NoCriticalPointFound,
    SingularTau,
    NoRootInBranch,
    TurningPoint,
    NonConvergent,
    IllConditioned,
    StepSizeUnderflow,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonUnitInput: return "NonUnitInput";
    case ErrorCode::ChartBoundary: return "ChartBoundary";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ExcludedEndpoint: return "ExcludedEndpoint";
    case ErrorCode::BranchInconsistency: return "BranchInconsistency";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::DegenerateOscillation: return "DegenerateOscillation";
    case ErrorCode::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case ErrorCode::PoleCrossing: return "PoleCrossing";
    case ErrorCode::NoSolutionInBranchRange: return "NoSolutionInBranchRange";
    case ErrorCode::BranchMismatch: return "BranchMismatch";
    case ErrorCode::StencilOutOfDomain: return "StencilOutOfDomain";
    case ErrorCode::VerticalLineTarget: return "VerticalLineTarget";
    case ErrorCode::NoCriticalPointFound: return "NoCriticalPointFound";
    case ErrorCode::SingularTau: return "SingularTau";
    case ErrorCode::NoRootInBranch: return "NoRootInBranch";
    case ErrorCode::TurningPoint: return "TurningPoint";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace s3sr
