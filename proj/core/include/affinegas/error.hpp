#pragma once

#include <stdexcept>
#include <string>

namespace affinegas {

enum class ErrorKind {
    SingularMatrix,
    NotSymmetric,
    NotPositiveDefinite,
    NonPositiveDeterminant,
    StepFailure,
    TrajectoryTooShort,
    QuadratureFailure,
    SigmaOutOfRange,
    OutOfRange,
    InsufficientFrames,
    JacobianDegenerate,
    ShapeMismatch,
    BudgetInfeasible,
    AprioriViolated,
    CflFailure,
    StencilUnderflow,
    EmptySupport,
    WindowTooShort,
    ConfigInvalid,
    LedgerCorrupt,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// ConfigInvalid carrying the offending key path.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& detail)
        : Error(ErrorKind::ConfigInvalid, field + ": " + detail), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace affinegas
