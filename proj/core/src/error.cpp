#include "affinegas/error.hpp"

namespace affinegas {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::NonPositiveDeterminant: return "NonPositiveDeterminant";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::TrajectoryTooShort: return "TrajectoryTooShort";
        case ErrorKind::QuadratureFailure: return "QuadratureFailure";
        case ErrorKind::SigmaOutOfRange: return "SigmaOutOfRange";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::InsufficientFrames: return "InsufficientFrames";
        case ErrorKind::JacobianDegenerate: return "JacobianDegenerate";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::BudgetInfeasible: return "BudgetInfeasible";
        case ErrorKind::AprioriViolated: return "AprioriViolated";
        case ErrorKind::CflFailure: return "CflFailure";
        case ErrorKind::StencilUnderflow: return "StencilUnderflow";
        case ErrorKind::EmptySupport: return "EmptySupport";
        case ErrorKind::WindowTooShort: return "WindowTooShort";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::LedgerCorrupt: return "LedgerCorrupt";
    }
    return "Unknown";
}

}  // namespace affinegas
