#include "bend/errors.hpp"

namespace bend {

const char* to_string(ErrKind k) {
    switch (k) {
        case ErrKind::MultiplyConnectedDomain: return "MultiplyConnectedDomain";
        case ErrKind::ResolutionTooLow: return "ResolutionTooLow";
        case ErrKind::DegenerateImmersion: return "DegenerateImmersion";
        case ErrKind::OrientationUndecidable: return "OrientationUndecidable";
        case ErrKind::CurvatureHypothesisViolated: return "CurvatureHypothesisViolated";
        case ErrKind::FitUnstable: return "FitUnstable";
        case ErrKind::NegativeDiscriminant: return "NegativeDiscriminant";
        case ErrKind::SolverDiverged: return "SolverDiverged";
        case ErrKind::InjectivityFailed: return "InjectivityFailed";
        case ErrKind::CurvatureProfileInvalid: return "CurvatureProfileInvalid";
        case ErrKind::JacobianSingular: return "JacobianSingular";
        case ErrKind::IterationDiverged: return "IterationDiverged";
        case ErrKind::ResidualAboveTolerance: return "ResidualAboveTolerance";
        case ErrKind::VanishingOrderTooLow: return "VanishingOrderTooLow";
        case ErrKind::DivisionUnstable: return "DivisionUnstable";
        case ErrKind::DeterminantTooSmall: return "DeterminantTooSmall";
        case ErrKind::VerificationFailed: return "VerificationFailed";
        case ErrKind::ConfigError: return "ConfigError";
        case ErrKind::MissingInput: return "MissingInput";
    }
    return "UnknownError";
}

} // namespace bend
