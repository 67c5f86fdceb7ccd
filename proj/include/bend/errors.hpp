#pragma once

#include <stdexcept>
#include <string>

namespace bend {

enum class ErrKind {
    MultiplyConnectedDomain,
    ResolutionTooLow,
    DegenerateImmersion,
    OrientationUndecidable,
    CurvatureHypothesisViolated,
    FitUnstable,
    NegativeDiscriminant,
    SolverDiverged,
    InjectivityFailed,
    CurvatureProfileInvalid,
    JacobianSingular,
    IterationDiverged,
    ResidualAboveTolerance,
    VanishingOrderTooLow,
    DivisionUnstable,
    DeterminantTooSmall,
    VerificationFailed,
    ConfigError,
    MissingInput,
};

const char* to_string(ErrKind k);

class BendError : public std::runtime_error {
  public:
    BendError(ErrKind kind, const std::string& msg)
        : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

    ErrKind kind() const { return kind_; }

  private:
    ErrKind kind_;
};

} // namespace bend
