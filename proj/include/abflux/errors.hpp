#pragma once

#include <stdexcept>
#include <string>

namespace abflux {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TangentialHit : Error {
    using Error::Error;
};

struct DegenerateGeometry : Error {
    using Error::Error;
};

struct TrappedRay : Error {
    using Error::Error;
};

struct ClearanceTooLarge : Error {
    using Error::Error;
};

struct QuadratureNonconvergent : Error {
    using Error::Error;
};

struct InvalidScenario : Error {
    using Error::Error;
};

struct StepTooLarge : Error {
    using Error::Error;
};

struct SingularGauge : Error {
    using Error::Error;
};

struct UndersampledLoop : Error {
    using Error::Error;
};

struct PathBlocked : Error {
    using Error::Error;
};

struct PreconditionViolated : Error {
    using Error::Error;
};

struct LinearSolveFailure : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

}  // namespace abflux
