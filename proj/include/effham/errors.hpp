#pragma once

#include <stdexcept>
#include <string>

namespace effham {

/// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define EFFHAM_DEFINE_ERROR(Name)                                  \
    struct Name : Error {                                          \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

EFFHAM_DEFINE_ERROR(NonPeriodic);
EFFHAM_DEFINE_ERROR(InvalidField);
EFFHAM_DEFINE_ERROR(DomainTooSmall);
EFFHAM_DEFINE_ERROR(RangeExceeded);
EFFHAM_DEFINE_ERROR(OutOfDomain);
EFFHAM_DEFINE_ERROR(NewtonDivergence);
EFFHAM_DEFINE_ERROR(StepTooLarge);
EFFHAM_DEFINE_ERROR(GridMismatch);
EFFHAM_DEFINE_ERROR(ClassNotFound);
EFFHAM_DEFINE_ERROR(NotConvex);
EFFHAM_DEFINE_ERROR(WindowTooSmall);
EFFHAM_DEFINE_ERROR(NotMechanical);
EFFHAM_DEFINE_ERROR(BackendInvalid);
EFFHAM_DEFINE_ERROR(ResolutionBudget);
EFFHAM_DEFINE_ERROR(ConfigInvalid);
EFFHAM_DEFINE_ERROR(SchemaMismatch);

#undef EFFHAM_DEFINE_ERROR

} // namespace effham
