#pragma once

#include <stdexcept>
#include <string>

namespace laxhopf {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define LAXHOPF_ERROR(Name)                                             \
    struct Name : Error {                                               \
        explicit Name(const std::string& what) : Error(what) {}         \
    }

LAXHOPF_ERROR(SpacingBelowJam);
LAXHOPF_ERROR(ConjugateOutOfDomain);
LAXHOPF_ERROR(DensityOutOfRange);
LAXHOPF_ERROR(InconsistentDiagram);
LAXHOPF_ERROR(NonMonotoneLabels);
LAXHOPF_ERROR(NegativeSpacing);
LAXHOPF_ERROR(NonMonotoneTimes);
LAXHOPF_ERROR(NegativeSpeed);
LAXHOPF_ERROR(PointOutsideDomain);
LAXHOPF_ERROR(GridTooCoarse);
LAXHOPF_ERROR(ValueOutOfRange);
LAXHOPF_ERROR(NotStrictlyMonotone);
LAXHOPF_ERROR(PreconditionViolated);
LAXHOPF_ERROR(CFLViolation);
LAXHOPF_ERROR(EmptyTrajectory);
LAXHOPF_ERROR(PositionNotReached);
LAXHOPF_ERROR(NoCrossing);
LAXHOPF_ERROR(UnknownScenario);
LAXHOPF_ERROR(ParseError);

#undef LAXHOPF_ERROR

}  // namespace laxhopf
