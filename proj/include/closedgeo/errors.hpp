#pragma once
#include <stdexcept>
#include <string>

namespace closedgeo {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CLOSEDGEO_ERROR(Name)                                   \
    class Name : public Error {                                 \
    public:                                                     \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

CLOSEDGEO_ERROR(ConfigError);
CLOSEDGEO_ERROR(PointsTooFar);
CLOSEDGEO_ERROR(NoConvergence);
CLOSEDGEO_ERROR(StepTooCoarse);
CLOSEDGEO_ERROR(ZeroLengthLoop);
CLOSEDGEO_ERROR(BasepointMismatch);
CLOSEDGEO_ERROR(InvalidLoop);
CLOSEDGEO_ERROR(PreconditionViolated);
CLOSEDGEO_ERROR(CollapsedToConstant);
CLOSEDGEO_ERROR(SpectralGapTooSmall);
CLOSEDGEO_ERROR(IntegrationFailure);
CLOSEDGEO_ERROR(EigenvalueOnGridAmbiguous);
CLOSEDGEO_ERROR(InconsistentSystem);
CLOSEDGEO_ERROR(GrowthFlagInconsistent);
CLOSEDGEO_ERROR(VariantMismatch);
CLOSEDGEO_ERROR(ModelMismatch);
CLOSEDGEO_ERROR(InsufficientSequence);
CLOSEDGEO_ERROR(SequenceTooShort);
CLOSEDGEO_ERROR(ParseError);
CLOSEDGEO_ERROR(AxiomViolation);
CLOSEDGEO_ERROR(NotAllGeodesicsClosed);

#undef CLOSEDGEO_ERROR

}  // namespace closedgeo
