#include "polyfield/error.hpp"

namespace polyfield {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ThreeConcurrentLines: return "ThreeConcurrentLines";
    case ErrorCode::LineMissesDomain: return "LineMissesDomain";
    case ErrorCode::NodeOnBoundary: return "NodeOnBoundary";
    case ErrorCode::TieBreakFailure: return "TieBreakFailure";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::NotALattice: return "NotALattice";
    case ErrorCode::AdmissibilityViolation: return "AdmissibilityViolation";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::OutOfOrderEvent: return "OutOfOrderEvent";
    case ErrorCode::IllegalFlip: return "IllegalFlip";
    case ErrorCode::NoAccumulatorMass: return "NoAccumulatorMass";
    case ErrorCode::IrreparableDegeneracy: return "IrreparableDegeneracy";
    case ErrorCode::EdgeOutsideImage: return "EdgeOutsideImage";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

} // namespace polyfield
