#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polyfield {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    ThreeConcurrentLines,
    LineMissesDomain,
    NodeOnBoundary,
    TieBreakFailure,
    DegenerateDomain,
    NotALattice,
    AdmissibilityViolation,
    EnumerationTooLarge,
    OutOfOrderEvent,
    IllegalFlip,
    NoAccumulatorMass,
    IrreparableDegeneracy,
    EdgeOutsideImage,
    Io,
    Parse,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code identifies the failure class; the
/// message carries the location or offending values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace polyfield
