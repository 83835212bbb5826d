#pragma once

#include <stdexcept>
#include <string>

namespace ctq {

/// Error codes shared between the C++ core and the C API surface.
enum class ErrorCode {
    InvalidArgument = 1,
    NotSymmetric,
    NonzeroDiagonal,
    NotPositiveDefinite,
    EigendecompositionFailure,
    NodeAlreadyMeasured,
    DuplicateInputTag,
    ModeAlreadyMeasured,
    SingularSystem,
    IncompatibleGraph,
    ProtocolBroken,
    DimensionMismatch,
    NotSymplectic,
    DegenerateMarginal,
    NotFound,
    LabelCollision,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace ctq
