#pragma once

#include <stdexcept>
#include <string>

namespace ncerg {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSelfAdjoint : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InvalidFunctionSpec : Error { using Error::Error; };
struct NotPositive : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct InvalidP : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct TooManyItems : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct NotInvertible : Error { using Error::Error; };
struct TraceConditionViolated : Error { using Error::Error; };
struct BlockDimMismatch : Error { using Error::Error; };
struct EmptyInterval : Error { using Error::Error; };
struct LambdaNonpositive : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

} // namespace ncerg
