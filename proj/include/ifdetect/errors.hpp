#pragma once

#include <stdexcept>
#include <string>

namespace ifd {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training data has fewer than p+2 samples.
struct TooFewSamples : Error {
    using Error::Error;
};

/// Sample covariance is singular or numerically near-singular.
struct SingularCovariance : Error {
    using Error::Error;
};

/// Vector dimension does not match the model dimension.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// Requested window exceeds the preceding inactive duration (Definition
/// prerequisite for appearance detectability).
struct WindowExceedsPrevQuiet : Error {
    using Error::Error;
};

/// Alarm delays requested for a window outside the admissible range.
struct NotDetectableWithW : Error {
    using Error::Error;
};

/// Permanent-fault detectability condition fails; the optimal window is
/// undefined.
struct NotPFDetectable : Error {
    using Error::Error;
};

/// Fault schedule episodes overlap or violate strict ordering.
struct OverlappingEpisodes : Error {
    using Error::Error;
};

/// Process state left its physical bounds during integration.
struct IntegrationDiverged : Error {
    using Error::Error;
};

/// Alarm evidence contradicts itself (an inferred lower bound exceeds the
/// upper bound, or a cross-window intersection is empty).
struct InconsistentAlarms : Error {
    using Error::Error;
};

/// Bank configured with an empty or inadmissible window set.
struct InvalidWindowSet : Error {
    using Error::Error;
};

/// Malformed input file; message carries row/column diagnostics.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace ifd
