#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace lineext {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Base class for all failures raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Curve construction / validation.
struct CurvatureViolation : Error { using Error::Error; };
struct NotInterior : Error { using Error::Error; };

// Plane and surface classification.
struct DegenerateTangency : Error { using Error::Error; };
struct OnCurveError : Error { using Error::Error; };

// Contour machinery.
struct TooCloseToContour : Error { using Error::Error; };
struct InadmissibleC : Error { using Error::Error; };
struct BranchTrackingError : Error { using Error::Error; };
struct DegenerateAnnulus : Error { using Error::Error; };

// Extension operators.
struct RegionError : Error { using Error::Error; };
struct UnreachablePoint : Error { using Error::Error; };

// Fitting.
struct IllConditionedFit : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// Spec-string / file parsing.
struct ParseError : Error { using Error::Error; };

} // namespace lineext
