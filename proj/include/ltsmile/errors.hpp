#pragma once

#include <stdexcept>
#include <string>

namespace ltsmile {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the region where the quantity exists.
struct DomainError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct UnsupportedModel : Error { using Error::Error; };
// Fourier integrand has not decayed at the truncation point.
struct TruncationError : Error { using Error::Error; };
// Price outside the range reachable by Black-Scholes.
struct NoSolution : Error { using Error::Error; };
struct SingularityError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct DegenerateRegression : Error { using Error::Error; };
// Raised only when a caller asks for strict approximation quality.
struct ApproximationWarning : Error { using Error::Error; };

}  // namespace ltsmile
