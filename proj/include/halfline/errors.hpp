#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace halfline {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad index, bad config, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Combinatorial enumeration or state-space size exceeds the hard cap.
class SizeLimitError : public Error {
public:
  using Error::Error;
};

/// A denominator fell below the singularity threshold. Callers treat this
/// as "move the contour", never as a value.
class SingularityError : public Error {
public:
  using Error::Error;
};

/// Adaptive refinement hit its resolution cap before meeting tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::complex<double> previous,
                   std::complex<double> last, long points)
      : Error(what), previous_(previous), last_(last), points_(points) {}

  std::complex<double> previous() const noexcept { return previous_; }
  std::complex<double> last() const noexcept { return last_; }
  long points() const noexcept { return points_; }

private:
  std::complex<double> previous_;
  std::complex<double> last_;
  long points_;
};

inline constexpr double kSingularityThreshold = 1e-300;

}  // namespace halfline
