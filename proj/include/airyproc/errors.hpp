#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace airyproc {

/// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical refinement did not settle. Carries the last two estimates so
/// callers can report how far apart they were.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double previous, double latest)
      : std::runtime_error(what + " (estimates " + format(previous) + " vs " + format(latest) + ")"),
        previous_(previous),
        latest_(latest) {}

  double previous() const noexcept { return previous_; }
  double latest() const noexcept { return latest_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
  }

  double previous_;
  double latest_;
};

/// Monte Carlo run produced too few usable samples for a statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace airyproc
