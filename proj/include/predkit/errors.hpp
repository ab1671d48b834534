#pragma once

#include <stdexcept>
#include <string>

namespace predkit {

/// A trajectory left the integration domain (state norm above the escape
/// threshold, or a non-finite component appeared). Carries the model time of
/// blow-up and, for ensemble runs, the member index and seed that produced it.
class TrajectoryEscape : public std::runtime_error {
public:
    TrajectoryEscape(double time, std::string what)
        : std::runtime_error(std::move(what)), time_(time) {}

    double time() const noexcept { return time_; }

    long long member = -1;    // ensemble member index, -1 outside ensembles
    unsigned long long seed = 0;

private:
    double time_;
};

/// GSR produced a numerically dependent vector (norm below threshold): the
/// ensemble has collapsed onto a lower-dimensional frame.
class DependentFrame : public std::runtime_error {
public:
    explicit DependentFrame(std::string what) : std::runtime_error(std::move(what)) {}
};

/// No trailing plateau found in an RGIE curve; the tau grid is too short.
class SaturationNotReached : public std::runtime_error {
public:
    explicit SaturationNotReached(std::string what) : std::runtime_error(std::move(what)) {}
};

/// Configuration rejected before any computation; message lists every
/// offending key.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::string what) : std::runtime_error(std::move(what)) {}
};

}  // namespace predkit
