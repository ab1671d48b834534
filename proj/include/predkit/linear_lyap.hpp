#pragma once

#include <vector>

#include "predkit/integrate.hpp"
#include "predkit/model.hpp"

namespace predkit {

/// A base point with m tangent vectors evolving under the tangent linear model.
struct TangentState {
    State base;
    std::vector<State> perturbations;
};

/// Linear Lyapunov spectrum from a long tangent integration with periodic GSR.
struct LyapunovSpectrum {
    std::vector<double> exponents;  // 1/time, nonincreasing
    double total_time = 0.0;
    double renorm_interval = 0.0;
};

/// Integrates d(delta)/dt = J(x(t)) delta along `base` on the identical RK4
/// grid; the Jacobian is re-evaluated at the RK4 substage states of the base
/// integration. Returns delta at the endpoint.
State tangent_propagate(const Model& model, const Trajectory& base, const State& delta0);

/// Finite-time linear Lyapunov exponent (1/tau) ln(|delta(tau)|/|delta0|)
/// computed through the tangent linear model. Invariant under positive scaling
/// of the direction.
double finite_time_lle(const Model& model, const State& x0, const State& direction,
                       double tau, double step);

/// Classical pull-back spectrum: m tangent vectors evolved jointly with the
/// base orbit, reorthonormalized by GSR every renorm_interval; exponents are
/// accumulated log norms over total_time, sorted nonincreasing.
LyapunovSpectrum benettin_spectrum(const Model& model, const State& x0, double total_time,
                                   double renorm_interval, int m, double step);

namespace detail {

/// Joint RK4 step of base + tangent frame. The base arithmetic is identical to
/// Rk4Stepper::step, so tangent propagation along a stored trajectory and
/// on-the-fly propagation agree bit for bit.
class TangentStepper {
public:
    TangentStepper(const Model& model, int m);

    void step(double h, State& x, std::vector<State>& deltas);

    /// Tangent-only step along one stored base interval (x is not advanced).
    void step_along(double h, const State& x, std::vector<State>& deltas);

private:
    void stages(double h, const State& x, std::vector<State>& deltas);

    const Model& model_;
    int n_;
    State k1_, k2_, k3_, k4_, xt_;
    std::vector<double> jac_;
    std::vector<State> l1_, l2_, l3_, l4_, dt_;
};

}  // namespace detail

}  // namespace predkit
