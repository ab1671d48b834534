#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "predkit/model.hpp"
#include "predkit/state.hpp"

namespace predkit {

/// Any state whose Euclidean norm exceeds this aborts the integration with a
/// TrajectoryEscape. Far outside every attractor this library studies.
inline constexpr double kEscapeNorm = 1e8;

/// Time-stamped sequence of states from one integration. Times are strictly
/// increasing with uniform spacing `step`, except that the final interval may
/// be shorter so the trajectory lands exactly on t0 + duration.
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;

    int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
    std::size_t size() const { return states.size(); }
    const State& final_state() const { return states.back(); }
};

/// Endpoints of repeated integrations along one long orbit; the base points
/// that ensemble averages run over.
struct AttractorSample {
    std::vector<State> points;
    double spinup = 0.0;
    double interval = 0.0;
    std::uint64_t seed = 0;
};

/// Classical fixed-step RK4. The final partial step is shortened to land
/// exactly on t0 + duration. Deterministic: identical inputs give bit-identical
/// trajectories. Throws TrajectoryEscape if any state norm exceeds kEscapeNorm.
Trajectory integrate_trajectory(const Model& model, const State& x0, double t0,
                                double duration, double step);

/// Integrates `spinup` time units from x_init, then records a point every
/// `interval` until `count` points are collected. `seed` is recorded for
/// provenance only; the sampling itself is deterministic.
AttractorSample sample_attractor(const Model& model, const State& x_init, double spinup,
                                 long long count, double interval, double step,
                                 std::uint64_t seed = 0);

namespace detail {

/// Allocation-free RK4 stepping of a single state. Time is tracked by the
/// caller; steps are applied in place.
class Rk4Stepper {
public:
    explicit Rk4Stepper(const Model& model);

    /// One step of size h: x <- x + RK4 increment. No escape check.
    void step(double h, State& x);

    /// n steps of size h with the escape guard; t_of(i) supplies the time
    /// reported if step i blows up.
    void advance(long long n_steps, double h, State& x, double t_start);

    /// Throws TrajectoryEscape(t) if x is non-finite or beyond kEscapeNorm.
    static void check_escape(const State& x, double t);

private:
    const Model& model_;
    State k1_, k2_, k3_, k4_, xt_;
};

/// Number of whole steps plus remainder needed to cover `duration`.
/// remainder == 0 exactly when duration sits on the step lattice
/// (within 1e-12 relative).
struct StepPlan {
    long long whole_steps;
    double remainder;
};
StepPlan plan_steps(double duration, double step);

}  // namespace detail

}  // namespace predkit
