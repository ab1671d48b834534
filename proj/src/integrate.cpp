#include "predkit/integrate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "predkit/errors.hpp"

namespace predkit {

namespace detail {

Rk4Stepper::Rk4Stepper(const Model& model)
    : model_(model),
      k1_(model.dimension()),
      k2_(model.dimension()),
      k3_(model.dimension()),
      k4_(model.dimension()),
      xt_(model.dimension()) {}

void Rk4Stepper::step(double h, State& x) {
    const std::size_t n = x.size();
    model_.drift(x, k1_);
    for (std::size_t i = 0; i < n; ++i) xt_[i] = x[i] + 0.5 * h * k1_[i];
    model_.drift(xt_, k2_);
    for (std::size_t i = 0; i < n; ++i) xt_[i] = x[i] + 0.5 * h * k2_[i];
    model_.drift(xt_, k3_);
    for (std::size_t i = 0; i < n; ++i) xt_[i] = x[i] + h * k3_[i];
    model_.drift(xt_, k4_);
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
}

void Rk4Stepper::advance(long long n_steps, double h, State& x, double t_start) {
    for (long long s = 0; s < n_steps; ++s) {
        step(h, x);
        double sq = 0.0;
        for (double v : x) sq += v * v;
        if (!(sq <= kEscapeNorm * kEscapeNorm)) {  // catches NaN as well
            check_escape(x, t_start + static_cast<double>(s + 1) * h);
        }
    }
}

void Rk4Stepper::check_escape(const State& x, double t) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    if (!(sq <= kEscapeNorm * kEscapeNorm)) {
        std::ostringstream msg;
        msg << "trajectory escape at t=" << t << " (state norm " << std::sqrt(sq)
            << " beyond " << kEscapeNorm << ")";
        throw TrajectoryEscape(t, msg.str());
    }
}

StepPlan plan_steps(double duration, double step) {
    const long long rounded = static_cast<long long>(std::llround(duration / step));
    if (std::fabs(static_cast<double>(rounded) * step - duration) <=
        1e-12 * std::max(1.0, std::fabs(duration))) {
        return {rounded, 0.0};
    }
    const long long whole = static_cast<long long>(std::floor(duration / step));
    return {whole, duration - static_cast<double>(whole) * step};
}

}  // namespace detail

Trajectory integrate_trajectory(const Model& model, const State& x0, double t0,
                                double duration, double step) {
    if (static_cast<int>(x0.size()) != model.dimension()) {
        throw std::invalid_argument("integrate_trajectory: state dimension mismatch");
    }
    if (!all_finite(x0)) {
        throw std::invalid_argument("integrate_trajectory: non-finite initial state");
    }
    if (duration < 0.0) {
        throw std::invalid_argument("integrate_trajectory: negative duration");
    }
    detail::Rk4Stepper::check_escape(x0, t0);

    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.push_back(x0);
    if (duration == 0.0) return traj;

    if (step <= 0.0 || step > duration) {
        throw std::invalid_argument("integrate_trajectory: need 0 < step <= duration");
    }

    const auto plan = detail::plan_steps(duration, step);
    detail::Rk4Stepper stepper(model);
    State x = x0;
    for (long long i = 1; i <= plan.whole_steps; ++i) {
        stepper.step(step, x);
        const double t = (i == plan.whole_steps && plan.remainder == 0.0)
                             ? t0 + duration
                             : t0 + static_cast<double>(i) * step;
        detail::Rk4Stepper::check_escape(x, t);
        traj.times.push_back(t);
        traj.states.push_back(x);
    }
    if (plan.remainder > 0.0) {
        stepper.step(plan.remainder, x);
        detail::Rk4Stepper::check_escape(x, t0 + duration);
        traj.times.push_back(t0 + duration);
        traj.states.push_back(x);
    }
    return traj;
}

AttractorSample sample_attractor(const Model& model, const State& x_init, double spinup,
                                 long long count, double interval, double step,
                                 std::uint64_t seed) {
    if (spinup <= 0.0) throw std::invalid_argument("sample_attractor: spinup must be > 0");
    if (count < 1) throw std::invalid_argument("sample_attractor: count must be >= 1");
    if (interval <= 0.0) throw std::invalid_argument("sample_attractor: interval must be > 0");
    if (static_cast<int>(x_init.size()) != model.dimension()) {
        throw std::invalid_argument("sample_attractor: state dimension mismatch");
    }

    AttractorSample sample;
    sample.spinup = spinup;
    sample.interval = interval;
    sample.seed = seed;
    sample.points.reserve(static_cast<std::size_t>(count));

    State x = integrate_trajectory(model, x_init, 0.0, spinup, std::min(step, spinup))
                  .final_state();
    sample.points.push_back(x);

    detail::Rk4Stepper stepper(model);
    const auto plan = detail::plan_steps(interval, std::min(step, interval));
    const double h = std::min(step, interval);
    for (long long p = 1; p < count; ++p) {
        const double t_base = spinup + static_cast<double>(p - 1) * interval;
        stepper.advance(plan.whole_steps, h, x, t_base);
        if (plan.remainder > 0.0) {
            stepper.step(plan.remainder, x);
            detail::Rk4Stepper::check_escape(x, t_base + interval);
        }
        sample.points.push_back(x);
    }

    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.points.size(); ++j) {
            if (sample.points[i] == sample.points[j]) {
                std::ostringstream msg;
                msg << "sample_attractor: points " << i << " and " << j
                    << " coincide exactly; the orbit has collapsed onto a fixed point "
                       "(shorten spinup or pick a chaotic regime)";
                throw std::runtime_error(msg.str());
            }
        }
    }
    return sample;
}

}  // namespace predkit
