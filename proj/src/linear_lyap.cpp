#include "predkit/linear_lyap.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "predkit/errors.hpp"
#include "predkit/gsr.hpp"

namespace predkit {

namespace detail {

TangentStepper::TangentStepper(const Model& model, int m)
    : model_(model),
      n_(model.dimension()),
      k1_(n_),
      k2_(n_),
      k3_(n_),
      k4_(n_),
      xt_(n_),
      jac_(static_cast<std::size_t>(n_) * n_) {
    l1_.assign(m, State(n_));
    l2_.assign(m, State(n_));
    l3_.assign(m, State(n_));
    l4_.assign(m, State(n_));
    dt_.assign(m, State(n_));
}

namespace {

inline void matvec(const std::vector<double>& jac, int n, const State& v, State& out) {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = jac.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) s += row[j] * v[j];
        out[i] = s;
    }
}

}  // namespace

void TangentStepper::stages(double h, const State& x, std::vector<State>& deltas) {
    const int n = n_;
    const std::size_t m = deltas.size();

    model_.drift(x, k1_);
    model_.jacobian(x, jac_);
    for (std::size_t j = 0; j < m; ++j) matvec(jac_, n, deltas[j], l1_[j]);

    for (int i = 0; i < n; ++i) xt_[i] = x[i] + 0.5 * h * k1_[i];
    model_.drift(xt_, k2_);
    model_.jacobian(xt_, jac_);
    for (std::size_t j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) dt_[j][i] = deltas[j][i] + 0.5 * h * l1_[j][i];
        matvec(jac_, n, dt_[j], l2_[j]);
    }

    for (int i = 0; i < n; ++i) xt_[i] = x[i] + 0.5 * h * k2_[i];
    model_.drift(xt_, k3_);
    model_.jacobian(xt_, jac_);
    for (std::size_t j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) dt_[j][i] = deltas[j][i] + 0.5 * h * l2_[j][i];
        matvec(jac_, n, dt_[j], l3_[j]);
    }

    for (int i = 0; i < n; ++i) xt_[i] = x[i] + h * k3_[i];
    model_.jacobian(xt_, jac_);
    for (std::size_t j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) dt_[j][i] = deltas[j][i] + h * l3_[j][i];
        matvec(jac_, n, dt_[j], l4_[j]);
    }

    const double w = h / 6.0;
    for (std::size_t j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) {
            deltas[j][i] += w * (l1_[j][i] + 2.0 * l2_[j][i] + 2.0 * l3_[j][i] + l4_[j][i]);
        }
    }
}

void TangentStepper::step(double h, State& x, std::vector<State>& deltas) {
    stages(h, x, deltas);
    // xt_ still holds the fourth substage state x + h*k3.
    model_.drift(xt_, k4_);
    const double w = h / 6.0;
    for (int i = 0; i < n_; ++i) {
        x[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
}

void TangentStepper::step_along(double h, const State& x, std::vector<State>& deltas) {
    stages(h, x, deltas);
}

}  // namespace detail

namespace {

void check_direction(const Model& model, const State& direction, const char* who) {
    if (static_cast<int>(direction.size()) != model.dimension()) {
        throw std::invalid_argument(std::string(who) + ": perturbation dimension mismatch");
    }
    if (norm2(direction) == 0.0) {
        throw std::invalid_argument(std::string(who) + ": zero initial perturbation");
    }
}

}  // namespace

State tangent_propagate(const Model& model, const Trajectory& base, const State& delta0) {
    if (base.states.empty()) throw std::invalid_argument("tangent_propagate: empty trajectory");
    if (base.dimension() != model.dimension()) {
        throw std::invalid_argument("tangent_propagate: trajectory dimension mismatch");
    }
    check_direction(model, delta0, "tangent_propagate");

    detail::TangentStepper stepper(model, 1);
    std::vector<State> deltas{delta0};
    for (std::size_t i = 0; i + 1 < base.states.size(); ++i) {
        const double h = base.times[i + 1] - base.times[i];
        stepper.step_along(h, base.states[i], deltas);
    }
    return deltas[0];
}

double finite_time_lle(const Model& model, const State& x0, const State& direction,
                       double tau, double step) {
    if (tau <= 0.0) throw std::invalid_argument("finite_time_lle: tau must be > 0");
    check_direction(model, direction, "finite_time_lle");

    const double norm0 = norm2(direction);
    detail::TangentStepper stepper(model, 1);
    State x = x0;
    std::vector<State> deltas{direction};
    const auto plan = detail::plan_steps(tau, step);
    for (long long s = 0; s < plan.whole_steps; ++s) {
        stepper.step(step, x, deltas);
        detail::Rk4Stepper::check_escape(x, static_cast<double>(s + 1) * step);
    }
    if (plan.remainder > 0.0) {
        stepper.step(plan.remainder, x, deltas);
        detail::Rk4Stepper::check_escape(x, tau);
    }
    return std::log(norm2(deltas[0]) / norm0) / tau;
}

LyapunovSpectrum benettin_spectrum(const Model& model, const State& x0, double total_time,
                                   double renorm_interval, int m, double step) {
    const int n = model.dimension();
    if (m < 1 || m > n) throw std::invalid_argument("benettin_spectrum: need 1 <= m <= n");
    if (renorm_interval <= 0.0 || total_time < renorm_interval) {
        throw std::invalid_argument("benettin_spectrum: need total_time >= renorm_interval > 0");
    }
    if (static_cast<int>(x0.size()) != n) {
        throw std::invalid_argument("benettin_spectrum: state dimension mismatch");
    }

    const long long n_blocks = std::max<long long>(1, std::llround(total_time / renorm_interval));
    const auto block = detail::plan_steps(renorm_interval, std::min(step, renorm_interval));
    const double h = std::min(step, renorm_interval);

    detail::TangentStepper stepper(model, m);
    State x = x0;
    std::vector<State> deltas(m, State(n, 0.0));
    for (int i = 0; i < m; ++i) deltas[i][i] = 1.0;  // canonical frame

    std::vector<double> logsum(m, 0.0);
    std::vector<double> norms;
    for (long long b = 0; b < n_blocks; ++b) {
        const double t_block = static_cast<double>(b) * renorm_interval;
        for (long long s = 0; s < block.whole_steps; ++s) {
            stepper.step(h, x, deltas);
            detail::Rk4Stepper::check_escape(x, t_block + static_cast<double>(s + 1) * h);
        }
        if (block.remainder > 0.0) {
            stepper.step(block.remainder, x, deltas);
            detail::Rk4Stepper::check_escape(x, t_block + renorm_interval);
        }
        detail::gsr_inplace(deltas, norms);
        for (int i = 0; i < m; ++i) {
            logsum[i] += std::log(norms[i]);
            const double inv = 1.0 / norms[i];
            for (double& v : deltas[i]) v *= inv;
        }
    }

    LyapunovSpectrum spec;
    spec.total_time = static_cast<double>(n_blocks) * renorm_interval;
    spec.renorm_interval = renorm_interval;
    spec.exponents.resize(m);
    for (int i = 0; i < m; ++i) spec.exponents[i] = logsum[i] / spec.total_time;
    std::sort(spec.exponents.begin(), spec.exponents.end(), std::greater<double>());
    return spec;
}

}  // namespace predkit
