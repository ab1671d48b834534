#include "predkit/nlle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "predkit/errors.hpp"
#include "predkit/parallel.hpp"
#include "predkit/rng.hpp"

namespace predkit {

namespace {

void check_perturbation(const Model& model, const State& delta0, const char* who) {
    if (static_cast<int>(delta0.size()) != model.dimension()) {
        throw std::invalid_argument(std::string(who) + ": perturbation dimension mismatch");
    }
    if (!all_finite(delta0)) {
        throw std::invalid_argument(std::string(who) + ": non-finite perturbation");
    }
    if (norm2(delta0) == 0.0) {
        throw std::invalid_argument(std::string(who) + ": zero initial perturbation");
    }
}

std::vector<long long> tau_counts(const std::vector<double>& tau_grid, double step) {
    std::vector<long long> counts(tau_grid.size());
    long long prev = 0;
    for (std::size_t j = 0; j < tau_grid.size(); ++j) {
        long long c = std::max<long long>(1, std::llround(tau_grid[j] / step));
        if (c <= prev) c = prev + 1;
        counts[j] = c;
        prev = c;
    }
    return counts;
}

/// Exponents of one base/perturbed pair at every tau count. Writes K values
/// into `out`. Bit-identical to nlle_single at each snapped tau.
void pair_exponents(const Model& model, const State& x0, const State& delta0,
                    const std::vector<long long>& counts, double step, double* out) {
    const double norm0 = norm2(delta0);
    detail::Rk4Stepper base_stepper(model), pert_stepper(model);
    State xb = x0;
    State xp = x0;
    for (std::size_t i = 0; i < xp.size(); ++i) xp[i] += delta0[i];
    detail::Rk4Stepper::check_escape(xp, 0.0);

    std::size_t next = 0;
    for (long long s = 1; s <= counts.back(); ++s) {
        const double t = static_cast<double>(s) * step;
        base_stepper.step(step, xb);
        pert_stepper.step(step, xp);
        detail::Rk4Stepper::check_escape(xb, t);
        detail::Rk4Stepper::check_escape(xp, t);
        if (s == counts[next]) {
            out[next] = std::log(dist2(xp, xb) / norm0) / t;
            ++next;
        }
    }
}

[[noreturn]] void rethrow_annotated(const TrajectoryEscape& e, long long member,
                                    std::uint64_t seed) {
    std::ostringstream msg;
    msg << "ensemble member " << member << " (seed " << seed << "): " << e.what();
    TrajectoryEscape out(e.time(), msg.str());
    out.member = member;
    out.seed = seed;
    throw out;
}

void validate_tau_grid(const std::vector<double>& tau_grid, const char* who) {
    if (tau_grid.empty()) throw std::invalid_argument(std::string(who) + ": empty tau grid");
    double prev = 0.0;
    for (double tau : tau_grid) {
        if (!(tau > prev)) {
            throw std::invalid_argument(std::string(who) +
                                        ": tau grid must be positive and increasing");
        }
        prev = tau;
    }
}

}  // namespace

State nonlinear_propagate(const Model& model, const State& x0, const State& delta0,
                          double tau, double step) {
    if (tau <= 0.0) throw std::invalid_argument("nonlinear_propagate: tau must be > 0");
    if (static_cast<int>(x0.size()) != model.dimension()) {
        throw std::invalid_argument("nonlinear_propagate: state dimension mismatch");
    }
    check_perturbation(model, delta0, "nonlinear_propagate");

    detail::Rk4Stepper base_stepper(model), pert_stepper(model);
    State xb = x0;
    State xp = x0;
    for (std::size_t i = 0; i < xp.size(); ++i) xp[i] += delta0[i];
    detail::Rk4Stepper::check_escape(xb, 0.0);
    detail::Rk4Stepper::check_escape(xp, 0.0);

    const auto plan = detail::plan_steps(tau, step);
    for (long long s = 1; s <= plan.whole_steps; ++s) {
        const double t = static_cast<double>(s) * step;
        base_stepper.step(step, xb);
        pert_stepper.step(step, xp);
        detail::Rk4Stepper::check_escape(xb, t);
        detail::Rk4Stepper::check_escape(xp, t);
    }
    if (plan.remainder > 0.0) {
        base_stepper.step(plan.remainder, xb);
        pert_stepper.step(plan.remainder, xp);
        detail::Rk4Stepper::check_escape(xb, tau);
        detail::Rk4Stepper::check_escape(xp, tau);
    }
    State diff(xb.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = xp[i] - xb[i];
    return diff;
}

double nlle_single(const Model& model, const State& x0, const State& delta0, double tau,
                   double step) {
    const double norm0 = norm2(delta0);
    const State diff = nonlinear_propagate(model, x0, delta0, tau, step);
    return std::log(norm2(diff) / norm0) / tau;
}

NlleCurve mean_nlle_curve(const Model& model, const AttractorSample& sample,
                          const PerturbationSpec& pert, const std::vector<double>& tau_grid,
                          double step, int workers) {
    if (sample.points.empty()) throw std::invalid_argument("mean_nlle_curve: empty sample");
    if (pert.epsilon <= 0.0) throw std::invalid_argument("mean_nlle_curve: epsilon must be > 0");
    validate_tau_grid(tau_grid, "mean_nlle_curve");

    const int n = model.dimension();
    for (const auto& d : pert.explicit_directions) {
        if (static_cast<int>(d.size()) != n) {
            throw std::invalid_argument("mean_nlle_curve: direction dimension mismatch");
        }
        if (std::fabs(norm2(d) - 1.0) > 1e-12) {
            throw std::invalid_argument("mean_nlle_curve: explicit directions must be unit vectors");
        }
    }
    const long long n_dirs = pert.explicit_directions.empty()
                                 ? std::max(1, pert.directions_per_point)
                                 : static_cast<long long>(pert.explicit_directions.size());

    const auto counts = tau_counts(tau_grid, step);
    const std::size_t n_tau = counts.size();
    const long long members =
        static_cast<long long>(sample.points.size()) * n_dirs;

    std::vector<double> lambdas(static_cast<std::size_t>(members) * n_tau);
    parallel_for_slots(members, workers, [&](long long member) {
        const auto point = static_cast<std::size_t>(member / n_dirs);
        const auto dir = static_cast<std::size_t>(member % n_dirs);
        State delta0(n);
        if (pert.explicit_directions.empty()) {
            Rng rng = member_rng(pert.seed, static_cast<std::uint64_t>(member));
            rng.unit_sphere(delta0);
        } else {
            delta0 = pert.explicit_directions[dir];
        }
        for (double& v : delta0) v *= pert.epsilon;
        try {
            pair_exponents(model, sample.points[point], delta0, counts, step,
                           lambdas.data() + static_cast<std::size_t>(member) * n_tau);
        } catch (const TrajectoryEscape& e) {
            rethrow_annotated(e, member, pert.seed);
        }
    });

    NlleCurve curve;
    curve.ensemble_size = members;
    curve.seed = pert.seed;
    curve.tau_grid.resize(n_tau);
    curve.mean_nlle.resize(n_tau);
    curve.rgie.resize(n_tau);
    curve.std_error.resize(n_tau);
    for (std::size_t k = 0; k < n_tau; ++k) {
        const double tau = static_cast<double>(counts[k]) * step;
        double sum = 0.0;
        for (long long m = 0; m < members; ++m) {
            sum += lambdas[static_cast<std::size_t>(m) * n_tau + k];
        }
        const double mean = sum / static_cast<double>(members);
        double varsum = 0.0;
        for (long long m = 0; m < members; ++m) {
            const double d = lambdas[static_cast<std::size_t>(m) * n_tau + k] - mean;
            varsum += d * d;
        }
        curve.tau_grid[k] = tau;
        curve.mean_nlle[k] = mean;
        curve.rgie[k] = std::exp(mean * tau);
        curve.std_error[k] =
            members > 1 ? std::sqrt(varsum / (static_cast<double>(members - 1) *
                                              static_cast<double>(members)))
                        : 0.0;
    }
    return curve;
}

std::pair<double, double> saturation_and_limit(NlleCurve& curve, int window, double slope_tol,
                                               double theta) {
    const std::size_t n_tau = curve.rgie.size();
    if (window < 1) throw std::invalid_argument("saturation_and_limit: window must be >= 1");
    if (n_tau < 2 * static_cast<std::size_t>(window)) {
        throw std::invalid_argument("saturation_and_limit: curve needs at least 2*window points");
    }
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::invalid_argument("saturation_and_limit: theta must lie in (0, 1)");
    }
    if (!(slope_tol > 0.0)) {
        throw std::invalid_argument("saturation_and_limit: slope_tol must be > 0");
    }

    // Trailing maximal run whose neighboring points vary by at most slope_tol
    // relative. A saturated tail drifts far less than this per grid point; an
    // exponentially growing curve jumps far more.
    std::size_t start = n_tau - 1;
    while (start > 0) {
        const double a = curve.rgie[start - 1];
        const double b = curve.rgie[start];
        if (std::fabs(b - a) > slope_tol * std::min(a, b)) break;
        --start;
    }
    const std::size_t run = n_tau - start;
    if (run < static_cast<std::size_t>(window)) {
        std::ostringstream msg;
        msg << "saturation not reached: trailing stable run has " << run << " points, need "
            << window << " (tau grid too short)";
        throw SaturationNotReached(msg.str());
    }

    double e_sat = 0.0;
    for (std::size_t k = start; k < n_tau; ++k) e_sat += curve.rgie[k];
    e_sat /= static_cast<double>(run);

    const double level = (1.0 - theta) * e_sat;
    double t_p = curve.tau_grid.back();
    for (std::size_t k = 0; k < n_tau; ++k) {
        if (curve.rgie[k] >= level) {
            t_p = curve.tau_grid[k];
            break;
        }
    }

    curve.e_sat = e_sat;
    curve.t_p = t_p;
    return {e_sat, t_p};
}

NlleSpectrumResult nlle_spectrum(const Model& model, const AttractorSample& sample,
                                 const PerturbationSpec& pert, double tau,
                                 double renorm_interval, int m, double step, int workers) {
    const int n = model.dimension();
    if (m < 1 || m > n) throw std::invalid_argument("nlle_spectrum: need 1 <= m <= n");
    if (sample.points.empty()) throw std::invalid_argument("nlle_spectrum: empty sample");
    if (pert.epsilon <= 0.0) throw std::invalid_argument("nlle_spectrum: epsilon must be > 0");
    if (renorm_interval <= 0.0 || tau <= 0.0) {
        throw std::invalid_argument("nlle_spectrum: need tau, renorm_interval > 0");
    }
    const double ratio = tau / renorm_interval;
    const long long n_renorms = std::llround(ratio);
    if (n_renorms < 1 ||
        std::fabs(static_cast<double>(n_renorms) - ratio) > 1e-9 * std::max(1.0, ratio)) {
        throw std::invalid_argument("nlle_spectrum: tau must be a multiple of renorm_interval");
    }

    const long long block_steps =
        std::max<long long>(1, std::llround(renorm_interval / step));
    const double tau_actual =
        static_cast<double>(n_renorms) * static_cast<double>(block_steps) * step;
    const double eps = pert.epsilon;
    const long long members = static_cast<long long>(sample.points.size());

    // Per-member partial sums S_k = sum over renorms of sum_{i<=k} ln(w_i/eps).
    std::vector<double> partials(static_cast<std::size_t>(members) * m);
    parallel_for_slots(members, workers, [&](long long member) {
        detail::Rk4Stepper stepper(model);
        State xb = sample.points[static_cast<std::size_t>(member)];
        std::vector<State> perturbed(m, State(n));
        std::vector<State> frame(m, State(n, 0.0));
        for (int i = 0; i < m; ++i) {
            frame[i][i] = eps;  // canonical orthogonal frame at magnitude eps
            for (int c = 0; c < n; ++c) perturbed[i][c] = xb[c] + frame[i][c];
        }
        double* sums = partials.data() + static_cast<std::size_t>(member) * m;
        std::fill(sums, sums + m, 0.0);
        std::vector<double> norms;

        try {
            for (long long r = 0; r < n_renorms; ++r) {
                const double t0 =
                    static_cast<double>(r) * static_cast<double>(block_steps) * step;
                for (long long s = 1; s <= block_steps; ++s) {
                    const double t = t0 + static_cast<double>(s) * step;
                    stepper.step(step, xb);
                    detail::Rk4Stepper::check_escape(xb, t);
                    for (int i = 0; i < m; ++i) {
                        stepper.step(step, perturbed[i]);
                        detail::Rk4Stepper::check_escape(perturbed[i], t);
                    }
                }
                for (int i = 0; i < m; ++i) {
                    for (int c = 0; c < n; ++c) frame[i][c] = perturbed[i][c] - xb[c];
                }
                detail::gsr_inplace(frame, norms);
                double running = 0.0;
                for (int i = 0; i < m; ++i) {
                    running += std::log(norms[i] / eps);
                    sums[i] += running;
                    const double scale = eps / norms[i];
                    for (int c = 0; c < n; ++c) {
                        frame[i][c] *= scale;
                        perturbed[i][c] = xb[c] + frame[i][c];
                    }
                }
            }
        } catch (const TrajectoryEscape& e) {
            rethrow_annotated(e, member, pert.seed);
        } catch (const DependentFrame& e) {
            std::ostringstream msg;
            msg << "ensemble member " << member << ": " << e.what();
            throw DependentFrame(msg.str());
        }
    });

    NlleSpectrumResult result;
    result.tau = tau_actual;
    result.epsilon = eps;
    result.ensemble_size = members;
    result.exponents.resize(m);
    double prev_partial = 0.0;
    for (int i = 0; i < m; ++i) {
        double sum = 0.0;
        for (long long member = 0; member < members; ++member) {
            sum += partials[static_cast<std::size_t>(member) * m + i];
        }
        const double partial = sum / static_cast<double>(members) / tau_actual;
        result.exponents[i] = partial - prev_partial;
        prev_partial = partial;
    }
    return result;
}

LocalNlleRecord local_mean_nlle(const Model& model, const State& x0, double epsilon,
                                int n_directions, const std::vector<double>& tau_grid,
                                double theta, double step, std::uint64_t seed, int workers) {
    if (n_directions < 1) throw std::invalid_argument("local_mean_nlle: need N >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("local_mean_nlle: epsilon must be > 0");
    if (static_cast<int>(x0.size()) != model.dimension()) {
        throw std::invalid_argument("local_mean_nlle: state dimension mismatch");
    }
    validate_tau_grid(tau_grid, "local_mean_nlle");

    const int n = model.dimension();
    const auto counts = tau_counts(tau_grid, step);
    const std::size_t n_tau = counts.size();

    std::vector<double> lambdas(static_cast<std::size_t>(n_directions) * n_tau);
    parallel_for_slots(n_directions, workers, [&](long long member) {
        Rng rng = member_rng(seed, static_cast<std::uint64_t>(member));
        State delta0(n);
        rng.unit_sphere(delta0);
        for (double& v : delta0) v *= epsilon;
        try {
            pair_exponents(model, x0, delta0, counts, step,
                           lambdas.data() + static_cast<std::size_t>(member) * n_tau);
        } catch (const TrajectoryEscape& e) {
            rethrow_annotated(e, member, seed);
        }
    });

    LocalNlleRecord record;
    record.x0 = x0;
    record.tau_grid.resize(n_tau);
    record.local_mean_nlle.resize(n_tau);
    record.lrgie.resize(n_tau);
    for (std::size_t k = 0; k < n_tau; ++k) {
        const double tau = static_cast<double>(counts[k]) * step;
        double sum = 0.0;
        for (int d = 0; d < n_directions; ++d) {
            sum += lambdas[static_cast<std::size_t>(d) * n_tau + k];
        }
        const double mean = sum / static_cast<double>(n_directions);
        record.tau_grid[k] = tau;
        record.local_mean_nlle[k] = mean;
        record.lrgie[k] = std::exp(mean * tau);
    }

    // Local predictability limit, when the LRGIE curve has a plateau.
    constexpr int kWindow = 10;
    constexpr double kSlopeTol = 0.02;
    if (n_tau >= 2 * kWindow) {
        NlleCurve tmp;
        tmp.tau_grid = record.tau_grid;
        tmp.mean_nlle = record.local_mean_nlle;
        tmp.rgie = record.lrgie;
        try {
            auto [e_sat, t_p] = saturation_and_limit(tmp, kWindow, kSlopeTol, theta);
            (void)e_sat;
            record.local_t_p = t_p;
        } catch (const SaturationNotReached&) {
            // leave local_t_p empty
        }
    }
    return record;
}

std::vector<double> default_tau_grid(double step) {
    std::vector<double> taus;
    taus.reserve(120);
    const double lo = 0.05, knee = 1.0, hi = 30.0;
    const int n_geo = 40, n_lin = 80;
    for (int i = 0; i < n_geo; ++i) {
        taus.push_back(lo * std::pow(knee / lo, static_cast<double>(i) / (n_geo - 1)));
    }
    for (int j = 1; j <= n_lin; ++j) {
        taus.push_back(knee + (hi - knee) * static_cast<double>(j) / n_lin);
    }
    return snap_tau_grid(taus, step);
}

std::vector<double> snap_tau_grid(const std::vector<double>& tau_grid, double step) {
    if (step <= 0.0) throw std::invalid_argument("snap_tau_grid: step must be > 0");
    validate_tau_grid(tau_grid, "snap_tau_grid");
    const auto counts = tau_counts(tau_grid, step);
    std::vector<double> out(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) {
        out[j] = static_cast<double>(counts[j]) * step;
    }
    return out;
}

}  // namespace predkit
