#include "predkit/bifurcation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "predkit/errors.hpp"
#include "predkit/integrate.hpp"
#include "predkit/parallel.hpp"
#include "predkit/rng.hpp"

namespace predkit {

namespace {

constexpr double kDegenerateTol = 1e-8;
constexpr double kResidualTarget = 1e-10;
constexpr double kDedupeDistance = 1e-6;
constexpr int kNewtonMaxIter = 50;

Eigen::MatrixXd jacobian_matrix(const Model& model, const State& x) {
    const int n = model.dimension();
    std::vector<double> jac(static_cast<std::size_t>(n) * n);
    model.jacobian(x, jac);
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out(i, j) = jac[static_cast<std::size_t>(i) * n + j];
    }
    return out;
}

double drift_norm(const Model& model, const State& x) {
    State f(x.size());
    model.drift(x, f);
    return norm2(f);
}

std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& jac) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(jac);
    std::vector<std::complex<double>> eigs(static_cast<std::size_t>(jac.rows()));
    for (int i = 0; i < jac.rows(); ++i) eigs[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
    std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eigs;
}

StabilityClass classify_eigenvalues(const std::vector<std::complex<double>>& eigs) {
    bool any_near_zero = false;
    bool any_pos = false, any_neg = false, any_imag = false;
    for (const auto& e : eigs) {
        if (std::fabs(e.real()) <= kDegenerateTol) any_near_zero = true;
        if (e.real() > 0.0) any_pos = true;
        if (e.real() < 0.0) any_neg = true;
        if (std::fabs(e.imag()) > kDegenerateTol) any_imag = true;
    }
    if (any_near_zero) return StabilityClass::Degenerate;
    if (any_pos && any_neg) return StabilityClass::Saddle;
    if (any_neg) return any_imag ? StabilityClass::StableFocus : StabilityClass::StableNode;
    return any_imag ? StabilityClass::UnstableFocus : StabilityClass::UnstableNode;
}

/// Damped Newton from one seed. Returns the root on convergence to
/// kResidualTarget; empty on failure. Sets `singular` when a Jacobian could
/// not be inverted at an iterate.
std::optional<State> newton_root(const Model& model, State x, double newton_tol,
                                 bool& singular) {
    const int n = model.dimension();
    State f(n), trial(n), ftrial(n);
    singular = false;
    model.drift(x, f);
    double fnorm = norm2(f);

    for (int iter = 0; iter < kNewtonMaxIter; ++iter) {
        if (fnorm <= kResidualTarget) return x;
        Eigen::MatrixXd jac = jacobian_matrix(model, x);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) {
            singular = true;
            return std::nullopt;
        }
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) rhs(i) = -f[i];
        Eigen::VectorXd dx = lu.solve(rhs);

        // Halve the step until the residual stops growing.
        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            for (int i = 0; i < n; ++i) trial[i] = x[i] + alpha * dx(i);
            if (all_finite(trial)) {
                model.drift(trial, ftrial);
                const double tnorm = norm2(ftrial);
                if (tnorm < fnorm || fnorm <= newton_tol) {
                    x = trial;
                    f = ftrial;
                    fnorm = tnorm;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) return std::nullopt;
    }
    return fnorm <= kResidualTarget ? std::optional<State>(x) : std::nullopt;
}

}  // namespace

const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::StableNode: return "stable-node";
        case StabilityClass::UnstableNode: return "unstable-node";
        case StabilityClass::Saddle: return "saddle";
        case StabilityClass::StableFocus: return "stable-focus";
        case StabilityClass::UnstableFocus: return "unstable-focus";
        case StabilityClass::Center: return "center";
        case StabilityClass::Degenerate: return "degenerate";
    }
    return "degenerate";
}

std::unique_ptr<Model> ModelFamily::at(double value) const {
    auto params = base_params;
    params[parameter] = value;
    return make_model(model_name, params);
}

std::vector<FixedPointRecord> find_fixed_points(const Model& model, const State& box_lo,
                                                const State& box_hi, int grid_per_axis,
                                                double newton_tol,
                                                std::vector<State>* skipped_seeds) {
    const int n = model.dimension();
    if (static_cast<int>(box_lo.size()) != n || static_cast<int>(box_hi.size()) != n) {
        throw std::invalid_argument("find_fixed_points: box dimension mismatch");
    }
    for (int i = 0; i < n; ++i) {
        if (!(box_lo[i] < box_hi[i])) {
            throw std::invalid_argument("find_fixed_points: degenerate box");
        }
    }
    if (grid_per_axis < 2) {
        throw std::invalid_argument("find_fixed_points: grid_per_axis must be >= 2");
    }

    long long n_seeds = 1;
    for (int i = 0; i < n; ++i) n_seeds *= grid_per_axis;

    std::vector<State> roots;
    State seed(n);
    for (long long s = 0; s < n_seeds; ++s) {
        long long rem = s;
        for (int i = 0; i < n; ++i) {
            const int gi = static_cast<int>(rem % grid_per_axis);
            rem /= grid_per_axis;
            seed[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * static_cast<double>(gi) /
                                      static_cast<double>(grid_per_axis - 1);
        }
        bool singular = false;
        auto root = newton_root(model, seed, newton_tol, singular);
        if (singular && skipped_seeds != nullptr) skipped_seeds->push_back(seed);
        if (!root) continue;
        bool duplicate = false;
        for (const auto& known : roots) {
            if (dist2(known, *root) <= kDedupeDistance) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) roots.push_back(std::move(*root));
    }

    std::sort(roots.begin(), roots.end());
    std::vector<FixedPointRecord> records;
    records.reserve(roots.size());
    for (const auto& root : roots) records.push_back(classify_fixed_point(model, root));
    return records;
}

FixedPointRecord classify_fixed_point(const Model& model, const State& location) {
    if (static_cast<int>(location.size()) != model.dimension()) {
        throw std::invalid_argument("classify_fixed_point: state dimension mismatch");
    }
    const double residual = drift_norm(model, location);
    if (residual > kDegenerateTol) {
        std::ostringstream msg;
        msg << "classify_fixed_point: residual " << residual << " exceeds 1e-8; not a fixed point";
        throw std::invalid_argument(msg.str());
    }
    FixedPointRecord record;
    record.location = location;
    record.residual = residual;
    record.eigenvalues = sorted_eigenvalues(jacobian_matrix(model, location));
    record.classification = classify_eigenvalues(record.eigenvalues);
    return record;
}

namespace {

double leading_real_part(const ModelFamily& family, const State& equilibrium, double lambda) {
    auto model = family.at(lambda);
    const double residual = drift_norm(*model, equilibrium);
    if (residual > kDegenerateTol) {
        std::ostringstream msg;
        msg << "pes_scan: equilibrium drifts at " << family.parameter << "=" << lambda
            << " (residual " << residual << ")";
        throw std::invalid_argument(msg.str());
    }
    const auto eigs = sorted_eigenvalues(jacobian_matrix(*model, equilibrium));
    return eigs.front().real();
}

}  // namespace

PesScanResult pes_scan(const ModelFamily& family, const State& equilibrium,
                       const std::vector<double>& lambda_grid) {
    if (lambda_grid.size() < 2) {
        throw std::invalid_argument("pes_scan: need at least two grid values");
    }
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) {
        throw std::invalid_argument("pes_scan: lambda grid must be increasing");
    }

    PesScanResult result;
    result.rows.reserve(lambda_grid.size());
    for (double lambda : lambda_grid) {
        auto model = family.at(lambda);
        const double residual = drift_norm(*model, equilibrium);
        if (residual > kDegenerateTol) {
            std::ostringstream msg;
            msg << "pes_scan: equilibrium drifts at " << family.parameter << "=" << lambda
                << " (residual " << residual << ")";
            throw std::invalid_argument(msg.str());
        }
        PesRow row;
        row.lambda = lambda;
        for (const auto& e : sorted_eigenvalues(jacobian_matrix(*model, equilibrium))) {
            row.real_parts.push_back(e.real());
        }
        result.rows.push_back(std::move(row));
    }

    // Bracket the leading real part's sign change on the grid, then refine by
    // repeated linear interpolation (regula falsi with bisection fallback).
    for (std::size_t k = 0; k + 1 < result.rows.size(); ++k) {
        double lo = result.rows[k].lambda;
        double hi = result.rows[k + 1].lambda;
        double flo = result.rows[k].real_parts.front();
        double fhi = result.rows[k + 1].real_parts.front();
        if (flo == 0.0) {
            result.lambda0 = lo;
        } else if (fhi == 0.0) {
            result.lambda0 = hi;
        } else if (flo < 0.0 && fhi > 0.0) {
            for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(hi));
                 ++iter) {
                double mid = lo + (hi - lo) * (-flo) / (fhi - flo);
                if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
                const double fmid = leading_real_part(family, equilibrium, mid);
                if (fmid == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (fmid < 0.0) {
                    lo = mid;
                    flo = fmid;
                } else {
                    hi = mid;
                    fhi = fmid;
                }
            }
            result.lambda0 = 0.5 * (lo + hi);
        } else {
            continue;
        }

        // Count eigenvalues whose real part changes sign across the bracket.
        const auto& before = result.rows[k].real_parts;
        const auto& after = result.rows[k + 1].real_parts;
        int crossings = 0;
        for (std::size_t i = 0; i < before.size(); ++i) {
            if (before[i] < 0.0 && after[i] >= 0.0) ++crossings;
            if (before[i] == 0.0 && after[i] > 0.0) ++crossings;
        }
        result.crossing_count = crossings;
        break;
    }
    return result;
}

namespace {

/// Distance from p to the boundary of the square [-s, s]^2.
double dist_to_square_boundary(const State& p, double s) {
    const double ax = std::fabs(p[0]);
    const double ay = std::fabs(p[1]);
    if (ax <= s && ay <= s) return s - std::max(ax, ay);
    const double dx = std::max(ax - s, 0.0);
    const double dy = std::max(ay - s, 0.0);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

BifurcationReport verify_toy_attractor(double lambda, long long n_basin, double horizon,
                                       std::uint64_t seed, int workers, double step) {
    if (!(lambda > 0.0)) {
        throw std::invalid_argument(
            "verify_toy_attractor: lambda must be > 0 (no bifurcated attractor below "
            "criticality)");
    }
    if (n_basin < 1) throw std::invalid_argument("verify_toy_attractor: need n_basin >= 1");
    if (horizon <= 0.0) throw std::invalid_argument("verify_toy_attractor: horizon must be > 0");

    auto model = make_model("toy", {{"lambda", lambda}});

    BifurcationReport report;
    report.lambda = lambda;
    report.fixed_points =
        find_fixed_points(*model, {-2.0, -2.0}, {2.0, 2.0}, 21, kDegenerateTol);
    for (const auto& fp : report.fixed_points) {
        if (fp.classification == StabilityClass::StableNode) ++report.node_count;
        if (fp.classification == StabilityClass::Saddle) ++report.saddle_count;
    }

    const double side = std::sqrt(lambda);  // invariant square [-sqrt(lambda), sqrt(lambda)]^2
    const auto plan = detail::plan_steps(horizon, step);

    struct BasinOutcome {
        double radius = 0.0;
        bool converged = false;
    };
    std::vector<BasinOutcome> outcomes(static_cast<std::size_t>(n_basin));

    parallel_for_slots(n_basin, workers, [&](long long member) {
        Rng rng = member_rng(seed, static_cast<std::uint64_t>(member));
        State x(2);
        do {
            x[0] = rng.uniform(-2.0, 2.0);
            x[1] = rng.uniform(-2.0, 2.0);
        } while (norm2(x) <= 1e-8);

        detail::Rk4Stepper stepper(*model);
        stepper.advance(plan.whole_steps, step, x, 0.0);
        if (plan.remainder > 0.0) {
            stepper.step(plan.remainder, x);
            detail::Rk4Stepper::check_escape(x, horizon);
        }

        State f(2);
        model->drift(x, f);
        auto& out = outcomes[static_cast<std::size_t>(member)];
        out.radius = norm2(x);
        out.converged = norm2(f) <= 1e-3 || dist_to_square_boundary(x, side) <= 1e-3;
    });

    double rmin = outcomes.front().radius, rmax = outcomes.front().radius;
    long long converged = 0;
    for (const auto& out : outcomes) {
        rmin = std::min(rmin, out.radius);
        rmax = std::max(rmax, out.radius);
        if (out.converged) ++converged;
    }
    report.attractor_radius_min = rmin;
    report.attractor_radius_max = rmax;
    report.basin_converged_fraction =
        static_cast<double>(converged) / static_cast<double>(n_basin);
    return report;
}

}  // namespace predkit
