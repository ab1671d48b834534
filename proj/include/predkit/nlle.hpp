#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "predkit/gsr.hpp"
#include "predkit/integrate.hpp"
#include "predkit/model.hpp"

namespace predkit {

/// Initial-error prescription for an ensemble: magnitude epsilon, and either
/// explicit unit directions (reused at every base point) or
/// `directions_per_point` draws from the uniform sphere distribution.
struct PerturbationSpec {
    double epsilon = 1e-5;
    int directions_per_point = 1;
    std::vector<State> explicit_directions;  // empty -> random directions
    std::uint64_t seed = 0;
};

/// Ensemble-mean nonlinear error growth over a tau grid.
///
/// rgie[k] == exp(mean_nlle[k] * tau_grid[k]) by construction; e_sat and t_p
/// stay empty until saturation_and_limit fills them.
struct NlleCurve {
    std::vector<double> tau_grid;
    std::vector<double> mean_nlle;
    std::vector<double> rgie;
    std::vector<double> std_error;  // standard error of mean_nlle per tau
    std::optional<double> e_sat;
    std::optional<double> t_p;
    long long ensemble_size = 0;
    std::uint64_t seed = 0;
};

/// Nonlinear exponent spectrum recovered from m-volume growth rates.
struct NlleSpectrumResult {
    std::vector<double> exponents;  // 1/time, in GSR order
    double tau = 0.0;
    double epsilon = 0.0;
    long long ensemble_size = 0;
};

/// Direction-ensemble error growth at a single phase-space point.
struct LocalNlleRecord {
    State x0;
    std::vector<double> tau_grid;
    std::vector<double> local_mean_nlle;
    std::vector<double> lrgie;
    std::optional<double> local_t_p;
};

/// Integrates the base trajectory from x0 and the perturbed trajectory from
/// x0 + delta0 on the identical RK4 grid; returns their endpoint difference.
State nonlinear_propagate(const Model& model, const State& x0, const State& delta0,
                          double tau, double step);

/// Nonlinear finite-time exponent (1/tau) ln(|delta(tau)|/|delta0|) from the
/// fully nonlinear trajectory difference.
double nlle_single(const Model& model, const State& x0, const State& delta0, double tau,
                   double step);

/// Double ensemble mean over base points and initial directions: one pair of
/// trajectories per member reaching max(tau_grid), exponents recorded at every
/// grid tau. Tau values are snapped to the integration step lattice, so each
/// recorded exponent equals nlle_single at that tau exactly. Results are
/// independent of worker count.
NlleCurve mean_nlle_curve(const Model& model, const AttractorSample& sample,
                          const PerturbationSpec& pert, const std::vector<double>& tau_grid,
                          double step, int workers = 1);

/// Plateau detector: e_sat is the mean error growth over the trailing maximal
/// run of >= `window` points whose neighboring values vary by <= slope_tol
/// relative; t_p is the first tau whose growth reaches (1 - theta) * e_sat.
/// Both are written into the curve and returned. Throws SaturationNotReached
/// when no qualifying trailing window exists.
std::pair<double, double> saturation_and_limit(NlleCurve& curve, int window, double slope_tol,
                                               double theta);

/// Nonlinear exponent spectrum at error magnitude epsilon: per member, m
/// orthogonal perturbations are propagated nonlinearly (m + 1 trajectories),
/// reorthogonalized by GSR and rescaled back to epsilon every renorm_interval;
/// volume log-ratios accumulate per member and exponents come from
/// ensemble-averaged partial sums divided by tau.
NlleSpectrumResult nlle_spectrum(const Model& model, const AttractorSample& sample,
                                 const PerturbationSpec& pert, double tau,
                                 double renorm_interval, int m, double step, int workers = 1);

/// Direction-only ensemble at one point: N perturbations drawn uniformly on
/// the epsilon-sphere around x0, nonlinear exponents averaged per tau. The
/// local predictability limit is filled when the LRGIE curve saturates and
/// left empty otherwise.
LocalNlleRecord local_mean_nlle(const Model& model, const State& x0, double epsilon,
                                int n_directions, const std::vector<double>& tau_grid,
                                double theta, double step, std::uint64_t seed,
                                int workers = 1);

/// Default tau grid: geometric spacing from 0.05 to 1, then linear to 30, 120
/// points, snapped to the step lattice.
std::vector<double> default_tau_grid(double step);

/// Snaps each tau to the nearest positive multiple of `step`, bumping
/// collisions upward so the result stays strictly increasing.
std::vector<double> snap_tau_grid(const std::vector<double>& tau_grid, double step);

}  // namespace predkit
