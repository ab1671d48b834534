#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "predkit/model.hpp"

namespace predkit {

enum class StabilityClass {
    StableNode,
    UnstableNode,
    Saddle,
    StableFocus,
    UnstableFocus,
    Center,
    Degenerate,
};

const char* to_string(StabilityClass c);

/// Equilibrium with its linearization. `residual` is |drift(location)|;
/// classification is Degenerate whenever any eigenvalue real part sits within
/// 1e-8 of zero (never a guess at criticality).
struct FixedPointRecord {
    State location;
    std::vector<std::complex<double>> eigenvalues;  // sorted by Re descending
    StabilityClass classification = StabilityClass::Degenerate;
    double residual = 0.0;
};

/// Outcome of the toy-system attractor check at one parameter value.
struct BifurcationReport {
    double lambda = 0.0;
    std::vector<FixedPointRecord> fixed_points;
    int node_count = 0;    // stable nodes
    int saddle_count = 0;
    double attractor_radius_min = 0.0;
    double attractor_radius_max = 0.0;
    double basin_converged_fraction = 0.0;
};

/// One row of a PES scan: eigenvalue real parts at the equilibrium, sorted
/// descending.
struct PesRow {
    double lambda = 0.0;
    std::vector<double> real_parts;
};

struct PesScanResult {
    std::vector<PesRow> rows;
    std::optional<double> lambda0;  // refined zero crossing of the leading real part
    int crossing_count = 0;         // eigenvalues changing sign at lambda0
};

/// A built-in model with one scanned parameter.
struct ModelFamily {
    std::string model_name;
    std::map<std::string, double> base_params;
    std::string parameter;

    std::unique_ptr<Model> at(double value) const;
};

/// Damped Newton iteration from every point of a grid_per_axis^n lattice over
/// the box; converged roots are deduplicated within 1e-6, refined to residual
/// <= 1e-10, and classified. Seeds where the Jacobian goes singular are
/// skipped (and appended to *skipped_seeds when given). Returns the roots
/// sorted lexicographically; no convergence from any seed gives an empty list.
std::vector<FixedPointRecord> find_fixed_points(const Model& model, const State& box_lo,
                                                const State& box_hi, int grid_per_axis,
                                                double newton_tol,
                                                std::vector<State>* skipped_seeds = nullptr);

/// Eigenvalues and stability class of the linearization at `location`.
/// Requires |drift(location)| <= 1e-8.
FixedPointRecord classify_fixed_point(const Model& model, const State& location);

/// Eigenvalue real parts at a fixed equilibrium across a parameter grid, with
/// the leading real part's zero crossing bracketed by the grid and refined to
/// ~1e-10. Throws if the equilibrium stops being a fixed point anywhere on the
/// grid (residual > 1e-8).
PesScanResult pes_scan(const ModelFamily& family, const State& equilibrium,
                       const std::vector<double>& lambda_grid);

/// Verifies the bifurcated attractor of the two-mode cubic system at
/// lambda > 0: locates and classifies all equilibria in [-2,2]^2, then
/// integrates n_basin random starts (uniform in the box, excluding a 1e-8 ball
/// at the origin) to `horizon` and reports the radius range of final states
/// and the fraction converged onto the invariant square (final drift norm or
/// distance to the square boundary <= 1e-3).
BifurcationReport verify_toy_attractor(double lambda, long long n_basin, double horizon,
                                       std::uint64_t seed, int workers = 1,
                                       double step = 0.01);

}  // namespace predkit
