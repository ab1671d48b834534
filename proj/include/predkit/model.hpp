#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "predkit/state.hpp"

namespace predkit {

/// A named autonomous vector field with parameters and an analytic Jacobian.
/// Evaluations are pure and stateless: safe to call from any number of
/// concurrent workers.
class Model {
public:
    virtual ~Model() = default;

    const std::string& name() const noexcept { return name_; }
    int dimension() const noexcept { return dim_; }
    const std::map<std::string, double>& parameters() const noexcept { return params_; }

    /// dx/dt at x, written into `out` (size n). No allocation.
    virtual void drift(std::span<const double> x, std::span<double> out) const = 0;

    /// Row-major n x n Jacobian at x, written into `jac` (size n*n).
    virtual void jacobian(std::span<const double> x, std::span<double> jac) const = 0;

    /// Default initial state used when a config does not supply one.
    virtual State default_initial_state() const;

protected:
    Model(std::string name, int dim, std::map<std::string, double> params)
        : name_(std::move(name)), dim_(dim), params_(std::move(params)) {}

private:
    std::string name_;
    int dim_;
    std::map<std::string, double> params_;
};

/// Instantiate a built-in model by name.
///
/// Known names and parameters:
///   toy        lambda            dx_i/dt = lambda*x_i - x_i^3, i = 1,2
///   lorenz63   sigma, r, b       defaults 10, 28, 8/3
///   lorenz96   F, n              cyclic advection-forcing, n >= 4
///   linear     a                 dx/dt = a*x (1-dimensional)
///   lineardiag a1, a2, ...       diagonal linear system, one rate per axis
///
/// Unknown names or parameter keys raise ValidationError.
std::unique_ptr<Model> make_model(const std::string& name,
                                  const std::map<std::string, double>& params);

/// Evaluate dx/dt at x. Validates dimension and finiteness of x.
State eval_drift(const Model& model, const State& x);

/// Evaluate the analytic Jacobian at x, row-major. Same validation as eval_drift.
std::vector<double> eval_jacobian(const Model& model, const State& x);

}  // namespace predkit
