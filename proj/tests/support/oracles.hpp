#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cmath>
#include <vector>

#include "predkit/model.hpp"
#include "predkit/rng.hpp"
#include "predkit/state.hpp"

namespace predkit::testing {

/// Central finite differences of the drift, step 1e-6 * (1 + |x|).
inline std::vector<double> fd_jacobian(const Model& model, const State& x) {
    const int n = model.dimension();
    const double h = 1e-6 * (1.0 + norm2(x));
    std::vector<double> jac(static_cast<std::size_t>(n) * n);
    State xp = x, xm = x, fp(n), fm(n);
    for (int j = 0; j < n; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        model.drift(xp, fp);
        model.drift(xm, fm);
        for (int i = 0; i < n; ++i) {
            jac[static_cast<std::size_t>(i) * n + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

/// Max-norm relative error between two row-major matrices.
inline double matrix_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::fabs(a[i] - b[i]));
        den = std::max(den, std::fabs(b[i]));
    }
    return num / std::max(den, 1.0);
}

/// Random state with each coordinate uniform in [lo, hi].
inline State random_state(Rng& rng, int n, double lo, double hi) {
    State x(n);
    for (auto& v : x) v = rng.uniform(lo, hi);
    return x;
}

}  // namespace predkit::testing
