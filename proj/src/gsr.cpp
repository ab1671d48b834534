#include "predkit/gsr.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "predkit/errors.hpp"

namespace predkit {

namespace detail {

void gsr_inplace(std::vector<State>& vectors, std::vector<double>& norms) {
    const std::size_t m = vectors.size();
    norms.resize(m);
    std::vector<double> sq(m);  // (w_j, w_j) kept exact for the projections
    for (std::size_t k = 0; k < m; ++k) {
        State& v = vectors[k];
        for (std::size_t j = 0; j < k; ++j) {
            const State& w = vectors[j];
            const double coef = dot(v, w) / sq[j];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coef * w[i];
        }
        sq[k] = dot(v, v);
        norms[k] = std::sqrt(sq[k]);
        if (!(norms[k] >= 1e-300)) {
            std::ostringstream msg;
            msg << "gsr: vector " << k
                << " is numerically dependent on its predecessors (norm " << norms[k]
                << "); the frame has collapsed";
            throw DependentFrame(msg.str());
        }
    }
}

}  // namespace detail

std::vector<State> gsr_orthogonalize(const std::vector<State>& vectors) {
    if (vectors.empty()) throw std::invalid_argument("gsr: empty frame");
    const std::size_t n = vectors.front().size();
    if (vectors.size() > n) throw std::invalid_argument("gsr: more vectors than dimensions");
    for (const auto& v : vectors) {
        if (v.size() != n) throw std::invalid_argument("gsr: mixed vector dimensions");
        if (!all_finite(v)) throw std::invalid_argument("gsr: non-finite vector component");
    }
    std::vector<State> out = vectors;
    std::vector<double> norms;
    detail::gsr_inplace(out, norms);
    return out;
}

double volume_m(const std::vector<State>& vectors) {
    if (vectors.empty()) return 1.0;
    const std::size_t m = vectors.size();
    const std::size_t n = vectors.front().size();
    if (m > n) throw std::invalid_argument("volume_m: more vectors than dimensions");

    Eigen::MatrixXd gram(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            gram(i, j) = gram(j, i) = dot(vectors[i], vectors[j]);
        }
    }
    const double det = gram.determinant();
    return det > 0.0 ? std::sqrt(det) : 0.0;
}

}  // namespace predkit
