#pragma once

#include <vector>

#include "predkit/state.hpp"

namespace predkit {

/// Classical Gram-Schmidt without normalization:
///   w_1 = v_1,  w_k = v_k - sum_{j<k} ((v_k, w_j)/(w_j, w_j)) w_j.
/// The span of the first k outputs equals the span of the first k inputs.
/// Throws DependentFrame if any output norm falls below 1e-300.
std::vector<State> gsr_orthogonalize(const std::vector<State>& vectors);

/// m-dimensional volume spanned by the vectors: sqrt(det(G G^T)) with G the
/// row-stacked frame. Equals the product of GSR output norms. Returns 0 for a
/// dependent frame (never throws).
double volume_m(const std::vector<State>& vectors);

namespace detail {

/// In-place classical GSR; writes each output norm into `norms`.
/// Throws DependentFrame below the 1e-300 floor.
void gsr_inplace(std::vector<State>& vectors, std::vector<double>& norms);

}  // namespace detail

}  // namespace predkit
