#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library code paths they check.

#include "causig/core.hpp"
#include "causig/modal.hpp"
#include "causig/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using causig::Index;
using causig::Matrix;
using causig::Vector;

inline Matrix gaussian(causig::Rng& rng, Index rows, Index cols, double sd = 1.0) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = rng.normal(0.0, sd);
  return M;
}

// Minimum of sum_r cost(r, p(r)) over all permutations p.
inline double brute_force_assignment(const Matrix& cost) {
  std::vector<Index> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Index r = 0; r < cost.rows(); ++r) total += cost(r, perm[static_cast<std::size_t>(r)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// 1 - |<x, y>| / (|x| |y|) written out with explicit sums.
inline double mode_cost(const causig::CVector& x, const causig::CVector& y) {
  std::complex<double> inner = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    inner += std::conj(x(i)) * y(i);
    nx += std::norm(x(i));
    ny += std::norm(y(i));
  }
  return 1.0 - std::abs(inner) / std::sqrt(nx * ny);
}

inline double brute_force_distance(const causig::CMatrix& F1, const causig::CMatrix& F2) {
  Matrix cost(F1.cols(), F2.cols());
  for (Index r = 0; r < F1.cols(); ++r)
    for (Index c = 0; c < F2.cols(); ++c) cost(r, c) = mode_cost(F1.col(r), F2.col(c));
  return brute_force_assignment(cost);
}

// Steps x(k) = Q x(k) + A x(k-1) + B1 u(k) + B2 u(k-1) from x(0) = 0 by
// solving the implicit equation with a fresh LU each step.
inline Matrix step_implicit(const causig::ModelParams& p, const Matrix& inputs) {
  const Index m = p.A.rows();
  const Index K = inputs.cols() - 1;
  Matrix X = Matrix::Zero(m, K + 1);
  const Matrix lhs = Matrix::Identity(m, m) - p.Q;
  for (Index k = 1; k <= K; ++k) {
    const Vector rhs = p.A * X.col(k - 1) + p.B1 * inputs.col(k) + p.B2 * inputs.col(k - 1);
    X.col(k) = lhs.fullPivLu().solve(rhs);
  }
  return X;
}

// Input-to-x(h) map assembled from impulse responses of step_implicit:
// column (k * n + j) is x(h) after a unit impulse on input j at time k.
inline Matrix impulse_map(const causig::ModelParams& p, Index horizon, Index steps) {
  const Index n = p.B1.cols();
  Matrix G(p.A.rows(), n * steps);
  for (Index k = 0; k < steps; ++k) {
    for (Index j = 0; j < n; ++j) {
      Matrix u = Matrix::Zero(n, horizon + 1);
      u(j, k) = 1.0;
      G.col(k * n + j) = step_implicit(p, u).col(horizon);
    }
  }
  return G;
}

// Projected gradient ascent of e_i^T G u over the unit 2-ball from a random
// start; returns the best objective seen.
inline double ball_maximum(const Matrix& G, Index region, causig::Rng& rng, int iterations = 5000) {
  Vector u = gaussian(rng, G.cols(), 1);
  u /= std::max(1.0, u.norm());
  const Vector g = G.row(region).transpose();
  const double step = 0.5 / std::max(g.norm(), 1e-300);
  double best = g.dot(u);
  for (int it = 0; it < iterations; ++it) {
    u += step * g;
    const double norm = u.norm();
    if (norm > 1.0) u /= norm;
    best = std::max(best, g.dot(u));
  }
  return best;
}

}  // namespace oracle
