#pragma once

#include "causig/core.hpp"

#include <vector>

namespace causig {

enum class Penalty {
  // Squared residual plus lambda * squared coefficient norm, solved in closed
  // form row by row.
  Ridge,
  // Unsquared Frobenius residual plus lambda * (|Q|_F + |A|_F + |B1|_F + |B2|_F),
  // solved by proximal gradient starting from the ridge solution.
  GroupFrobenius,
};

struct FitOptions {
  double lambda = 0.0;
  double dt = 1.0;  // copied into the returned params
  Penalty penalty = Penalty::Ridge;
  // One-timescale model x(k) = A x(k-1) + B2 u(k-1); Q and B1 stay zero.
  bool single_timescale = false;
  int jobs = 1;
  int max_iterations = 2000;  // GroupFrobenius only
};

struct FitReport {
  ModelParams params;
  double residual_fro = 0.0;
  Vector per_row_residuals;             // 2-norm of each row's one-step residual
  std::vector<Index> condition_warnings;  // rows whose regressor is rank deficient
};

// Default regularization weight used by the CLI: 1e-3 * T.
double default_lambda(Index samples);

FitReport fit(const Matrix& X, const Matrix& U, const FitOptions& options);
FitReport fit(const Matrix& X, const Matrix& U, double lambda);

// Solves x = Q x + A x_prev + B1 u_now + B2 u_prev for x.
Vector predict_next(const ModelParams& params, const Vector& x_prev, const Vector& u_prev,
                    const Vector& u_now);

// m x (T-1) matrix whose column k-1 is the one-step residual at time k.
Matrix residual_matrix(const ModelParams& params, const Matrix& X, const Matrix& U);
double residual_fro(const ModelParams& params, const Matrix& X, const Matrix& U);

// Objective minimized by Penalty::GroupFrobenius.
double group_objective(const ModelParams& params, const Matrix& X, const Matrix& U, double lambda);

}  // namespace causig
