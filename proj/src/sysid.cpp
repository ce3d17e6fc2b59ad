#include "causig/sysid.hpp"

#include "causig/error.hpp"
#include "causig/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace causig {

namespace {

constexpr double kRankTolerance = 1e-10;

void check_data(const Matrix& X, const Matrix& U) {
  if (X.rows() < 1 || U.rows() < 1) {
    throw Error(ErrorCode::ShapeMismatch, "need at least one state row and one input row");
  }
  if (X.cols() != U.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "X has " + std::to_string(X.cols()) +
                                              " samples but U has " + std::to_string(U.cols()));
  }
  if (X.cols() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 samples to fit");
  if (!X.allFinite() || !U.allFinite()) {
    throw Error(ErrorCode::NonFinite, "fit data contains non-finite values");
  }
}

void check_params_against(const ModelParams& params, const Matrix& X, const Matrix& U) {
  params.validate();
  if (X.rows() != params.m() || U.rows() != params.n() || X.cols() != U.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "data shape does not match model dimensions");
  }
}

// Stacked regressors [X(1:T); X(0:T-1); U(1:T); U(0:T-1)], one column per k.
Matrix stacked_regressors(const Matrix& X, const Matrix& U) {
  const Index m = X.rows();
  const Index n = U.rows();
  const Index K = X.cols() - 1;
  Matrix Z(2 * m + 2 * n, K);
  Z.topRows(m) = X.rightCols(K);
  Z.middleRows(m, m) = X.leftCols(K);
  Z.middleRows(2 * m, n) = U.rightCols(K);
  Z.bottomRows(n) = U.leftCols(K);
  return Z;
}

// Coefficient slots of R = [Q A B1 B2] that row i may use.
std::vector<Index> free_columns(Index row, Index m, Index n, bool single_timescale) {
  std::vector<Index> cols;
  if (!single_timescale) {
    for (Index j = 0; j < m; ++j) {
      if (j != row) cols.push_back(j);
    }
  }
  for (Index j = 0; j < m; ++j) cols.push_back(m + j);
  if (!single_timescale) {
    for (Index j = 0; j < n; ++j) cols.push_back(2 * m + j);
  }
  for (Index j = 0; j < n; ++j) cols.push_back(2 * m + n + j);
  return cols;
}

ModelParams params_from_signature(const Matrix& R, Index m, Index n, double lambda, double dt) {
  ModelParams p;
  p.Q = R.leftCols(m);
  p.A = R.middleCols(m, m);
  p.B1 = R.middleCols(2 * m, n);
  p.B2 = R.rightCols(n);
  p.lambda = lambda;
  p.dt = dt;
  return p;
}

struct RowSolution {
  Vector coefficients;
  bool rank_deficient = false;
};

// argmin |y - Zr^T theta|^2 + lambda |theta|^2 through the thin SVD of Zr^T.
RowSolution solve_ridge_row(const Matrix& Zr, const Vector& y, double lambda) {
  const Matrix design = Zr.transpose();
  Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cutoff = kRankTolerance * smax;
  RowSolution out;
  out.rank_deficient = design.cols() > design.rows();
  const Vector projected = svd.matrixU().transpose() * y;
  Vector scaled = Vector::Zero(s.size());
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) <= cutoff) {
      out.rank_deficient = true;
      if (lambda == 0.0) continue;
    }
    if (s(k) == 0.0) continue;
    scaled(k) = projected(k) * s(k) / (s(k) * s(k) + lambda);
  }
  out.coefficients = svd.matrixV() * scaled;
  return out;
}

double block_norm_sum(const Matrix& R, Index m, Index n) {
  return R.leftCols(m).norm() + R.middleCols(m, m).norm() + R.middleCols(2 * m, n).norm() +
         R.rightCols(n).norm();
}

void shrink_blocks(Matrix& R, Index m, Index n, double threshold) {
  auto shrink = [threshold](auto block) {
    const double norm = block.norm();
    if (norm <= threshold) {
      block.setZero();
    } else {
      block *= (1.0 - threshold / norm);
    }
  };
  shrink(R.leftCols(m));
  shrink(R.middleCols(m, m));
  shrink(R.middleCols(2 * m, n));
  shrink(R.rightCols(n));
}

// Proximal gradient on |R Z - Y|_F + lambda * sum of block Frobenius norms,
// with backtracking. The smooth term is evaluated through the Gram matrices.
Matrix refine_group(Matrix R, const Matrix& Z, const Matrix& Y, const Matrix& mask, double lambda,
                    int max_iterations) {
  const Index m = Y.rows();
  const Index n = (Z.rows() - 2 * m) / 2;
  const Matrix G = Z * Z.transpose();
  const Matrix C = Y * Z.transpose();
  const double yy = Y.squaredNorm();

  auto residual_norm = [&](const Matrix& W) {
    const double sq = (W * G).cwiseProduct(W).sum() - 2.0 * W.cwiseProduct(C).sum() + yy;
    return std::sqrt(std::max(sq, 0.0));
  };
  auto objective = [&](const Matrix& W) {
    return residual_norm(W) + lambda * block_norm_sum(W, m, n);
  };

  double step = 1.0 / std::max(G.norm(), 1e-300);
  double current = objective(R);
  for (int it = 0; it < max_iterations; ++it) {
    const double e = residual_norm(R);
    if (e <= 0.0) break;
    const Matrix grad = ((R * G - C) / e).cwiseProduct(mask);
    bool accepted = false;
    Matrix next;
    for (int bt = 0; bt < 60; ++bt) {
      next = R - step * grad;
      shrink_blocks(next, m, n, step * lambda);
      next = next.cwiseProduct(mask);
      const Matrix delta = next - R;
      const double model = e + grad.cwiseProduct(delta).sum() + delta.squaredNorm() / (2.0 * step);
      if (residual_norm(next) <= model + 1e-14 * std::max(1.0, e)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double value = objective(next);
    const double change = current - value;
    R = std::move(next);
    if (value <= current && change <= 1e-13 * std::max(1.0, std::abs(current))) {
      current = value;
      break;
    }
    current = value;
    step *= 1.5;
  }
  return R;
}

}  // namespace

double default_lambda(Index samples) { return 1e-3 * static_cast<double>(samples); }

FitReport fit(const Matrix& X, const Matrix& U, double lambda) {
  FitOptions options;
  options.lambda = lambda;
  return fit(X, U, options);
}

FitReport fit(const Matrix& X, const Matrix& U, const FitOptions& options) {
  check_data(X, U);
  if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a nonnegative finite number");
  }
  if (!(options.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const Index m = X.rows();
  const Index n = U.rows();
  const Matrix Z = stacked_regressors(X, U);
  const Matrix Y = X.rightCols(X.cols() - 1);

  Matrix R = Matrix::Zero(m, 2 * m + 2 * n);
  std::vector<char> deficient(static_cast<std::size_t>(m), 0);
  parallel_for(static_cast<std::size_t>(m), options.jobs, [&](std::size_t idx) {
    const Index i = static_cast<Index>(idx);
    const std::vector<Index> cols = free_columns(i, m, n, options.single_timescale);
    const Matrix Zr = Z(cols, Eigen::all);
    const RowSolution sol = solve_ridge_row(Zr, Y.row(i).transpose(), options.lambda);
    for (std::size_t c = 0; c < cols.size(); ++c) R(i, cols[c]) = sol.coefficients(static_cast<Index>(c));
    deficient[idx] = sol.rank_deficient ? 1 : 0;
  });

  if (options.penalty == Penalty::GroupFrobenius) {
    Matrix mask = Matrix::Zero(m, 2 * m + 2 * n);
    for (Index i = 0; i < m; ++i) {
      for (Index c : free_columns(i, m, n, options.single_timescale)) mask(i, c) = 1.0;
    }
    R = refine_group(std::move(R), Z, Y, mask, options.lambda, options.max_iterations);
  }

  FitReport report;
  report.params = params_from_signature(R, m, n, options.lambda, options.dt);
  const Matrix E = residual_matrix(report.params, X, U);
  report.per_row_residuals = E.rowwise().norm();
  report.residual_fro = E.norm();
  for (Index i = 0; i < m; ++i) {
    if (deficient[static_cast<std::size_t>(i)]) report.condition_warnings.push_back(i);
  }
  if (!report.condition_warnings.empty()) {
    warn("rank-deficient regressors in " + std::to_string(report.condition_warnings.size()) +
         " row(s); solved by pseudo-inverse");
  }
  return report;
}

Vector predict_next(const ModelParams& params, const Vector& x_prev, const Vector& u_prev,
                    const Vector& u_now) {
  params.validate();
  const Index m = params.m();
  const Index n = params.n();
  if (x_prev.size() != m || u_prev.size() != n || u_now.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "state/input vector sizes do not match the model");
  }
  const Matrix IminusQ = Matrix::Identity(m, m) - params.Q;
  Eigen::JacobiSVD<Matrix> svd(IminusQ);
  const double smin = svd.singularValues()(m - 1);
  if (smin <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
    throw Error(ErrorCode::Singular,
                "I - Q is singular (smallest singular value " + std::to_string(smin) + ")");
  }
  const Vector rhs = params.A * x_prev + params.B1 * u_now + params.B2 * u_prev;
  return IminusQ.partialPivLu().solve(rhs);
}

Matrix residual_matrix(const ModelParams& params, const Matrix& X, const Matrix& U) {
  check_params_against(params, X, U);
  if (X.cols() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 samples");
  const Index K = X.cols() - 1;
  const Index m = params.m();
  return (params.Q - Matrix::Identity(m, m)) * X.rightCols(K) + params.A * X.leftCols(K) +
         params.B1 * U.rightCols(K) + params.B2 * U.leftCols(K);
}

double residual_fro(const ModelParams& params, const Matrix& X, const Matrix& U) {
  return residual_matrix(params, X, U).norm();
}

double group_objective(const ModelParams& params, const Matrix& X, const Matrix& U, double lambda) {
  return residual_fro(params, X, U) +
         lambda * (params.Q.norm() + params.A.norm() + params.B1.norm() + params.B2.norm());
}

}  // namespace causig
