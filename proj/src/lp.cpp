#include "causig/lp.hpp"

#include "causig/error.hpp"

#include <limits>

namespace causig::lp {

namespace {
constexpr double kPivotTol = 1e-12;
}

Solution maximize(const Vector& c, const Matrix& A, const Vector& b) {
  const Index rows = A.rows();
  const Index vars = A.cols();
  if (c.size() != vars || b.size() != rows) {
    throw Error(ErrorCode::ShapeMismatch, "LP dimensions are inconsistent");
  }
  if ((b.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "LP right-hand side must be nonnegative");
  }

  // Tableau [A I | b] with reduced-cost row -c; slacks start basic.
  const Index cols = vars + rows;
  Matrix T = Matrix::Zero(rows + 1, cols + 1);
  T.topLeftCorner(rows, vars) = A;
  T.block(0, vars, rows, rows).setIdentity();
  T.topRightCorner(rows, 1) = b;
  T.bottomLeftCorner(1, vars) = -c.transpose();
  std::vector<Index> basis(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = vars + r;

  Solution sol;
  while (true) {
    // Bland: lowest-index column with a negative reduced cost.
    Index enter = -1;
    for (Index j = 0; j < cols; ++j) {
      if (T(rows, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < rows; ++r) {
      if (T(r, enter) <= kPivotTol) continue;
      const double ratio = T(r, cols) / T(r, enter);
      if (ratio < best_ratio - kPivotTol ||
          (ratio <= best_ratio + kPivotTol && leave >= 0 &&
           basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = std::min(ratio, best_ratio);
        leave = r;
      }
    }
    if (leave < 0) throw Error(ErrorCode::Unstable, "LP is unbounded");

    T.row(leave) /= T(leave, enter);
    for (Index r = 0; r <= rows; ++r) {
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++sol.pivots;
  }

  sol.x = Vector::Zero(vars);
  for (Index r = 0; r < rows; ++r) {
    const Index j = basis[static_cast<std::size_t>(r)];
    if (j < vars) sol.x(j) = T(r, cols);
  }
  sol.objective = c.dot(sol.x);
  return sol;
}

Solution maximize_in_box(const Vector& c, const Vector& lower, const Vector& upper) {
  const Index n = c.size();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "box bounds must match the objective size");
  }
  if (!lower.allFinite() || !upper.allFinite() || (upper.array() < lower.array()).any()) {
    throw Error(ErrorCode::InvalidArgument, "box bounds must be finite with lower <= upper");
  }
  Solution shifted = maximize(c, Matrix::Identity(n, n), upper - lower);
  Solution out;
  out.x = shifted.x + lower;
  out.objective = c.dot(out.x);
  out.pivots = shifted.pivots;
  return out;
}

}  // namespace causig::lp
