#include "causig/modal.hpp"

#include "causig/assignment.hpp"
#include "causig/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace causig {

namespace {

constexpr double kDefectiveCondition = 1e12;

}  // namespace

const char* to_string(FeatureSource source) {
  switch (source) {
    case FeatureSource::SlowOnly: return "slow";
    case FeatureSource::FastOnly: return "fast";
    case FeatureSource::Both: return "both";
    case FeatureSource::SingleTimescale: return "single";
  }
  return "unknown";
}

FeatureSource parse_feature_source(const std::string& name) {
  if (name == "slow") return FeatureSource::SlowOnly;
  if (name == "fast") return FeatureSource::FastOnly;
  if (name == "both") return FeatureSource::Both;
  if (name == "single") return FeatureSource::SingleTimescale;
  throw Error(ErrorCode::InvalidArgument,
              "unknown feature source '" + name + "' (expected slow|fast|both|single)");
}

Eigenmodes eigenmodes(const Matrix& M) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "eigenmodes needs a non-empty square matrix");
  }
  if (!M.allFinite()) throw Error(ErrorCode::NonFinite, "eigenmodes input has non-finite entries");
  Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "eigen decomposition did not converge");
  }
  Eigenmodes out;
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  for (Index c = 0; c < out.vectors.cols(); ++c) {
    const double norm = out.vectors.col(c).norm();
    if (norm > 0.0) out.vectors.col(c) /= norm;
  }
  Eigen::JacobiSVD<CMatrix> svd(out.vectors);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  out.condition = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  if (!(out.condition <= kDefectiveCondition)) {
    std::ostringstream msg;
    msg << "eigenvector basis is nearly defective (condition " << out.condition << ")";
    warn(msg.str());
  }
  return out;
}

ModalFeatures modal_features(const ModelParams& params, FeatureSource source) {
  params.validate();
  ModalFeatures f;
  f.source = source;
  switch (source) {
    case FeatureSource::SlowOnly:
    case FeatureSource::SingleTimescale: {
      Eigenmodes e = eigenmodes(params.A);
      f.vectors = std::move(e.vectors);
      f.eigenvalues = std::move(e.values);
      break;
    }
    case FeatureSource::FastOnly: {
      Eigenmodes e = eigenmodes(params.Q);
      f.vectors = std::move(e.vectors);
      f.eigenvalues = std::move(e.values);
      break;
    }
    case FeatureSource::Both: {
      const Eigenmodes slow = eigenmodes(params.A);
      const Eigenmodes fast = eigenmodes(params.Q);
      const Index m = params.m();
      f.vectors.resize(m, 2 * m);
      f.vectors << slow.vectors, fast.vectors;
      f.eigenvalues.resize(2 * m);
      f.eigenvalues << slow.values, fast.values;
      break;
    }
  }
  return f;
}

double mode_similarity(const CVector& x, const CVector& y) {
  const double denom = x.norm() * y.norm();
  if (denom == 0.0) return 0.0;
  return std::clamp(std::abs(x.dot(y)) / denom, 0.0, 1.0);
}

Matrix alignment_cost(const ModalFeatures& F1, const ModalFeatures& F2) {
  if (F1.size() != F2.size()) {
    throw Error(ErrorCode::ShapeMismatch, "feature sets differ in size (" +
                                              std::to_string(F1.size()) + " vs " +
                                              std::to_string(F2.size()) + ")");
  }
  if (F1.dimension() != F2.dimension()) {
    throw Error(ErrorCode::ShapeMismatch, "feature vectors differ in dimension");
  }
  const Index N = F1.size();
  Matrix cost(N, N);
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < N; ++j) {
      cost(i, j) = 1.0 - mode_similarity(F1.vectors.col(i), F2.vectors.col(j));
    }
  }
  return cost;
}

double aligned_distance(const ModalFeatures& F1, const ModalFeatures& F2) {
  return solve_assignment(alignment_cost(F1, F2)).cost;
}

}  // namespace causig
