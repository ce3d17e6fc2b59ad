#pragma once

#include "causig/core.hpp"

#include <complex>
#include <optional>
#include <string>

namespace causig {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

enum class FeatureSource { SlowOnly, FastOnly, Both, SingleTimescale };

const char* to_string(FeatureSource source);
// Accepts "slow", "fast", "both", "single".
FeatureSource parse_feature_source(const std::string& name);

struct Eigenmodes {
  CVector values;
  CMatrix vectors;     // unit-norm right eigenvectors, one per column
  double condition;    // 2-norm condition number of `vectors`
};

// Right eigenpairs of a real square matrix. Warns when the eigenvector basis
// is numerically defective (condition > 1e12) but still returns it.
Eigenmodes eigenmodes(const Matrix& M);

/// Unordered set of dynamic-mode vectors. Columns of `vectors` are unit norm;
/// eigenvalues ride along for diagnostics and never enter the distance.
struct ModalFeatures {
  CMatrix vectors;
  CVector eigenvalues;
  FeatureSource source = FeatureSource::SlowOnly;

  Index size() const noexcept { return vectors.cols(); }
  Index dimension() const noexcept { return vectors.rows(); }
};

// SlowOnly: modes of A. FastOnly: modes of Q. Both: slow then fast (2m
// vectors). SingleTimescale: modes of A, where the caller passes parameters
// fitted with Q (and B1) forced to zero.
ModalFeatures modal_features(const ModelParams& params, FeatureSource source);

// |x^H y| / (|x| |y|), clamped to [0, 1].
double mode_similarity(const CVector& x, const CVector& y);

// N x N matrix of 1 - similarity between the columns of F1 (rows) and F2.
Matrix alignment_cost(const ModalFeatures& F1, const ModalFeatures& F2);

// Minimum over one-to-one matchings of the summed (1 - similarity), solved
// exactly as a linear assignment problem.
double aligned_distance(const ModalFeatures& F1, const ModalFeatures& F2);

}  // namespace causig
