#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace causig {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A p x T recording of region activities (one region per row) sampled every
/// `dt` seconds. Validated on construction and immutable afterwards.
class Recording {
 public:
  Recording(Matrix data, double dt, std::string subject_id, std::string task_id,
            std::string scan_id, std::vector<Index> input_indices = {});

  const Matrix& data() const noexcept { return data_; }
  double dt() const noexcept { return dt_; }
  const std::string& subject_id() const noexcept { return subject_id_; }
  const std::string& task_id() const noexcept { return task_id_; }
  const std::string& scan_id() const noexcept { return scan_id_; }
  // Input regions as recorded in the sidecar; may be empty.
  const std::vector<Index>& input_indices() const noexcept { return input_indices_; }

  Index regions() const noexcept { return data_.rows(); }
  Index samples() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
  double dt_;
  std::string subject_id_;
  std::string task_id_;
  std::string scan_id_;
  std::vector<Index> input_indices_;
};

/// Split of the p regions into m states and n inputs.
class RegionPartition {
 public:
  RegionPartition(std::vector<Index> state_indices, std::vector<Index> input_indices,
                  Index regions);

  // States are the complement of `input_indices`, in ascending order.
  static RegionPartition from_inputs(Index regions, std::vector<Index> input_indices);

  const std::vector<Index>& state_indices() const noexcept { return states_; }
  const std::vector<Index>& input_indices() const noexcept { return inputs_; }
  Index states() const noexcept { return static_cast<Index>(states_.size()); }
  Index inputs() const noexcept { return static_cast<Index>(inputs_.size()); }
  Index regions() const noexcept { return states() + inputs(); }

 private:
  std::vector<Index> states_;
  std::vector<Index> inputs_;
};

/// Continuous two-timescale system
///   dx/dt = F_s x + G_s u + (fast terms F_f x + G_f u acting over tau)
/// sampled every dt, with the fast sub-interval tau < dt.
struct ContinuousModel {
  Matrix F_s;
  Matrix F_f;
  Matrix G_s;
  Matrix G_f;
  double tau = 0.002;
  double dt = 0.72;
};

/// Causal signature R = [Q A B1 B2] of
///   x(k) = Q x(k) + A x(k-1) + B1 u(k) + B2 u(k-1),   Q_ii = 0.
struct ModelParams {
  Matrix Q;
  Matrix A;
  Matrix B1;
  Matrix B2;
  double lambda = 0.0;
  double dt = 0.72;

  Index m() const noexcept { return A.rows(); }
  Index n() const noexcept { return B1.cols(); }

  // Throws ShapeMismatch / NonFinite / InvalidArgument on violated invariants.
  void validate() const;

  // m x (2m + 2n) concatenation [Q A B1 B2].
  Matrix signature() const;
};

struct SplitData {
  Matrix X;  // m x T
  Matrix U;  // n x T
};

SplitData split(const Recording& rec, const RegionPartition& part);

ModelParams discretize(const ContinuousModel& cm);

// Inverse of discretize for a known tau; recovers (F_s, F_f, G_s, G_f).
ContinuousModel continuous_from(const ModelParams& params, double tau);

Recording downsample(const Recording& rec, Index factor);

// Per-row z-scoring. Rows with zero deviation are centred only.
Recording zscore_rows(const Recording& rec);

bool all_finite(const Matrix& M);

}  // namespace causig
