#include "causig/core.hpp"

#include "causig/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>

namespace causig {

namespace {

std::atomic<bool> g_warnings_enabled{true};

void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

std::string shape(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::Singular: return "singular";
    case ErrorCode::Unstable: return "unstable";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

void warn(const std::string& message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) {
  g_warnings_enabled.store(enabled, std::memory_order_relaxed);
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

Recording::Recording(Matrix data, double dt, std::string subject_id, std::string task_id,
                     std::string scan_id, std::vector<Index> input_indices)
    : data_(std::move(data)),
      dt_(dt),
      subject_id_(std::move(subject_id)),
      task_id_(std::move(task_id)),
      scan_id_(std::move(scan_id)),
      input_indices_(std::move(input_indices)) {
  require(data_.rows() >= 2 && data_.cols() >= 2, ErrorCode::ShapeMismatch,
          "recording needs at least 2 regions and 2 samples, got " + shape(data_));
  require(data_.allFinite(), ErrorCode::NonFinite, "recording contains non-finite values");
  require(std::isfinite(dt_) && dt_ > 0.0, ErrorCode::InvalidArgument,
          "recording dt must be positive");
  for (Index i : input_indices_) {
    require(i >= 0 && i < data_.rows(), ErrorCode::InvalidArgument,
            "input index " + std::to_string(i) + " out of range");
  }
}

RegionPartition::RegionPartition(std::vector<Index> state_indices,
                                 std::vector<Index> input_indices, Index regions)
    : states_(std::move(state_indices)), inputs_(std::move(input_indices)) {
  require(!states_.empty(), ErrorCode::InvalidArgument, "partition needs at least one state");
  require(!inputs_.empty(), ErrorCode::InvalidArgument, "partition needs at least one input");
  require(this->regions() == regions, ErrorCode::InvalidArgument,
          "partition covers " + std::to_string(this->regions()) + " regions, expected " +
              std::to_string(regions));
  std::vector<bool> seen(static_cast<std::size_t>(regions), false);
  auto mark = [&](Index i) {
    require(i >= 0 && i < regions, ErrorCode::InvalidArgument,
            "region index " + std::to_string(i) + " out of range");
    require(!seen[static_cast<std::size_t>(i)], ErrorCode::InvalidArgument,
            "region index " + std::to_string(i) + " appears twice in partition");
    seen[static_cast<std::size_t>(i)] = true;
  };
  for (Index i : states_) mark(i);
  for (Index i : inputs_) mark(i);
}

RegionPartition RegionPartition::from_inputs(Index regions, std::vector<Index> input_indices) {
  std::vector<bool> is_input(static_cast<std::size_t>(std::max<Index>(regions, 0)), false);
  for (Index i : input_indices) {
    require(i >= 0 && i < regions, ErrorCode::InvalidArgument,
            "input index " + std::to_string(i) + " out of range");
    is_input[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Index> states;
  for (Index i = 0; i < regions; ++i) {
    if (!is_input[static_cast<std::size_t>(i)]) states.push_back(i);
  }
  return RegionPartition(std::move(states), std::move(input_indices), regions);
}

void ModelParams::validate() const {
  const Index m = A.rows();
  require(m >= 1 && A.cols() == m, ErrorCode::ShapeMismatch, "A must be square, got " + shape(A));
  require(Q.rows() == m && Q.cols() == m, ErrorCode::ShapeMismatch,
          "Q must be " + std::to_string(m) + "x" + std::to_string(m) + ", got " + shape(Q));
  require(B1.rows() == m && B2.rows() == m && B1.cols() == B2.cols() && B1.cols() >= 1,
          ErrorCode::ShapeMismatch, "B1/B2 must both be m x n, got " + shape(B1) + " and " +
                                        shape(B2));
  require(Q.allFinite() && A.allFinite() && B1.allFinite() && B2.allFinite(),
          ErrorCode::NonFinite, "model parameters contain non-finite values");
  for (Index i = 0; i < m; ++i) {
    require(Q(i, i) == 0.0, ErrorCode::InvalidArgument,
            "Q must have a zero diagonal (Q(" + std::to_string(i) + "," + std::to_string(i) +
                ") = " + std::to_string(Q(i, i)) + ")");
  }
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::InvalidArgument,
          "lambda must be nonnegative");
}

Matrix ModelParams::signature() const {
  Matrix R(m(), 2 * m() + 2 * n());
  R << Q, A, B1, B2;
  return R;
}

SplitData split(const Recording& rec, const RegionPartition& part) {
  require(part.regions() == rec.regions(), ErrorCode::ShapeMismatch,
          "partition covers " + std::to_string(part.regions()) + " regions but recording has " +
              std::to_string(rec.regions()));
  SplitData out{rec.data()(part.state_indices(), Eigen::all),
                rec.data()(part.input_indices(), Eigen::all)};
  return out;
}

ModelParams discretize(const ContinuousModel& cm) {
  const Index m = cm.F_s.rows();
  require(cm.tau > 0.0 && cm.tau < cm.dt, ErrorCode::InvalidArgument,
          "need 0 < tau < dt (tau = " + std::to_string(cm.tau) +
              ", dt = " + std::to_string(cm.dt) + ")");
  require(cm.F_s.cols() == m && cm.F_f.rows() == m && cm.F_f.cols() == m, ErrorCode::ShapeMismatch,
          "F_s and F_f must be square and equally sized");
  require(cm.G_s.rows() == m && cm.G_f.rows() == m && cm.G_s.cols() == cm.G_f.cols(),
          ErrorCode::ShapeMismatch, "G_s and G_f must both be m x n");
  require(cm.F_s.allFinite() && cm.F_f.allFinite() && cm.G_s.allFinite() && cm.G_f.allFinite(),
          ErrorCode::NonFinite, "continuous model contains non-finite values");
  for (Index i = 0; i < m; ++i) {
    require(cm.F_f(i, i) == 0.0, ErrorCode::InvalidArgument,
            "F_f must have a zero diagonal; entry " + std::to_string(i) + " is " +
                std::to_string(cm.F_f(i, i)));
  }
  const double slow = cm.dt - cm.tau;
  ModelParams p;
  p.Q = cm.tau * cm.F_f;
  p.A = Matrix::Identity(m, m) + slow * cm.F_s;
  p.B1 = cm.tau * cm.G_f;
  p.B2 = slow * cm.G_s;
  p.dt = cm.dt;
  p.lambda = 0.0;
  return p;
}

ContinuousModel continuous_from(const ModelParams& params, double tau) {
  params.validate();
  require(tau > 0.0 && tau < params.dt, ErrorCode::InvalidArgument, "need 0 < tau < dt");
  const double slow = params.dt - tau;
  const Index m = params.m();
  ContinuousModel cm;
  cm.F_f = params.Q / tau;
  cm.F_s = (params.A - Matrix::Identity(m, m)) / slow;
  cm.G_f = params.B1 / tau;
  cm.G_s = params.B2 / slow;
  cm.tau = tau;
  cm.dt = params.dt;
  return cm;
}

Recording downsample(const Recording& rec, Index factor) {
  require(factor >= 1, ErrorCode::InvalidArgument, "downsample factor must be >= 1");
  require(rec.samples() >= factor, ErrorCode::InvalidArgument,
          "recording shorter than downsample factor");
  const Index kept = (rec.samples() + factor - 1) / factor;
  Matrix out(rec.regions(), kept);
  for (Index c = 0; c < kept; ++c) out.col(c) = rec.data().col(c * factor);
  return Recording(std::move(out), rec.dt() * static_cast<double>(factor), rec.subject_id(),
                   rec.task_id(), rec.scan_id(), rec.input_indices());
}

Recording zscore_rows(const Recording& rec) {
  Matrix out = rec.data();
  const double T = static_cast<double>(out.cols());
  for (Index r = 0; r < out.rows(); ++r) {
    const double mean = out.row(r).mean();
    out.row(r).array() -= mean;
    const double sd = std::sqrt(out.row(r).squaredNorm() / T);
    if (sd > 0.0) out.row(r) /= sd;
  }
  return Recording(std::move(out), rec.dt(), rec.subject_id(), rec.task_id(), rec.scan_id(),
                   rec.input_indices());
}

}  // namespace causig
