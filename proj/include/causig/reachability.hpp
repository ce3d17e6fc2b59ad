#pragma once

#include "causig/core.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace causig {

/// Explicit recursion x(k) = A_hat x(k-1) + B1_hat u(k) + B2_hat u(k-1) with
/// the concurrent coupling folded in through (I - Q)^{-1}.
struct EvolutionForm {
  Matrix A_hat;
  Matrix B1_hat;
  Matrix B2_hat;
  double spectral_radius = 0.0;
};

// Throws Singular (with the smallest singular value) when I - Q is singular.
EvolutionForm to_evolution_form(const ModelParams& params);

// Runs the evolution form from x(0) = 0. `inputs` is n x (K+1) holding
// u(0..K); returns the m x (K+1) states x(0..K).
Matrix simulate_evolution(const EvolutionForm& form, const Matrix& inputs);

// Same trajectory through the implicit model, solving for x(k) every step.
Matrix simulate_implicit(const ModelParams& params, const Matrix& inputs);

enum class InputNorm {
  Energy2,  // 2-norm of the stacked input sequence <= 1
  BoxInf,   // every |u_j(k)| <= 1
};

const char* to_string(InputNorm norm);
InputNorm parse_input_norm(const std::string& name);  // "energy2" | "boxinf"

struct ReachOptions {
  Index horizon = 20;
  InputNorm norm = InputNorm::Energy2;
  // When false u(horizon) is pinned to zero; when true it joins the bounded
  // input sequence.
  bool bound_terminal_input = false;
  // BoxInf only: solve each region's LP instead of the row 1-norm shortcut.
  bool use_lp = false;
};

// m x (n * S) map from the stacked free inputs [u(0); ...; u(S-1)] to
// x(horizon), where S = horizon (+1 with bound_terminal_input). Column block
// k is A_hat^(h-1-k) B2_hat + A_hat^(h-k) B1_hat, each term present only
// when u(k) enters at a step within the horizon.
Matrix input_to_state_map(const EvolutionForm& form, Index horizon, bool bound_terminal_input);

// Input sequence (n x S) attaining the maximum of e_i^T x(horizon).
Matrix maximizing_input(const Matrix& map, Index region, Index inputs, InputNorm norm);

inline constexpr int kGridSize = 12;
using Grid = std::array<std::array<std::optional<double>, kGridSize>, kGridSize>;

/// Region -> (row, col) placement on the 12 x 12 grid.
class GridLayout {
 public:
  explicit GridLayout(std::vector<std::pair<int, int>> cell_of_region);

  // Region r goes to cell (r / 12, r % 12).
  static GridLayout row_major(Index regions);
  // JSON {"cells": [[row, col], ...]} indexed by region.
  static GridLayout from_json(const nlohmann::json& j);

  Index regions() const noexcept { return static_cast<Index>(cells_.size()); }
  const std::vector<std::pair<int, int>>& cells() const noexcept { return cells_; }

 private:
  std::vector<std::pair<int, int>> cells_;
};

// Values divided by their maximum (when positive) and placed per layout;
// unmapped cells stay empty.
Grid grid_layout(const Vector& values, const GridLayout& layout);
// 12 rows of 12 comma-separated cells, empty cells blank.
std::string grid_to_csv(const Grid& grid);

struct ReachabilityLandscape {
  Vector values;
  Index horizon = 0;
  InputNorm norm = InputNorm::Energy2;
  std::optional<Grid> grid;  // absent when m > 144 and no layout is given
};

ReachabilityLandscape reachability_landscape(const ModelParams& params, const ReachOptions& options,
                                             const std::optional<GridLayout>& layout = std::nullopt);

}  // namespace causig
