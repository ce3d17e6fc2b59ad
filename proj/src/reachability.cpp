#include "causig/reachability.hpp"

#include "causig/error.hpp"
#include "causig/io.hpp"
#include "causig/lp.hpp"

#include <cmath>
#include <set>

namespace causig {

namespace {

Eigen::PartialPivLU<Matrix> factor_i_minus_q(const ModelParams& params) {
  const Index m = params.m();
  const Matrix IminusQ = Matrix::Identity(m, m) - params.Q;
  Eigen::JacobiSVD<Matrix> svd(IminusQ);
  const double smin = svd.singularValues()(m - 1);
  if (smin <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
    throw Error(ErrorCode::Singular,
                "I - Q is singular (smallest singular value " + std::to_string(smin) + ")");
  }
  return IminusQ.partialPivLu();
}

}  // namespace

const char* to_string(InputNorm norm) {
  return norm == InputNorm::Energy2 ? "energy2" : "boxinf";
}

InputNorm parse_input_norm(const std::string& name) {
  if (name == "energy2") return InputNorm::Energy2;
  if (name == "boxinf") return InputNorm::BoxInf;
  throw Error(ErrorCode::InvalidArgument, "unknown input norm '" + name + "' (expected energy2|boxinf)");
}

EvolutionForm to_evolution_form(const ModelParams& params) {
  params.validate();
  const auto lu = factor_i_minus_q(params);
  EvolutionForm form;
  form.A_hat = lu.solve(params.A);
  form.B1_hat = lu.solve(params.B1);
  form.B2_hat = lu.solve(params.B2);
  form.spectral_radius = form.A_hat.eigenvalues().cwiseAbs().maxCoeff();
  return form;
}

Matrix simulate_evolution(const EvolutionForm& form, const Matrix& inputs) {
  const Index m = form.A_hat.rows();
  if (inputs.rows() != form.B1_hat.cols() || inputs.cols() < 1) {
    throw Error(ErrorCode::ShapeMismatch, "input sequence does not match the model");
  }
  Matrix X = Matrix::Zero(m, inputs.cols());
  for (Index k = 1; k < inputs.cols(); ++k) {
    X.col(k) = form.A_hat * X.col(k - 1) + form.B1_hat * inputs.col(k) +
               form.B2_hat * inputs.col(k - 1);
  }
  return X;
}

Matrix simulate_implicit(const ModelParams& params, const Matrix& inputs) {
  params.validate();
  if (inputs.rows() != params.n() || inputs.cols() < 1) {
    throw Error(ErrorCode::ShapeMismatch, "input sequence does not match the model");
  }
  const auto lu = factor_i_minus_q(params);
  Matrix X = Matrix::Zero(params.m(), inputs.cols());
  for (Index k = 1; k < inputs.cols(); ++k) {
    X.col(k) = lu.solve(params.A * X.col(k - 1) + params.B1 * inputs.col(k) +
                        params.B2 * inputs.col(k - 1));
  }
  return X;
}

Matrix input_to_state_map(const EvolutionForm& form, Index horizon, bool bound_terminal_input) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const Index m = form.A_hat.rows();
  const Index n = form.B1_hat.cols();
  const Index steps = bound_terminal_input ? horizon + 1 : horizon;

  // powers[j] = A_hat^j for j = 0..horizon
  std::vector<Matrix> powers(static_cast<std::size_t>(horizon + 1));
  powers[0] = Matrix::Identity(m, m);
  for (Index j = 1; j <= horizon; ++j) {
    powers[static_cast<std::size_t>(j)] = form.A_hat * powers[static_cast<std::size_t>(j - 1)];
  }

  Matrix G = Matrix::Zero(m, n * steps);
  for (Index k = 0; k < steps; ++k) {
    auto block = G.middleCols(k * n, n);
    // u(k) enters through B2_hat at step k+1 and through B1_hat at step k.
    if (k + 1 <= horizon) block += powers[static_cast<std::size_t>(horizon - 1 - k)] * form.B2_hat;
    if (k >= 1 && k <= horizon) block += powers[static_cast<std::size_t>(horizon - k)] * form.B1_hat;
  }
  return G;
}

Matrix maximizing_input(const Matrix& map, Index region, Index inputs, InputNorm norm) {
  if (region < 0 || region >= map.rows()) throw Error(ErrorCode::InvalidArgument, "region out of range");
  if (inputs < 1 || map.cols() % inputs != 0) {
    throw Error(ErrorCode::ShapeMismatch, "map width is not a multiple of the input count");
  }
  const Vector g = map.row(region).transpose();
  Vector u = Vector::Zero(g.size());
  if (norm == InputNorm::Energy2) {
    const double len = g.norm();
    if (len > 0.0) u = g / len;
  } else {
    for (Index i = 0; i < g.size(); ++i) u(i) = g(i) > 0.0 ? 1.0 : (g(i) < 0.0 ? -1.0 : 0.0);
  }
  return Eigen::Map<const Matrix>(u.data(), inputs, g.size() / inputs);
}

GridLayout::GridLayout(std::vector<std::pair<int, int>> cell_of_region)
    : cells_(std::move(cell_of_region)) {
  std::set<std::pair<int, int>> used;
  for (std::size_t r = 0; r < cells_.size(); ++r) {
    const auto [row, col] = cells_[r];
    if (row < 0 || row >= kGridSize || col < 0 || col >= kGridSize) {
      throw Error(ErrorCode::InvalidArgument,
                  "region " + std::to_string(r) + " mapped outside the 12x12 grid");
    }
    if (!used.insert(cells_[r]).second) {
      throw Error(ErrorCode::InvalidArgument, "cell (" + std::to_string(row) + ", " +
                                                  std::to_string(col) + ") assigned twice");
    }
  }
}

GridLayout GridLayout::row_major(Index regions) {
  if (regions > kGridSize * kGridSize) {
    throw Error(ErrorCode::InvalidArgument, "more regions than grid cells");
  }
  std::vector<std::pair<int, int>> cells;
  for (Index r = 0; r < regions; ++r) {
    cells.emplace_back(static_cast<int>(r / kGridSize), static_cast<int>(r % kGridSize));
  }
  return GridLayout(std::move(cells));
}

GridLayout GridLayout::from_json(const nlohmann::json& j) {
  if (!j.contains("cells") || !j.at("cells").is_array()) {
    throw Error(ErrorCode::Parse, "layout JSON needs a 'cells' array");
  }
  std::vector<std::pair<int, int>> cells;
  for (const auto& c : j.at("cells")) {
    if (!c.is_array() || c.size() != 2) throw Error(ErrorCode::Parse, "layout cells must be [row, col]");
    cells.emplace_back(c[0].get<int>(), c[1].get<int>());
  }
  return GridLayout(std::move(cells));
}

Grid grid_layout(const Vector& values, const GridLayout& layout) {
  if (layout.regions() != values.size()) {
    throw Error(ErrorCode::InvalidArgument, "layout covers " + std::to_string(layout.regions()) +
                                                " regions but there are " +
                                                std::to_string(values.size()) + " values");
  }
  const double peak = values.size() ? values.maxCoeff() : 0.0;
  Grid grid{};
  for (Index r = 0; r < values.size(); ++r) {
    const auto [row, col] = layout.cells()[static_cast<std::size_t>(r)];
    grid[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
        peak > 0.0 ? values(r) / peak : values(r);
  }
  return grid;
}

std::string grid_to_csv(const Grid& grid) {
  std::string out;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      if (row[c]) out += io::format_number(*row[c]);
    }
    out += '\n';
  }
  return out;
}

ReachabilityLandscape reachability_landscape(const ModelParams& params, const ReachOptions& options,
                                             const std::optional<GridLayout>& layout) {
  if (options.horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  const EvolutionForm form = to_evolution_form(params);
  const Matrix G = input_to_state_map(form, options.horizon, options.bound_terminal_input);

  ReachabilityLandscape out;
  out.horizon = options.horizon;
  out.norm = options.norm;
  out.values.resize(params.m());
  for (Index i = 0; i < params.m(); ++i) {
    if (options.norm == InputNorm::Energy2) {
      out.values(i) = G.row(i).norm();
    } else if (options.use_lp) {
      const Index k = G.cols();
      out.values(i) = lp::maximize_in_box(G.row(i).transpose(), Vector::Constant(k, -1.0),
                                          Vector::Constant(k, 1.0))
                          .objective;
    } else {
      out.values(i) = G.row(i).lpNorm<1>();
    }
  }
  if (layout) {
    out.grid = grid_layout(out.values, *layout);
  } else if (params.m() <= kGridSize * kGridSize) {
    out.grid = grid_layout(out.values, GridLayout::row_major(params.m()));
  }
  return out;
}

}  // namespace causig
