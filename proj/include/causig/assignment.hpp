#pragma once

#include "causig/core.hpp"

#include <vector>

namespace causig {

struct Assignment {
  std::vector<Index> column_of_row;  // row r is matched to column column_of_row[r]
  double cost = 0.0;                 // sum of cost(r, column_of_row[r]) in row order
};

// Exact minimum-cost perfect matching on a square cost matrix (Hungarian
// method with potentials, O(N^3)).
Assignment solve_assignment(const Matrix& cost);

}  // namespace causig
