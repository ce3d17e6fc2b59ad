#pragma once

#include "causig/core.hpp"

namespace causig::lp {

struct Solution {
  Vector x;
  double objective = 0.0;
  int pivots = 0;
};

// maximize c^T x  subject to  A x <= b,  x >= 0,  with b >= 0 so the origin
// is feasible. Dense tableau simplex with Bland's rule (no cycling).
// Throws Unstable if the problem is unbounded.
Solution maximize(const Vector& c, const Matrix& A, const Vector& b);

// maximize c^T u subject to lower <= u <= upper (finite bounds), posed as a
// standard-form LP through the shift v = u - lower.
Solution maximize_in_box(const Vector& c, const Vector& lower, const Vector& upper);

}  // namespace causig::lp
