#pragma once

#include "causig/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace causig {

enum class Timescale { Fast, Slow };

const char* to_string(Timescale timescale);

// Nonzero coefficient (target, source) of Q or A read as source -> target:
// region `source` drives region `target` (concurrently for Q, one sample later
// for A).
struct Edge {
  Index source = 0;
  Index target = 0;
  double weight = 0.0;
  Timescale timescale = Timescale::Slow;
};

struct EdgeList {
  std::vector<Edge> edges;  // sorted by |weight| descending, ties by (timescale, target, source)
  double threshold = 0.0;

  // Columns source,target,weight,timescale.
  std::string to_csv() const;
};

// Q and A are each divided by their own largest absolute entry, so both lie in
// [-1, 1]; entries with |weight| >= threshold (and nonzero) are kept, then the
// top_k strongest when given.
EdgeList export_edges(const ModelParams& params, double threshold,
                      std::optional<std::size_t> top_k = std::nullopt);

// M / max|M|, or M unchanged when it is all zero.
Matrix rescale_max_abs(const Matrix& M);

}  // namespace causig
