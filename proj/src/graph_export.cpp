#include "causig/graph_export.hpp"

#include "causig/error.hpp"
#include "causig/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace causig {

const char* to_string(Timescale timescale) {
  return timescale == Timescale::Fast ? "fast" : "slow";
}

Matrix rescale_max_abs(const Matrix& M) {
  const double peak = M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
  return peak > 0.0 ? Matrix(M / peak) : M;
}

EdgeList export_edges(const ModelParams& params, double threshold,
                      std::optional<std::size_t> top_k) {
  params.validate();
  if (!(threshold >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be >= 0");
  EdgeList out;
  out.threshold = threshold;

  auto collect = [&](const Matrix& M, Timescale ts) {
    const Matrix scaled = rescale_max_abs(M);
    for (Index target = 0; target < scaled.rows(); ++target) {
      for (Index source = 0; source < scaled.cols(); ++source) {
        if (ts == Timescale::Fast && source == target) continue;
        const double w = scaled(target, source);
        if (w != 0.0 && std::abs(w) >= threshold) out.edges.push_back({source, target, w, ts});
      }
    }
  };
  collect(params.Q, Timescale::Fast);
  collect(params.A, Timescale::Slow);

  std::stable_sort(out.edges.begin(), out.edges.end(), [](const Edge& a, const Edge& b) {
    const double wa = std::abs(a.weight);
    const double wb = std::abs(b.weight);
    if (wa != wb) return wa > wb;
    if (a.timescale != b.timescale) return a.timescale < b.timescale;
    if (a.target != b.target) return a.target < b.target;
    return a.source < b.source;
  });
  if (top_k && out.edges.size() > *top_k) out.edges.resize(*top_k);
  return out;
}

std::string EdgeList::to_csv() const {
  std::ostringstream out;
  out << "source,target,weight,timescale\n";
  for (const auto& e : edges) {
    out << e.source << ',' << e.target << ',' << io::format_number(e.weight) << ','
        << to_string(e.timescale) << '\n';
  }
  return out.str();
}

}  // namespace causig
