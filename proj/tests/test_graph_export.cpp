#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causig/error.hpp"
#include "causig/graph_export.hpp"
#include "causig/simgen.hpp"

using namespace causig;

namespace {

ModelParams zeros(Index m) {
  ModelParams p;
  p.Q = Matrix::Zero(m, m);
  p.A = Matrix::Zero(m, m);
  p.B1 = p.B2 = Matrix::Zero(m, 1);
  return p;
}

}  // namespace

TEST_CASE("column drives row") {
  ModelParams p = zeros(3);
  p.A(0, 1) = 0.7;
  const EdgeList e = export_edges(p, 0.5);
  REQUIRE(e.edges.size() == 1);
  CHECK(e.edges[0].source == 1);
  CHECK(e.edges[0].target == 0);
  CHECK(e.edges[0].weight == 1.0);
  CHECK(e.edges[0].timescale == Timescale::Slow);
}

TEST_CASE("each matrix is rescaled to the same range") {
  ModelParams p = zeros(3);
  p.Q(0, 1) = 0.01;
  p.Q(2, 0) = -0.005;
  p.A(1, 1) = 40.0;
  p.A(2, 1) = 10.0;
  const EdgeList e = export_edges(p, 0.3);
  REQUIRE(e.edges.size() == 3);
  // |1| ties: fast before slow.
  CHECK(e.edges[0].timescale == Timescale::Fast);
  CHECK(e.edges[0].weight == 1.0);
  CHECK(e.edges[1].timescale == Timescale::Slow);
  CHECK(e.edges[1].source == 1);
  CHECK(e.edges[1].target == 1);
  CHECK(e.edges[2].weight == -0.5);
  CHECK(e.edges[2].timescale == Timescale::Fast);
}

TEST_CASE("threshold and top_k") {
  SimConfig cfg;
  cfg.m = 8;
  cfg.seed = 3;
  const ModelParams p = sample_system(cfg);
  CHECK(export_edges(p, 1.5).edges.empty());
  const EdgeList all = export_edges(p, 0.0);
  CHECK(all.edges.size() == 8 * 7 + 8 * 8);
  for (std::size_t i = 1; i < all.edges.size(); ++i) {
    CHECK(std::abs(all.edges[i - 1].weight) >= std::abs(all.edges[i].weight));
  }
  for (const auto& e : all.edges) {
    CHECK(std::abs(e.weight) <= 1.0);
    if (e.timescale == Timescale::Fast) CHECK(e.source != e.target);
  }
  const EdgeList top = export_edges(p, 0.0, 5);
  REQUIRE(top.edges.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(top.edges[i].weight == all.edges[i].weight);
  CHECK_THROWS_AS(export_edges(p, -0.1), Error);
}

TEST_CASE("csv output") {
  ModelParams p = zeros(2);
  p.Q(1, 0) = -2.0;
  const std::string csv = export_edges(p, 0.0).to_csv();
  CHECK(csv == "source,target,weight,timescale\n0,1,-1,fast\n");
  CHECK(rescale_max_abs(Matrix::Zero(2, 2)).isZero(0));
}
