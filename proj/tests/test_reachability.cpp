#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causig/error.hpp"
#include "causig/lp.hpp"
#include "causig/reachability.hpp"
#include "causig/simgen.hpp"

#include "oracles.hpp"

using namespace causig;

namespace {

ModelParams system(std::uint64_t seed, Index m = 5, Index n = 2) {
  SimConfig cfg;
  cfg.m = m;
  cfg.n = n;
  cfg.seed = seed;
  return sample_system(cfg);
}

double max_abs(const Matrix& M) { return M.cwiseAbs().maxCoeff(); }

int occupied(const Grid& g) {
  int count = 0;
  for (const auto& row : g)
    for (const auto& cell : row) count += cell.has_value();
  return count;
}

}  // namespace

TEST_CASE("evolution form without concurrent coupling") {
  ModelParams p = system(40);
  p.Q.setZero();
  const EvolutionForm f = to_evolution_form(p);
  CHECK(f.A_hat == p.A);
  CHECK(f.B1_hat == p.B1);
  CHECK(f.B2_hat == p.B2);
}

TEST_CASE("evolution form by hand") {
  ModelParams p;
  p.Q = Matrix::Zero(2, 2);
  p.Q(0, 1) = 0.5;
  p.A = Matrix::Identity(2, 2);
  p.B1 = p.B2 = Matrix::Zero(2, 1);
  const EvolutionForm f = to_evolution_form(p);
  CHECK(f.A_hat(0, 0) == doctest::Approx(1.0));
  CHECK(f.A_hat(0, 1) == doctest::Approx(0.5));
  CHECK(f.A_hat(1, 0) == doctest::Approx(0.0));
  CHECK(f.A_hat(1, 1) == doctest::Approx(1.0));
  CHECK(f.spectral_radius == doctest::Approx(1.0));

  p.Q(1, 0) = 2.0;  // I - Q singular
  CHECK_THROWS_AS(to_evolution_form(p), Error);
}

TEST_CASE("implicit and evolution trajectories agree") {
  Rng rng(41);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ModelParams p = system(41 + s, 6, 3);
    const Matrix u = oracle::gaussian(rng, 3, 21);
    const Matrix a = simulate_implicit(p, u);
    CHECK(max_abs(a - simulate_evolution(to_evolution_form(p), u)) < 1e-9);
    CHECK(max_abs(a - oracle::step_implicit(p, u)) < 1e-9);
  }
}

TEST_CASE("horizon one reaches through B2_hat only") {
  const ModelParams p = system(42);
  const EvolutionForm f = to_evolution_form(p);
  ReachOptions opts;
  opts.horizon = 1;
  const Vector v = reachability_landscape(p, opts).values;
  for (Index i = 0; i < p.m(); ++i) CHECK(v(i) == f.B2_hat.row(i).norm());

  // Bounding u(1) as well adds the B1_hat channel.
  opts.bound_terminal_input = true;
  const Vector both = reachability_landscape(p, opts).values;
  for (Index i = 0; i < p.m(); ++i) {
    const double expected = std::sqrt(f.B2_hat.row(i).squaredNorm() + f.B1_hat.row(i).squaredNorm());
    CHECK(both(i) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("single input channel reaches only its region") {
  ModelParams p;
  p.Q = Matrix::Zero(4, 4);
  p.A = Matrix::Zero(4, 4);
  p.B1 = Matrix::Zero(4, 1);
  p.B2 = Matrix::Zero(4, 1);
  p.B2(0, 0) = 1.0;
  for (Index h : {1, 3, 7}) {
    for (InputNorm norm : {InputNorm::Energy2, InputNorm::BoxInf}) {
      ReachOptions opts;
      opts.horizon = h;
      opts.norm = norm;
      const Vector v = reachability_landscape(p, opts).values;
      CHECK(v(0) == doctest::Approx(1.0));
      CHECK(v.tail(3).isZero(0));
    }
  }
}

TEST_CASE("map matches impulse responses and gradient ascent") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ModelParams p = system(43 + s);
    const Index h = 6;
    const Matrix G = oracle::impulse_map(p, h, h);
    CHECK(max_abs(input_to_state_map(to_evolution_form(p), h, false) - G) < 1e-10);
    CHECK(max_abs(input_to_state_map(to_evolution_form(p), h, true) - oracle::impulse_map(p, h, h + 1)) < 1e-10);

    ReachOptions opts;
    opts.horizon = h;
    const Vector v = reachability_landscape(p, opts).values;
    Rng rng(s);
    for (Index i = 0; i < p.m(); ++i) CHECK(std::abs(v(i) - oracle::ball_maximum(G, i, rng)) < 1e-6);
  }
}

TEST_CASE("box values: LP, closed form and replay") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ModelParams p = system(50 + s);
    ReachOptions opts;
    opts.horizon = 5;
    const Vector energy = reachability_landscape(p, opts).values;
    opts.norm = InputNorm::BoxInf;
    const Vector closed = reachability_landscape(p, opts).values;
    opts.use_lp = true;
    const Vector lp = reachability_landscape(p, opts).values;
    CHECK(max_abs(closed - lp) < 1e-9);
    CHECK((lp.array() >= energy.array()).all());

    const Matrix map = input_to_state_map(to_evolution_form(p), 5, false);
    for (Index i = 0; i < p.m(); ++i) {
      Matrix u = Matrix::Zero(p.n(), 6);
      u.leftCols(5) = maximizing_input(map, i, p.n(), InputNorm::BoxInf);
      CHECK(u.cwiseAbs().maxCoeff() <= 1.0);
      CHECK(std::abs(simulate_implicit(p, u)(i, 5) - lp(i)) < 1e-8);
      u.leftCols(5) = maximizing_input(map, i, p.n(), InputNorm::Energy2);
      CHECK(u.norm() == doctest::Approx(1.0));
      CHECK(std::abs(simulate_implicit(p, u)(i, 5) - energy(i)) < 1e-8);
    }
  }
}

TEST_CASE("simplex on small problems") {
  // max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3
  Matrix A(3, 2);
  A << 1, 1, 1, 3, 1, 0;
  const lp::Solution s = lp::maximize(Vector{{3.0, 2.0}}, A, Vector{{4.0, 6.0, 3.0}});
  CHECK(s.objective == doctest::Approx(11.0));
  CHECK(s.x(0) == doctest::Approx(3.0));
  CHECK(s.x(1) == doctest::Approx(1.0));

  // Degenerate vertex: redundant constraints through the optimum.
  Matrix D(4, 2);
  D << 1, 0, 0, 1, 1, 1, 2, 2;
  CHECK(lp::maximize(Vector{{1.0, 1.0}}, D, Vector{{1.0, 1.0, 2.0, 4.0}}).objective == doctest::Approx(2.0));

  Matrix U(1, 2);
  U << 1, -1;
  CHECK_THROWS_AS(lp::maximize(Vector{{0.0, 1.0}}, U, Vector{{1.0}}), Error);

  const lp::Solution box = lp::maximize_in_box(Vector{{2.0, -1.0, 0.0}}, Vector{{-1.0, -2.0, 0.0}},
                                               Vector{{3.0, 1.0, 5.0}});
  CHECK(box.objective == doctest::Approx(8.0));
  CHECK(box.x(0) == doctest::Approx(3.0));
  CHECK(box.x(1) == doctest::Approx(-2.0));
}

TEST_CASE("grid layout") {
  Grid g = grid_layout(Vector::Constant(10, 2.5), GridLayout::row_major(10));
  CHECK(occupied(g) == 10);
  for (Index r = 0; r < 10; ++r) CHECK(*g[static_cast<std::size_t>(r / kGridSize)][static_cast<std::size_t>(r % kGridSize)] == 1.0);

  g = grid_layout(Vector::LinSpaced(90, 1.0, 90.0), GridLayout::row_major(90));
  CHECK(occupied(g) == 90);
  CHECK(kGridSize * kGridSize - occupied(g) == 54);
  CHECK(*g[7][5] == 1.0);  // region 89

  g = grid_layout(Vector::Zero(5), GridLayout::row_major(5));
  for (int c = 0; c < 5; ++c) CHECK(*g[0][static_cast<std::size_t>(c)] == 0.0);

  const GridLayout custom = GridLayout::from_json(nlohmann::json{{"cells", {{11, 11}, {0, 3}}}});
  g = grid_layout(Vector{{2.0, 4.0}}, custom);
  CHECK(*g[11][11] == 0.5);
  CHECK(*g[0][3] == 1.0);
  CHECK(occupied(g) == 2);

  const std::string csv = grid_to_csv(g);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
  CHECK(csv.substr(0, csv.find('\n')) == ",,,1,,,,,,,,");

  CHECK_THROWS_AS(GridLayout({{0, 0}, {0, 0}}), Error);
  CHECK_THROWS_AS(GridLayout({{12, 0}}), Error);
  CHECK_THROWS_AS(GridLayout::row_major(145), Error);
  CHECK_THROWS_AS(grid_layout(Vector::Zero(3), GridLayout::row_major(2)), Error);
}

TEST_CASE("landscape grid presence") {
  ReachOptions opts;
  CHECK(reachability_landscape(system(60, 6, 2), opts).grid.has_value());
  SimConfig cfg;
  cfg.m = 150;
  cfg.n = 2;
  cfg.seed = 61;
  cfg.spectral_radius_target = 0.5;
  const ModelParams big = sample_system(cfg);
  opts.horizon = 2;
  CHECK_FALSE(reachability_landscape(big, opts).grid.has_value());
  CHECK_THROWS_AS(reachability_landscape(big, ReachOptions{0}), Error);
}
