#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "causig/assignment.hpp"
#include "causig/error.hpp"
#include "causig/modal.hpp"
#include "causig/simgen.hpp"

#include "oracles.hpp"

using namespace causig;

namespace {

CMatrix random_unit_columns(Rng& rng, Index dim, Index count) {
  CMatrix F(dim, count);
  for (Index j = 0; j < count; ++j)
    for (Index i = 0; i < dim; ++i) F(i, j) = {rng.normal(), rng.normal()};
  F.colwise().normalize();
  return F;
}

ModalFeatures wrap(const CMatrix& F) {
  ModalFeatures f;
  f.vectors = F;
  f.eigenvalues = CVector::Zero(F.cols());
  return f;
}

ModelParams system(std::uint64_t seed, Index m = 6) {
  SimConfig cfg;
  cfg.m = m;
  cfg.seed = seed;
  return sample_system(cfg);
}

}  // namespace

TEST_CASE("eigenmodes of the identity") {
  const Eigenmodes e = eigenmodes(Matrix::Identity(4, 4));
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(e.values(i) - 1.0) < 1e-14);
  const CMatrix gram = e.vectors.adjoint() * e.vectors;
  CHECK((gram - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigenmodes of a diagonal matrix") {
  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = 2.0;
  M(1, 1) = 3.0;
  const Eigenmodes e = eigenmodes(M);
  for (Index k = 0; k < 2; ++k) {
    const double value = e.values(k).real();
    CHECK((value == doctest::Approx(2.0) || value == doctest::Approx(3.0)));
    const Index axis = value < 2.5 ? 0 : 1;
    CHECK(std::abs(e.vectors(axis, k)) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(1 - axis, k)) < 1e-14);
  }
}

TEST_CASE("eigenmodes reconstruct a random matrix") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix M = oracle::gaussian(rng, 6, 6);
    const Eigenmodes e = eigenmodes(M);
    for (Index k = 0; k < 6; ++k) CHECK(e.vectors.col(k).norm() == doctest::Approx(1.0));
    if (e.condition > 1e6) continue;
    const CMatrix back = e.vectors * e.values.asDiagonal() * e.vectors.inverse();
    CHECK((back - M.cast<std::complex<double>>()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("feature sources") {
  const ModelParams p = system(22);
  const ModalFeatures slow = modal_features(p, FeatureSource::SlowOnly);
  const ModalFeatures fast = modal_features(p, FeatureSource::FastOnly);
  const ModalFeatures both = modal_features(p, FeatureSource::Both);
  CHECK(slow.size() == 6);
  CHECK(slow.dimension() == 6);
  CHECK(both.size() == 12);
  CHECK(both.vectors.leftCols(6) == slow.vectors);
  CHECK(both.vectors.rightCols(6) == fast.vectors);
  // Eigenvectors of A and Q respectively.
  const CMatrix Ac = p.A.cast<std::complex<double>>();
  for (Index k = 0; k < 6; ++k) {
    CHECK((Ac * slow.vectors.col(k) - slow.eigenvalues(k) * slow.vectors.col(k)).norm() < 1e-10);
  }
  CHECK(parse_feature_source("both") == FeatureSource::Both);
  CHECK(std::string(to_string(FeatureSource::SingleTimescale)) == "single");
  CHECK_THROWS_AS(parse_feature_source("medium"), Error);
}

TEST_CASE("both sources on 90 regions give 180 vectors") {
  SimConfig cfg;
  cfg.m = 90;
  cfg.n = 10;
  cfg.seed = 23;
  const ModalFeatures both = modal_features(sample_system(cfg), FeatureSource::Both);
  CHECK(both.size() == 180);
  CHECK(both.dimension() == 90);
}

TEST_CASE("identity dynamics: distance to itself is zero") {
  ModelParams p = system(24, 4);
  p.A = Matrix::Identity(4, 4);
  const ModalFeatures f = modal_features(p, FeatureSource::SlowOnly);
  CHECK(aligned_distance(f, f) < 1e-9);
}

TEST_CASE("distance invariances") {
  Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const Index N = 2 + trial % 6;
    const CMatrix F = random_unit_columns(rng, N + 1, N);
    CHECK(aligned_distance(wrap(F), wrap(F)) < 1e-9);

    std::vector<Index> perm(static_cast<std::size_t>(N));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = N - 1; i > 0; --i) {
      std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    }
    CMatrix G(F.rows(), N);
    for (Index j = 0; j < N; ++j) {
      const std::complex<double> scale = std::polar(0.01 + 5.0 * rng.uniform(), 6.0 * rng.uniform());
      G.col(perm[static_cast<std::size_t>(j)]) = scale * F.col(j);
    }
    CHECK(aligned_distance(wrap(F), wrap(G)) < 1e-9);

    const CMatrix H = random_unit_columns(rng, N + 1, N);
    const double d = aligned_distance(wrap(F), wrap(H));
    CHECK(d == doctest::Approx(aligned_distance(wrap(G), wrap(H))).epsilon(1e-12));
    CHECK(d == doctest::Approx(aligned_distance(wrap(H), wrap(F))).epsilon(1e-12));
  }
}

TEST_CASE("distance matches exhaustive search") {
  Rng rng(26);
  for (int trial = 0; trial < 30; ++trial) {
    const CMatrix F1 = random_unit_columns(rng, 6, 5);
    const CMatrix F2 = random_unit_columns(rng, 6, 5);
    CHECK(std::abs(aligned_distance(wrap(F1), wrap(F2)) - oracle::brute_force_distance(F1, F2)) < 1e-12);
  }
}

TEST_CASE("similarity is clamped and conjugate-symmetric") {
  Rng rng(27);
  const CMatrix F = random_unit_columns(rng, 5, 2);
  const double s = mode_similarity(F.col(0), F.col(1));
  CHECK(s >= 0.0);
  CHECK(s <= 1.0);
  CHECK(s == doctest::Approx(mode_similarity(F.col(1), F.col(0))));
  CHECK(mode_similarity(F.col(0), F.col(0)) == doctest::Approx(1.0));
  CHECK(1.0 - s == doctest::Approx(oracle::mode_cost(F.col(0), F.col(1))));
}

TEST_CASE("distance rejects mismatched sets") {
  Rng rng(28);
  CHECK_THROWS_AS(aligned_distance(wrap(random_unit_columns(rng, 4, 3)), wrap(random_unit_columns(rng, 4, 2))),
                  Error);
  CHECK_THROWS_AS(aligned_distance(wrap(random_unit_columns(rng, 4, 3)), wrap(random_unit_columns(rng, 5, 3))),
                  Error);
}

TEST_CASE("assignment matches exhaustive search on real costs") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Index N = 1 + trial % 7;
    Matrix cost = oracle::gaussian(rng, N, N);
    if (trial % 3 == 0) cost = cost.array().round();  // many ties
    const Assignment a = solve_assignment(cost);
    CHECK(std::abs(a.cost - oracle::brute_force_assignment(cost)) < 1e-12);
    std::vector<Index> cols = a.column_of_row;
    std::sort(cols.begin(), cols.end());
    for (Index i = 0; i < N; ++i) CHECK(cols[static_cast<std::size_t>(i)] == i);
  }
  CHECK_THROWS_AS(solve_assignment(Matrix::Zero(2, 3)), Error);
}
