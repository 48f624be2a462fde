#include <catch2/catch_amalgamated.hpp>

#include "art/weighting.hpp"

using namespace art;

namespace {

// Direct evaluation of the weight recursion without the log-domain trick;
// independent oracle for the log-sum-exp implementation.
Matrix naive_sequential(const Vector& pi, const Matrix& losses, double lambda) {
  const Eigen::Index c = losses.rows();
  const Eigen::Index n = losses.cols();
  Matrix w(c, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector raw(c);
    for (Eigen::Index m = 0; m < c; ++m) {
      double cum = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) cum += losses(m, j);
      raw[m] = pi[m] * std::exp(-lambda * cum);
    }
    w.col(i) = raw / raw.sum();
  }
  return w;
}

Matrix random_losses(Rng& rng, int c, int n, double scale) {
  Matrix losses(c, n);
  for (int m = 0; m < c; ++m) {
    for (int i = 0; i < n; ++i) losses(m, i) = scale * rng.uniform01();
  }
  return losses;
}

}  // namespace

TEST_CASE("prior construction and validation") {
  const PriorWeights u = PriorWeights::uniform(4);
  CHECK_THAT(u.pi.sum(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  Vector raw(3);
  raw << 2.0, 1.0, 1.0;
  const PriorWeights p = PriorWeights::from(raw);
  CHECK_THAT(p.pi[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
  raw << -1.0, 1.0, 1.0;
  CHECK_THROWS_AS(PriorWeights::from(raw), config_error);
  CHECK_THROWS_AS(PriorWeights::from(Vector::Zero(2)), config_error);
}

TEST_CASE("equal losses keep the prior at every position") {
  const PriorWeights priors = PriorWeights::uniform(2);
  const Matrix losses = Matrix::Constant(2, 6, 1.7);
  const WeightTrace trace = sequential_weights(priors, losses, 1.0);
  for (int i = 0; i < 6; ++i) {
    CHECK_THAT(trace.sequential(0, i), Catch::Matchers::WithinAbs(0.5, 1e-14));
  }
  CHECK_THAT(trace.final[0], Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("two-candidate trace matches hand evaluation") {
  const PriorWeights priors = PriorWeights::uniform(2);
  Matrix losses(2, 2);
  losses << 0.0, 0.3, std::log(2.0), 0.9;
  const WeightTrace trace = sequential_weights(priors, losses, 1.0);
  CHECK_THAT(trace.sequential(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK_THAT(trace.sequential(1, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
  // position 1 uses only the first column: (e^0, e^{-ln 2}) scaled by the priors
  CHECK_THAT(trace.sequential(0, 1), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-14));
  CHECK_THAT(trace.sequential(1, 1), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-14));
  CHECK_THAT(trace.final[0], Catch::Matchers::WithinAbs(7.0 / 12.0, 1e-14));
  CHECK_THAT(trace.final[1], Catch::Matchers::WithinAbs(5.0 / 12.0, 1e-14));
  // inclusive running loss sums, nondecreasing
  CHECK_THAT(trace.cumulative_losses(1, 0), Catch::Matchers::WithinAbs(std::log(2.0), 1e-15));
  CHECK(trace.cumulative_losses(1, 1) >= trace.cumulative_losses(1, 0));
}

TEST_CASE("simplified weights match hand evaluation and reduce to priors") {
  const PriorWeights priors = PriorWeights::uniform(2);
  Vector totals(2);
  totals << 0.0, std::log(2.0);
  const Vector w = simplified_weights(priors, totals, 1.0);
  CHECK_THAT(w[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-14));
  CHECK_THAT(w[1], Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-14));
  const Vector equal = simplified_weights(priors, Vector::Constant(2, 5.0), 1.0);
  CHECK_THAT(equal[0], Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("vanishing lambda degenerates to the priors") {
  Vector raw(3);
  raw << 0.2, 0.3, 0.5;
  const PriorWeights priors = PriorWeights::from(raw);
  Rng rng(11);
  const Matrix losses = random_losses(rng, 3, 8, 10.0);
  const WeightTrace trace = sequential_weights(priors, losses, 1e-30);
  for (int i = 0; i < 8; ++i) {
    for (int m = 0; m < 3; ++m) {
      CHECK_THAT(trace.sequential(m, i), Catch::Matchers::WithinAbs(priors.pi[m], 1e-12));
    }
  }
}

TEST_CASE("shifting every candidate's loss at one position leaves weights unchanged") {
  const PriorWeights priors = PriorWeights::uniform(4);
  Rng rng(13);
  Matrix losses = random_losses(rng, 4, 10, 3.0);
  const WeightTrace before = sequential_weights(priors, losses, 0.8);
  losses.col(4).array() += 2.5;
  const WeightTrace after = sequential_weights(priors, losses, 0.8);
  CHECK((before.sequential - after.sequential).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log-domain sequential weights match the naive oracle") {
  Rng rng(17);
  for (int t = 0; t < 300; ++t) {
    const int c = 2 + static_cast<int>(rng.uniform_int(4));
    const int n = 1 + static_cast<int>(rng.uniform_int(20));
    const double lambda = 0.1 + 2.0 * rng.uniform01();
    Vector raw(c);
    for (int m = 0; m < c; ++m) raw[m] = 0.1 + rng.uniform01();
    const PriorWeights priors = PriorWeights::from(raw);
    const Matrix losses = random_losses(rng, c, n, 10.0);
    const WeightTrace trace = sequential_weights(priors, losses, lambda);
    const Matrix naive = naive_sequential(priors.pi, losses, lambda);
    CHECK((trace.sequential - naive).cwiseAbs().maxCoeff() < 1e-12);
    // simplified weights equal the hypothetical column one past the end
    const Vector simp = simplified_weights(priors, losses.rowwise().sum(), lambda);
    Vector raw_ext(c);
    for (int m = 0; m < c; ++m) {
      raw_ext[m] = priors.pi[m] * std::exp(-lambda * losses.row(m).sum());
    }
    const Vector naive_ext = raw_ext / raw_ext.sum();
    CHECK((simp - naive_ext).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("weight columns stay on the simplex under extreme losses") {
  const PriorWeights priors = PriorWeights::uniform(5);
  Rng rng(23);
  Matrix losses = random_losses(rng, 5, 30, 1e4);
  for (double lambda : {1e-3, 1.0, 1e3}) {
    const WeightTrace trace = sequential_weights(priors, losses, lambda);
    REQUIRE(trace.sequential.allFinite());
    for (int i = 0; i < 30; ++i) {
      CHECK_THAT(trace.sequential.col(i).sum(), Catch::Matchers::WithinAbs(1.0, 1e-10));
      CHECK(trace.sequential.col(i).minCoeff() >= 0.0);
    }
    CHECK_THAT(trace.final.sum(), Catch::Matchers::WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("smaller cumulative loss gives the weakly larger next weight") {
  const PriorWeights priors = PriorWeights::uniform(3);
  Rng rng(29);
  const Matrix losses = random_losses(rng, 3, 12, 2.0);
  const WeightTrace trace = sequential_weights(priors, losses, 1.3);
  for (int i = 1; i < 12; ++i) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (trace.cumulative_losses(a, i - 1) <= trace.cumulative_losses(b, i - 1)) {
          CHECK(trace.sequential(a, i) >= trace.sequential(b, i) - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("zero-prior candidates keep zero weight") {
  Vector raw(3);
  raw << 0.0, 1.0, 1.0;
  const PriorWeights priors = PriorWeights::from(raw);
  Matrix losses = Matrix::Zero(3, 4);
  losses.row(1).setConstant(2.0);
  const WeightTrace trace = sequential_weights(priors, losses, 1.0);
  for (int i = 0; i < 4; ++i) CHECK(trace.sequential(0, i) == 0.0);
  CHECK(trace.final[0] == 0.0);
}

TEST_CASE("weighting input validation") {
  const PriorWeights priors = PriorWeights::uniform(2);
  CHECK_THROWS_AS(sequential_weights(priors, Matrix(2, 0), 1.0), data_error);
  Matrix bad = Matrix::Zero(2, 3);
  bad(1, 2) = std::nan("");
  CHECK_THROWS_AS(sequential_weights(priors, bad, 1.0), data_error);
  bad(1, 2) = -0.5;
  CHECK_THROWS_AS(sequential_weights(priors, bad, 1.0), data_error);
  CHECK_THROWS_AS(sequential_weights(priors, Matrix::Zero(3, 2), 1.0), data_error);
  CHECK_THROWS_AS(sequential_weights(priors, Matrix::Zero(2, 2), 0.0), config_error);
  CHECK_THROWS_AS(simplified_weights(priors, Vector::Zero(2), -1.0), config_error);
}

TEST_CASE("default lambda rule") {
  CHECK(default_lambda(25, {50, 50}, 25) == 1.0);
  CHECK_THAT(default_lambda(25, {5000}, 25), Catch::Matchers::WithinAbs(201.0, 1e-12));
  CHECK(default_lambda(25, {}, 25) == 1.0);
  CHECK_THROWS_AS(default_lambda(25, {50}, 0), config_error);
}
