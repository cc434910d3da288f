#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hsims/core.hpp"
#include "hsims/indicator.hpp"

using namespace hsims;

TEST_CASE("regularize_covariance on a diagonal matrix") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd sigma(2, 2);
  sigma << 4.0, 0.0, 0.0, 1.0;
  SegmentModel m = regularize_covariance(mu, sigma, 1e-3);

  CHECK(m.eig_stddevs[0] == doctest::Approx(2.0));
  CHECK(m.eig_stddevs[1] == doctest::Approx(1.0));
  CHECK(m.reg_stddevs[0] == doctest::Approx(2.0));
  CHECK(m.reg_stddevs[1] == doctest::Approx(1.0));
  CHECK(m.log_det_reg == doctest::Approx(std::log(4.0)));

  // descending order puts the big axis first; signs fixed positive
  CHECK(m.eigvecs(0, 0) == doctest::Approx(1.0));
  CHECK(m.eigvecs(1, 0) == doctest::Approx(0.0));
  CHECK(m.eigvecs(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("worked indicator values") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd sigma(2, 2);
  sigma << 4.0, 0.0, 0.0, 1.0;
  SegmentModel m = regularize_covariance(mu, sigma, 1e-3);

  std::vector<double> g{1.0, 0.0};
  double eta = 0.01;
  // (1,0) against diag(4,1): quadratic form 0.25
  CHECK(mahalanobis_sqrt({g.data(), 2}, m, eta) ==
        doctest::Approx(std::sqrt(0.26)).epsilon(1e-12));
  CHECK(indicator_value({g.data(), 2}, m, eta) ==
        doctest::Approx(std::sqrt(0.26) + std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("zero covariance floors every direction at eps") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(3, 3);
  SegmentModel m = regularize_covariance(mu, sigma, 0.1);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.eig_stddevs[i] == 0.0);
    CHECK(m.reg_stddevs[i] == 0.1);
  }
  CHECK(m.log_det_reg == doctest::Approx(6.0 * std::log(0.1)).epsilon(1e-12));
}

TEST_CASE("log_det_reg never falls below the eps floor") {
  Rng r(21);
  for (int t = 0; t < 20; ++t) {
    int L = 2 + static_cast<int>(r.next_below(5));
    Eigen::MatrixXd a(L, L);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) a(i, j) = 0.01 * r.next_normal();
    Eigen::MatrixXd sigma = a * a.transpose();  // tiny, often near-singular
    double eps = 0.05;
    SegmentModel m = regularize_covariance(Eigen::VectorXd::Zero(L), sigma, eps);
    CHECK(m.log_det_reg >= 2.0 * L * std::log(eps) - 1e-12);
    for (int i = 0; i < L; ++i) CHECK(m.reg_stddevs[i] >= eps);
  }
}

TEST_CASE("whitener inverts the regularized covariance") {
  Rng r(33);
  for (int t = 0; t < 10; ++t) {
    int L = 2 + static_cast<int>(r.next_below(5));
    Eigen::MatrixXd a(L, L);
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j) a(i, j) = r.next_normal();
    Eigen::MatrixXd sigma = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(L, L);
    SegmentModel m = regularize_covariance(Eigen::VectorXd::Zero(L), sigma, 1e-3);

    Eigen::MatrixXd B(L, L);
    for (int c = 0; c < L; ++c)
      for (int row = 0; row < L; ++row) B(row, c) = m.whitener_cols[c * L + row];
    // B columns are indexed by spectral band c: B(r, c) = eigvec_r(c)/stddev_r
    Eigen::MatrixXd reg = m.eigvecs *
                          m.reg_stddevs.array().square().matrix().asDiagonal() *
                          m.eigvecs.transpose();
    Eigen::MatrixXd shouldBeI = B * reg * B.transpose();
    CHECK((shouldBeI - Eigen::MatrixXd::Identity(L, L)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("eigvec sign convention is deterministic under perturbation") {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2.0, 0.3, 0.3, 1.0;
  SegmentModel m1 = regularize_covariance(Eigen::VectorXd::Zero(2), sigma, 1e-3);
  SegmentModel m2 = regularize_covariance(Eigen::VectorXd::Zero(2),
                                          sigma + 1e-14 * Eigen::MatrixXd::Ones(2, 2),
                                          1e-3);
  CHECK((m1.eigvecs - m2.eigvecs).cwiseAbs().maxCoeff() < 1e-6);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index argmax;
    m1.eigvecs.col(c).cwiseAbs().maxCoeff(&argmax);
    CHECK(m1.eigvecs(argmax, c) > 0.0);
  }
}

TEST_CASE("indicator is anisotropic") {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd sigma(2, 2);
  sigma << 100.0, 0.0, 0.0, 0.01;
  SegmentModel m = regularize_covariance(mu, sigma, 1e-3);
  std::vector<double> along{1.0, 0.0}, across{0.0, 1.0};
  double fa = indicator_value({along.data(), 2}, m, 1e-2);
  double fb = indicator_value({across.data(), 2}, m, 1e-2);
  CHECK(fb > fa);  // same Euclidean distance, very different likelihood
}

TEST_CASE("indicator_field equals the per-pixel evaluation") {
  Rng r(55);
  HyperCube cube(6, 5, 3);
  for (auto& v : cube.data()) v = r.next_normal();

  std::vector<SegmentModel> models;
  for (int l = 0; l < 2; ++l) {
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = r.next_normal();
    Eigen::VectorXd mu(3);
    for (int i = 0; i < 3; ++i) mu[i] = r.next_normal();
    models.push_back(regularize_covariance(
        mu, a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(3, 3), 1e-3));
  }

  double eta = 1e-2;
  std::vector<double> f = indicator_field(cube, models, eta);
  REQUIRE(f.size() == cube.pixels() * 2);
  for (std::size_t px = 0; px < cube.pixels(); ++px)
    for (int l = 0; l < 2; ++l)
      CHECK(f[px * 2 + l] == indicator_value(cube.spectrum(px), models[l], eta));
}

TEST_CASE("indicator validation") {
  Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(regularize_covariance(Eigen::VectorXd::Zero(3), i2, 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(regularize_covariance(Eigen::VectorXd::Zero(2), i2, 0.0),
                  std::invalid_argument);
  Eigen::MatrixXd nan2 = i2;
  nan2(0, 0) = std::nan("");
  CHECK_THROWS_AS(regularize_covariance(Eigen::VectorXd::Zero(2), nan2, 1e-3),
                  NonFiniteError);

  SegmentModel m = regularize_covariance(Eigen::VectorXd::Zero(2), i2, 1e-3);
  std::vector<double> g{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(mahalanobis_sqrt({g.data(), 3}, m, 1e-2), std::invalid_argument);

  HyperCube cube(1, 1, 3, {0.0, 0.0, 0.0});
  CHECK_THROWS_AS(indicator_field(cube, {m}, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(indicator_field(cube, {}, 1e-2), std::invalid_argument);
}
