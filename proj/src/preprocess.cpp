#include "hsims/preprocess.hpp"

#include <cmath>

#include "hsims/simd.hpp"

namespace hsims::mnf {

HyperCube normalize_cube(const HyperCube& cube) {
  if (!cube.all_finite()) throw NonFiniteError("normalize_cube: non-finite sample");
  const auto& k = simd::active();
  double lo, hi;
  k.minmax(cube.data().data(), cube.size(), &lo, &hi);
  double range = hi - lo;
  if (range == 0.0)
    throw DegenerateInputError("normalize_cube: constant cube has no dynamic range");
  HyperCube out(cube.height(), cube.width(), cube.bands());
  k.normalize01(out.data().data(), cube.data().data(), cube.size(), lo, range);
  return out;
}

Eigen::MatrixXd estimate_noise_covariance(const HyperCube& cube, double scale) {
  if (cube.height() < 2 || cube.width() < 2)
    throw std::invalid_argument("estimate_noise_covariance: needs at least 2x2 pixels");
  if (!cube.all_finite())
    throw NonFiniteError("estimate_noise_covariance: non-finite sample");
  int L = cube.bands();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd d(L);
  for (int i = 0; i + 1 < cube.height(); ++i) {
    for (int j = 0; j + 1 < cube.width(); ++j) {
      auto a = cube.spectrum(i, j);
      auto b = cube.spectrum(i + 1, j + 1);
      for (int c = 0; c < L; ++c) d[c] = a[c] - b[c];
      acc.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
    }
  }
  acc = acc.selfadjointView<Eigen::Lower>();
  double count = static_cast<double>(cube.height() - 1) * (cube.width() - 1);
  return acc * (scale / count);
}

MnfModel fit_from_covariances(const Eigen::MatrixXd& sigma_noise,
                              const Eigen::MatrixXd& sigma_data,
                              const Eigen::VectorXd& mean, int kept) {
  const int L = static_cast<int>(sigma_noise.rows());
  if (sigma_noise.cols() != L || sigma_data.rows() != L || sigma_data.cols() != L ||
      mean.size() != L)
    throw std::invalid_argument("fit_from_covariances: dimension mismatch");
  if (kept < 1 || kept > L)
    throw std::invalid_argument("fit_from_covariances: kept must be in [1, bands]");
  if (!sigma_noise.allFinite() || !sigma_data.allFinite())
    throw NonFiniteError("fit_from_covariances: non-finite covariance");

  Eigen::MatrixXd sn = 0.5 * (sigma_noise + sigma_noise.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> noise_eig(sn);
  if (noise_eig.eigenvalues()(0) <= 0.0) {
    double delta = 1e-10 * sn.trace() / L;
    if (delta <= 0.0)
      throw DegenerateInputError("fit_from_covariances: noise covariance is not positive");
    sn.diagonal().array() += delta;
    noise_eig.compute(sn);
    if (noise_eig.eigenvalues()(0) <= 0.0)
      throw DegenerateInputError("fit_from_covariances: noise covariance is not positive");
  }

  // Whiten against the noise, diagonalize the signal there, transform back.
  Eigen::VectorXd g_inv = noise_eig.eigenvalues().array().sqrt().inverse();
  Eigen::MatrixXd whiten = g_inv.asDiagonal() * noise_eig.eigenvectors().transpose();
  Eigen::MatrixXd signal = 0.5 * (sigma_data + sigma_data.transpose()) - sn;
  Eigen::MatrixXd signal_w = whiten * signal * whiten.transpose();
  signal_w = 0.5 * (signal_w + signal_w.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sig_eig(signal_w);

  MnfModel m;
  m.basis.resize(L, kept);
  m.snrs.resize(kept);
  Eigen::MatrixXd back = noise_eig.eigenvectors() * g_inv.asDiagonal();
  for (int c = 0; c < kept; ++c) {
    int src = L - 1 - c;  // solver sorts ascending
    m.basis.col(c) = back * sig_eig.eigenvectors().col(src);
    m.snrs(c) = sig_eig.eigenvalues()(src);
  }
  m.mean = mean;
  return m;
}

MnfModel fit_mnf(const HyperCube& cube, int kept) {
  if (kept < 1 || kept > cube.bands())
    throw std::invalid_argument("fit_mnf: kept must be in [1, bands]");
  if (!cube.all_finite()) throw NonFiniteError("fit_mnf: non-finite sample");
  const int L = cube.bands();
  const std::size_t n = cube.pixels();

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(L);
  for (std::size_t px = 0; px < n; ++px) {
    auto g = cube.spectrum(px);
    for (int c = 0; c < L; ++c) mean[c] += g[c];
  }
  mean /= static_cast<double>(n);

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd d(L);
  for (std::size_t px = 0; px < n; ++px) {
    auto g = cube.spectrum(px);
    for (int c = 0; c < L; ++c) d[c] = g[c] - mean[c];
    acc.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
  }
  Eigen::MatrixXd sigma_data = acc.selfadjointView<Eigen::Lower>();
  sigma_data /= static_cast<double>(n);

  return fit_from_covariances(estimate_noise_covariance(cube), sigma_data, mean, kept);
}

HyperCube apply_mnf(const HyperCube& cube, const MnfModel& model) {
  const int L = cube.bands();
  if (model.basis.rows() != L)
    throw std::invalid_argument("apply_mnf: cube bands do not match model");
  const int kept = static_cast<int>(model.basis.cols());
  HyperCube out(cube.height(), cube.width(), kept);
  parallel_for(0, cube.pixels(), [&](std::size_t px) {
    auto g = cube.spectrum(px);
    double* y = out.data().data() + px * kept;
    for (int c = 0; c < kept; ++c) {
      double s = 0.0;
      for (int r = 0; r < L; ++r) s += model.basis(r, c) * (g[r] - model.mean(r));
      y[c] = s;
    }
  });
  return out;
}

}  // namespace hsims::mnf
