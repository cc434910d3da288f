#include "hsims/indicator.hpp"

#include <cmath>

#include "hsims/simd.hpp"

namespace hsims {

SegmentModel regularize_covariance(const Eigen::VectorXd& mu,
                                   const Eigen::MatrixXd& sigma, double eps) {
  const int L = static_cast<int>(mu.size());
  if (sigma.rows() != L || sigma.cols() != L)
    throw std::invalid_argument("regularize_covariance: dimension mismatch");
  if (!(eps > 0.0))
    throw std::invalid_argument("regularize_covariance: eps must be positive");
  if (!mu.allFinite() || !sigma.allFinite())
    throw NonFiniteError("regularize_covariance: non-finite statistics");

  SegmentModel m;
  m.mu = mu;
  m.sigma = 0.5 * (sigma + sigma.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.sigma);
  m.eigvecs.resize(L, L);
  m.eig_stddevs.resize(L);
  for (int c = 0; c < L; ++c) {
    int src = L - 1 - c;  // ascending -> descending
    double ev = eig.eigenvalues()(src);
    m.eig_stddevs(c) = ev > 0.0 ? std::sqrt(ev) : 0.0;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    // Deterministic sign: the largest-magnitude entry (first on ties) points
    // up, so refits of the same covariance reproduce the same factor.
    int arg = 0;
    for (int r = 1; r < L; ++r)
      if (std::abs(v(r)) > std::abs(v(arg))) arg = r;
    if (v(arg) < 0.0) v = -v;
    m.eigvecs.col(c) = v;
  }

  m.reg_stddevs.resize(L);
  m.log_det_reg = 0.0;
  for (int r = 0; r < L; ++r) {
    m.reg_stddevs(r) = std::max(m.eig_stddevs(r), eps);
    m.log_det_reg += std::log(m.reg_stddevs(r) * m.reg_stddevs(r));
  }

  m.whitener_cols.resize(static_cast<std::size_t>(L) * L);
  for (int c = 0; c < L; ++c)
    for (int r = 0; r < L; ++r)
      m.whitener_cols[static_cast<std::size_t>(c) * L + r] =
          m.eigvecs(c, r) / m.reg_stddevs(r);
  return m;
}

double mahalanobis_sqrt(std::span<const double> g, const SegmentModel& model,
                        double eta) {
  const int L = model.bands();
  if (static_cast<int>(g.size()) != L)
    throw std::invalid_argument("mahalanobis_sqrt: spectrum length mismatch");
  double q;
  simd::active().mahalanobis_sq(&q, g.data(), 1, L, model.whitener_cols.data(),
                                model.mu.data());
  return std::sqrt(q + eta);
}

double indicator_value(std::span<const double> g, const SegmentModel& model,
                       double eta) {
  return mahalanobis_sqrt(g, model, eta) + model.log_det_reg;
}

std::vector<double> indicator_field(const HyperCube& cube,
                                    const std::vector<SegmentModel>& models,
                                    double eta) {
  const int L = cube.bands();
  const int k = static_cast<int>(models.size());
  if (k == 0) throw std::invalid_argument("indicator_field: no models");
  for (const auto& m : models)
    if (m.bands() != L)
      throw std::invalid_argument("indicator_field: model bands do not match cube");

  const std::size_t n = cube.pixels();
  std::vector<double> f(n * k);
  std::vector<double> q(n);
  const auto& kr = simd::active();
  for (int l = 0; l < k; ++l) {
    kr.mahalanobis_sq(q.data(), cube.data().data(), n, L,
                      models[l].whitener_cols.data(), models[l].mu.data());
    kr.sqrt_shift(q.data(), q.data(), n, eta, models[l].log_det_reg);
    for (std::size_t px = 0; px < n; ++px) f[px * k + l] = q[px];
  }
  return f;
}

}  // namespace hsims
