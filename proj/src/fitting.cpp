#include "hsims/fitting.hpp"

#include <cmath>

namespace hsims {

namespace {

void check_class(const HyperCube& cube, const LabelField& u, int cls) {
  if (cls < 0 || cls >= u.classes())
    throw std::invalid_argument("segment fit: class index out of range");
  if (u.height() != cube.height() || u.width() != cube.width())
    throw std::invalid_argument("segment fit: label field does not match cube");
}

}  // namespace

SegmentStats init_segment_stats(const HyperCube& cube, const LabelField& u, int cls) {
  check_class(cube, u, cls);
  const int L = cube.bands();
  const int k = u.classes();
  const std::size_t n = cube.pixels();

  double wsum = 0.0;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(L);
  for (std::size_t px = 0; px < n; ++px) {
    double w = u.data()[px * k + cls];
    if (w == 0.0) continue;
    auto g = cube.spectrum(px);
    for (int c = 0; c < L; ++c) mu[c] += w * g[c];
    wsum += w;
  }
  if (wsum <= 0.0)
    throw DegenerateInputError("init_segment_stats: class has no members");
  mu /= wsum;

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(L, L);
  if (wsum > 1.0) {
    Eigen::VectorXd d(L);
    for (std::size_t px = 0; px < n; ++px) {
      double w = u.data()[px * k + cls];
      if (w == 0.0) continue;
      auto g = cube.spectrum(px);
      for (int c = 0; c < L; ++c) d[c] = g[c] - mu[c];
      sigma.selfadjointView<Eigen::Lower>().rankUpdate(d, w);
    }
    sigma = Eigen::MatrixXd(sigma.selfadjointView<Eigen::Lower>()) / (wsum - 1.0);
  }
  return {std::move(mu), std::move(sigma)};
}

SegmentStats fixed_point_step(const HyperCube& cube, const LabelField& u, int cls,
                              const SegmentModel& model,
                              const FixedPointConfig& cfg) {
  check_class(cube, u, cls);
  if (!(cfg.eta > 0.0))
    throw std::invalid_argument("fixed_point_step: eta must be positive");
  const int L = cube.bands();
  const int k = u.classes();
  const std::size_t n = cube.pixels();

  // Both updates reuse the distances h at the incoming model; only the mean
  // moves before the covariance accumulates.
  std::vector<double> w_over_h(n, 0.0);
  double wsum = 0.0, hsum = 0.0;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(L);
  for (std::size_t px = 0; px < n; ++px) {
    double w = u.data()[px * k + cls];
    if (w == 0.0) continue;
    auto g = cube.spectrum(px);
    double h = mahalanobis_sqrt(g, model, cfg.eta);
    double wh = w / h;
    w_over_h[px] = wh;
    for (int c = 0; c < L; ++c) mu[c] += wh * g[c];
    wsum += w;
    hsum += wh;
  }
  if (wsum <= 0.0)
    throw DegenerateInputError("fixed_point_step: class has no members");
  mu /= hsum;

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd d(L);
  for (std::size_t px = 0; px < n; ++px) {
    double wh = w_over_h[px];
    if (wh == 0.0) continue;
    auto g = cube.spectrum(px);
    for (int c = 0; c < L; ++c) d[c] = g[c] - mu[c];
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(d, 0.5 * wh);
  }
  sigma = Eigen::MatrixXd(sigma.selfadjointView<Eigen::Lower>()) / wsum;
  return {std::move(mu), std::move(sigma)};
}

SegmentModel fit_segment(const HyperCube& cube, const LabelField& u, int cls,
                         const std::optional<SegmentStats>& init,
                         const FixedPointConfig& cfg) {
  SegmentStats s = init ? *init : init_segment_stats(cube, u, cls);
  SegmentModel model = regularize_covariance(s.mu, s.sigma, cfg.eps);
  for (int it = 0; it < cfg.max_iter; ++it) {
    SegmentStats next = fixed_point_step(cube, u, cls, model, cfg);
    SegmentModel next_model = regularize_covariance(next.mu, next.sigma, cfg.eps);
    double change = (next_model.mu - model.mu).norm() +
                    (next_model.reg_stddevs - model.reg_stddevs).norm() +
                    (next_model.eigvecs - model.eigvecs).norm();
    model = std::move(next_model);
    if (change < cfg.tol) break;
  }
  return model;
}

double data_energy(const HyperCube& cube, const LabelField& u, int cls,
                   const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                   double eta) {
  check_class(cube, u, cls);
  const int L = cube.bands();
  const int k = u.classes();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma);
  double det = lu.determinant();
  if (!(det > 0.0))
    throw std::invalid_argument("data_energy: determinant must be positive");
  double log_det = std::log(det);

  double e = 0.0;
  Eigen::VectorXd d(L);
  for (std::size_t px = 0; px < cube.pixels(); ++px) {
    double w = u.data()[px * k + cls];
    if (w == 0.0) continue;
    auto g = cube.spectrum(px);
    for (int c = 0; c < L; ++c) d[c] = g[c] - mu[c];
    double q = d.dot(lu.solve(d));
    e += w * (std::sqrt(q + eta) + log_det);
  }
  return e;
}

EnergyGradients data_energy_gradients(const HyperCube& cube, const LabelField& u,
                                      int cls, const Eigen::VectorXd& mu,
                                      const Eigen::MatrixXd& sigma, double eta) {
  check_class(cube, u, cls);
  const int L = cube.bands();
  const int k = u.classes();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("data_energy_gradients: sigma must be positive definite");

  EnergyGradients grad;
  grad.d_mu = Eigen::VectorXd::Zero(L);
  grad.d_sigma = Eigen::MatrixXd::Zero(L, L);
  double wsum = 0.0;
  Eigen::VectorXd d(L);
  for (std::size_t px = 0; px < cube.pixels(); ++px) {
    double w = u.data()[px * k + cls];
    if (w == 0.0) continue;
    auto g = cube.spectrum(px);
    for (int c = 0; c < L; ++c) d[c] = g[c] - mu[c];
    Eigen::VectorXd sd = llt.solve(d);
    double h = std::sqrt(d.dot(sd) + eta);
    grad.d_mu -= (w / h) * sd;
    grad.d_sigma -= (0.5 * w / h) * (sd * sd.transpose());
    wsum += w;
  }
  grad.d_sigma += wsum * llt.solve(Eigen::MatrixXd::Identity(L, L));
  return grad;
}

}  // namespace hsims
