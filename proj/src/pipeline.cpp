#include "hsims/pipeline.hpp"

#include <cmath>

#include "hsims/kmeans.hpp"
#include "hsims/pdhg.hpp"
#include "hsims/preprocess.hpp"

namespace hsims::pipeline {

namespace {

void validate(const PipelineConfig& cfg, const HyperCube& cube) {
  if (cfg.k < 2) throw std::invalid_argument("segment: k must be at least 2");
  if (cfg.lambda < 0.0) throw std::invalid_argument("segment: lambda must be non-negative");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("segment: eps must be positive");
  if (cfg.mode == IndicatorMode::robust_anisotropic && !(cfg.eta > 0.0))
    throw std::invalid_argument("segment: eta must be positive in robust mode");
  if (!(cfg.outer_tol > 0.0) || !(cfg.fp_tol > 0.0) || !(cfg.pdhg_tol > 0.0))
    throw std::invalid_argument("segment: tolerances must be positive");
  if (cfg.outer_max < 1 || cfg.fp_max_iter < 1 || cfg.pdhg_max_iter < 1 ||
      cfg.kmeans_max_iter < 1)
    throw std::invalid_argument("segment: iteration caps must be positive");
  if (cfg.mnf_kept && (*cfg.mnf_kept < 1 || *cfg.mnf_kept > cube.bands()))
    throw std::invalid_argument("segment: mnf_kept out of range");
  if (!cube.all_finite()) throw NonFiniteError("segment: non-finite cube");
  if (cube.pixels() < static_cast<std::size_t>(cfg.k))
    throw std::invalid_argument("segment: fewer pixels than segments");
}

std::vector<std::size_t> segment_sizes(const LabelField& u) {
  std::vector<std::size_t> sizes(u.classes(), 0);
  for (std::size_t px = 0; px < u.pixels(); ++px) ++sizes[u.argmax_class(px)];
  return sizes;
}

LabelField argmin_onehot(const std::vector<double>& f, int H, int W, int k) {
  LabelField u(H, W, k);
  for (std::size_t px = 0; px < u.pixels(); ++px) {
    const double* row = f.data() + px * k;
    int best = 0;
    for (int l = 1; l < k; ++l)
      if (row[l] < row[best]) best = l;
    u.data()[px * k + best] = 1.0;
  }
  return u;
}

}  // namespace

LabelField threshold(const LabelField& u) {
  LabelField out(u.height(), u.width(), u.classes());
  for (std::size_t px = 0; px < u.pixels(); ++px)
    out.data()[px * u.classes() + u.argmax_class(px)] = 1.0;
  return out;
}

double mean_shift(const LabelField& u_curr,
                  const std::vector<Eigen::VectorXd>& mu_curr,
                  const std::vector<Eigen::VectorXd>& mu_prev) {
  if (mu_curr.size() != mu_prev.size() ||
      mu_curr.size() != static_cast<std::size_t>(u_curr.classes()))
    throw std::invalid_argument("mean_shift: class count mismatch");
  auto sizes = segment_sizes(u_curr);
  double total = static_cast<double>(u_curr.pixels());
  double s = 0.0;
  for (std::size_t l = 0; l < mu_curr.size(); ++l) {
    if (sizes[l] == 0) continue;
    double d = (mu_curr[l] - mu_prev[l]).lpNorm<Eigen::Infinity>();
    s += (static_cast<double>(sizes[l]) / total) * d;
  }
  return s;
}

bool outer_stop(const LabelField& u_curr,
                const std::vector<Eigen::VectorXd>& mu_curr,
                const std::vector<Eigen::VectorXd>& mu_prev, double tol) {
  return mean_shift(u_curr, mu_curr, mu_prev) < tol;
}

std::vector<double> indicator_field_ms2(const HyperCube& cube,
                                        const std::vector<Eigen::VectorXd>& means) {
  const int k = static_cast<int>(means.size());
  if (k == 0) throw std::invalid_argument("indicator_field_ms2: no means");
  for (const auto& m : means)
    if (m.size() != cube.bands())
      throw std::invalid_argument("indicator_field_ms2: mean bands do not match cube");
  std::vector<double> f(cube.pixels() * k);
  parallel_for(0, cube.pixels(), [&](std::size_t px) {
    auto g = cube.spectrum(px);
    for (int l = 0; l < k; ++l)
      f[px * k + l] = squared_distance(
          g, {means[l].data(), static_cast<std::size_t>(means[l].size())});
  });
  return f;
}

SegmentationResult segment(const HyperCube& cube, const PipelineConfig& cfg) {
  validate(cfg, cube);

  HyperCube reduced;
  const HyperCube* work = &cube;
  if (cfg.mnf_kept && *cfg.mnf_kept < cube.bands()) {
    mnf::MnfModel m = mnf::fit_mnf(cube, *cfg.mnf_kept);
    reduced = mnf::apply_mnf(cube, m);
    work = &reduced;
  }

  const int H = work->height(), W = work->width();
  const int L = work->bands(), k = cfg.k;
  const bool robust = cfg.mode == IndicatorMode::robust_anisotropic;

  Rng rng(cfg.seed);
  KmeansResult km = kmeans(work->data(), work->pixels(), L, k, rng, cfg.kmeans_max_iter);
  LabelField u = labels_to_field(km.labels, H, W, k);

  FixedPointConfig fp;
  fp.eps = cfg.eps;
  fp.eta = cfg.eta;
  fp.tol = cfg.fp_tol;
  fp.max_iter = cfg.fp_max_iter;

  pdhg::PdhgConfig pd = pdhg::make_config(H, W, cfg.lambda > 0.0 ? cfg.lambda : 1.0);
  pd.tol = cfg.pdhg_tol;
  pd.max_iter = cfg.pdhg_max_iter;
  pdhg::DualField dual(H, W, k);

  std::vector<SegmentStats> stats(k);
  std::vector<SegmentModel> models(k);
  std::vector<Eigen::VectorXd> means(k);
  std::vector<std::size_t> sizes = segment_sizes(u);
  for (int l = 0; l < k; ++l) {
    stats[l] = init_segment_stats(*work, u, l);
    means[l] = stats[l].mu;
    if (robust) models[l] = regularize_covariance(stats[l].mu, stats[l].sigma, cfg.eps);
  }

  SegmentationResult res;
  for (int m = 0; m < cfg.outer_max; ++m) {
    std::vector<Eigen::VectorXd> means_prev = means;

    // Statistics update; empty segments keep their previous model.
    std::vector<double> f;
    if (robust) {
      for (int l = 0; l < k; ++l) {
        if (sizes[l] == 0) continue;
        models[l] = fit_segment(*work, u, l, stats[l], fp);
        stats[l] = {models[l].mu, models[l].sigma};
        means[l] = models[l].mu;
      }
      f = indicator_field(*work, models, cfg.eta);
    } else {
      for (int l = 0; l < k; ++l) {
        if (sizes[l] == 0) continue;
        means[l] = init_segment_stats(*work, u, l).mu;
      }
      f = indicator_field_ms2(*work, means);
    }

    IterationRecord rec;
    if (cfg.lambda > 0.0) {
      pdhg::SolveResult sr = pdhg::solve_labeling(u, f, pd, &dual);
      rec.pdhg_iterations = sr.iterations;
      u = threshold(sr.u);
    } else {
      u = argmin_onehot(f, H, W, k);
    }
    sizes = segment_sizes(u);

    rec.energy = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) rec.energy += u.data()[i] * f[i];
    if (cfg.lambda > 0.0)
      rec.energy += cfg.lambda * pdhg::total_variation(u, pd.step_h);
    rec.segment_sizes = sizes;
    rec.mean_shift = mean_shift(u, means, means_prev);
    res.trace.push_back(std::move(rec));
    res.outer_iterations = m + 1;

    if (res.trace.back().mean_shift < cfg.outer_tol) break;
  }

  if (!robust) {
    // Expose the final per-segment statistics in the same shape the robust
    // mode returns.
    for (int l = 0; l < k; ++l) {
      if (sizes[l] > 0) {
        SegmentStats s = init_segment_stats(*work, u, l);
        models[l] = regularize_covariance(s.mu, s.sigma, cfg.eps);
      } else {
        models[l] = regularize_covariance(
            means[l], Eigen::MatrixXd::Zero(L, L), cfg.eps);
      }
    }
  }

  res.labels = std::move(u);
  res.models = std::move(models);
  return res;
}

}  // namespace hsims::pipeline
