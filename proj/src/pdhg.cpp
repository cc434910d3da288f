#include "hsims/pdhg.hpp"

#include <algorithm>
#include <cmath>

#include "hsims/simd.hpp"

namespace hsims::pdhg {

double grid_step(int height, int width) {
  int m = std::max(height, width);
  return m > 1 ? 1.0 / (m - 1) : 1.0;
}

PdhgConfig make_config(int height, int width, double lambda) {
  PdhgConfig cfg;
  cfg.lambda = lambda;
  cfg.step_h = grid_step(height, width);
  cfg.tau = cfg.sigma = cfg.step_h / (2.0 * std::sqrt(2.0));
  return cfg;
}

DualField grad(const LabelField& u, double h) {
  const int H = u.height(), W = u.width(), k = u.classes();
  double inv_h = 1.0 / h;
  DualField g(H, W, k);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j)
      for (int l = 0; l < k; ++l) {
        if (j + 1 < W) g.at(i, j, l, 0) = (u.at(i, j + 1, l) - u.at(i, j, l)) * inv_h;
        if (i + 1 < H) g.at(i, j, l, 1) = (u.at(i + 1, j, l) - u.at(i, j, l)) * inv_h;
      }
  return g;
}

LabelField grad_adjoint(const DualField& p, double h) {
  const int H = p.height, W = p.width, k = p.classes;
  double inv_h = 1.0 / h;
  LabelField out(H, W, k);
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j)
      for (int l = 0; l < k; ++l) {
        double t1 = 0.0;
        if (j + 1 < W) t1 -= p.at(i, j, l, 0);
        if (j > 0) t1 += p.at(i, j - 1, l, 0);
        double t2 = 0.0;
        if (i + 1 < H) t2 -= p.at(i, j, l, 1);
        if (i > 0) t2 += p.at(i - 1, j, l, 1);
        out.at(i, j, l) = (t1 + t2) * inv_h;
      }
  return out;
}

void project_simplex_inplace(std::span<double> v, std::span<double> scratch) {
  const std::size_t k = v.size();
  std::copy(v.begin(), v.end(), scratch.begin());
  std::sort(scratch.begin(), scratch.begin() + k, std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    cum += scratch[r];
    double t = (cum - 1.0) / static_cast<double>(r + 1);
    if (scratch[r] - t > 0.0) theta = t;
  }
  for (std::size_t i = 0; i < k; ++i) v[i] = std::max(v[i] - theta, 0.0);
}

std::vector<double> project_simplex(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("project_simplex: empty vector");
  std::vector<double> out(v.begin(), v.end());
  std::vector<double> scratch(v.size());
  project_simplex_inplace(out, scratch);
  return out;
}

void project_unit_ball(double& x, double& y) {
  double n2 = x * x + y * y;
  if (n2 > 1.0) {
    double s = 1.0 / std::sqrt(n2);
    x *= s;
    y *= s;
  }
}

namespace {

void simplex_all_pixels(LabelField& u) {
  const int k = u.classes();
  parallel_for(0, u.pixels(), [&](std::size_t px) {
    thread_local std::vector<double> scratch;
    scratch.resize(k);
    project_simplex_inplace(u.pixel(px), scratch);
  });
}

}  // namespace

LabelField prox_data(const LabelField& u, const std::vector<double>& f, double s) {
  if (f.size() != u.size())
    throw std::invalid_argument("prox_data: field size mismatch");
  LabelField out(u.height(), u.width(), u.classes());
  simd::active().sub_scaled(out.data().data(), u.data().data(), f.data(), s, u.size());
  simplex_all_pixels(out);
  return out;
}

SolveResult solve_labeling(const LabelField& u0, const std::vector<double>& f,
                           const PdhgConfig& cfg, DualField* warm) {
  const int H = u0.height(), W = u0.width(), k = u0.classes();
  if (f.size() != u0.size())
    throw std::invalid_argument("solve_labeling: indicator size mismatch");
  if (!(cfg.lambda > 0.0))
    throw std::invalid_argument("solve_labeling: lambda must be positive");
  if (!(cfg.tau > 0.0) || !(cfg.sigma > 0.0))
    throw std::invalid_argument("solve_labeling: steps must be positive");
  for (double v : f)
    if (!std::isfinite(v)) throw NonFiniteError("solve_labeling: indicator has NaN/inf");

  DualField local(H, W, k);
  DualField* p = warm ? warm : &local;
  if (warm && (warm->height != H || warm->width != W || warm->classes != k))
    throw std::invalid_argument("solve_labeling: warm dual has wrong shape");

  const auto& kr = simd::active();
  double inv_h = 1.0 / cfg.step_h;
  double s = cfg.tau / cfg.lambda;

  LabelField u = u0;
  LabelField unew(H, W, k);
  std::vector<double> ubar = u.data();

  SolveResult res;
  for (int it = 0; it < cfg.max_iter; ++it) {
    kr.dual_ascent(p->data.data(), ubar.data(), H, W, k, cfg.sigma, inv_h);
    kr.primal_descent(unew.data().data(), u.data().data(), p->data.data(), H, W,
                      k, cfg.tau, inv_h);
    kr.sub_scaled(unew.data().data(), unew.data().data(), f.data(), s, unew.size());
    simplex_all_pixels(unew);
    double change = kr.max_abs_diff(unew.data().data(), u.data().data(), u.size());
    kr.extrapolate(ubar.data(), unew.data().data(), u.data().data(), cfg.theta,
                   u.size());
    std::swap(u, unew);
    res.iterations = it + 1;
    res.last_change = change;
    if (change < cfg.tol) break;
  }
  res.u = std::move(u);
  return res;
}

double total_variation(const LabelField& u, double h) {
  const int H = u.height(), W = u.width(), k = u.classes();
  double inv_h = 1.0 / h;
  double tv = 0.0;
  for (int i = 0; i < H; ++i)
    for (int j = 0; j < W; ++j)
      for (int l = 0; l < k; ++l) {
        double gx = (j + 1 < W) ? (u.at(i, j + 1, l) - u.at(i, j, l)) * inv_h : 0.0;
        double gy = (i + 1 < H) ? (u.at(i + 1, j, l) - u.at(i, j, l)) * inv_h : 0.0;
        tv += std::sqrt(gx * gx + gy * gy);
      }
  return tv;
}

double relaxed_energy(const LabelField& u, const std::vector<double>& f,
                      double lambda, double h) {
  if (f.size() != u.size())
    throw std::invalid_argument("relaxed_energy: field size mismatch");
  double data = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) data += u.data()[i] * f[i];
  return data / lambda + total_variation(u, h);
}

}  // namespace hsims::pdhg
