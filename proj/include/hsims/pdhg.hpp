#pragma once

#include <span>
#include <vector>

#include "hsims/core.hpp"

namespace hsims::pdhg {

// Dual variable: one (x, y) pair per pixel and class, H x W x k x 2 with the
// pair innermost (same pixel/class order as LabelField).
struct DualField {
  DualField() = default;
  DualField(int height, int width, int classes)
      : height(height), width(width), classes(classes),
        data(static_cast<std::size_t>(height) * width * classes * 2, 0.0) {}

  double& at(int i, int j, int l, int d) {
    return data[(((static_cast<std::size_t>(i) * width + j) * classes) + l) * 2 + d];
  }
  double at(int i, int j, int l, int d) const {
    return data[(((static_cast<std::size_t>(i) * width + j) * classes) + l) * 2 + d];
  }

  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<double> data;
};

struct PdhgConfig {
  double lambda = 1.0;   // regularization weight; must be positive here
  double step_h = 1.0;   // grid spacing used by the difference operators
  double tau = 0.0;      // primal step
  double sigma = 0.0;    // dual step
  double theta = 1.0;    // extrapolation
  double tol = 1e-6;     // sup-norm change between consecutive iterates
  int max_iter = 1000;
};

// Grid spacing 1/(max(H, W) - 1); 1 for a single-pixel image.
double grid_step(int height, int width);

// tau = sigma = h / (2 sqrt(2)), which satisfies tau * sigma * ||A||^2 <= 1
// for the forward-difference operator (||A||^2 <= 8 / h^2).
PdhgConfig make_config(int height, int width, double lambda);

// Forward differences, zero at the far boundary, scaled by 1/h.
DualField grad(const LabelField& u, double h);

// Exact algebraic adjoint of grad: <grad u, p> = <u, grad_adjoint p> up to
// rounding for all u, p.
LabelField grad_adjoint(const DualField& p, double h);

// Euclidean projection onto the unit simplex {x >= 0, sum x = 1}.
std::vector<double> project_simplex(std::span<const double> v);
void project_simplex_inplace(std::span<double> v, std::span<double> scratch);

// Euclidean projection of a 2-vector onto the unit ball.
void project_unit_ball(double& x, double& y);

// P_simplex(u - s * f) per pixel with s = tau / lambda.
LabelField prox_data(const LabelField& u, const std::vector<double>& f, double s);

struct SolveResult {
  LabelField u;
  int iterations = 0;
  double last_change = 0.0;  // sup-norm change of the final iteration
};

// Primal-dual iteration for the relaxed labeling problem
//   min_u <u, f>/lambda + sum_px |(grad u)(px)|
// over the per-pixel simplex. warm (optional) carries the dual variable
// across calls; zeros otherwise.
SolveResult solve_labeling(const LabelField& u0, const std::vector<double>& f,
                           const PdhgConfig& cfg, DualField* warm = nullptr);

// <u, f>/lambda + total variation; the objective the iteration minimizes.
double relaxed_energy(const LabelField& u, const std::vector<double>& f,
                      double lambda, double h);

// sum over pixels and classes of the pointwise gradient norm.
double total_variation(const LabelField& u, double h);

}  // namespace hsims::pdhg
