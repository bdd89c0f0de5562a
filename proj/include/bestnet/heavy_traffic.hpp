#pragma once

#include <cstdint>
#include <vector>

#include "bestnet/common.hpp"

// Heavy-traffic scaling limit for route_len = 2: the rescaled occupancy
// profile solves the boundary-value system
//
//   z c'(z) + c(z) v(z) = 0
//   z v''(z) + v'(z)    = c(z)          c(0) = 1, v(0) = 0, v'(0) = 1
//
// and the constant A = integral_0^inf c dz = lim_{z->inf} z v'(z) relates the
// mean occupancy to the load via E[X] ~ 1/((1-rho)^2 A). The origin is a
// regular singular point, so integration starts from the local series
//
//   c(z) = 1 - z + (5/8) z^2 + O(z^3)
//   v(z) = z - z^2/4 + (5/72) z^3 + O(z^4)
//
// (coefficients follow by matching orders in both equations) at z = 1e-8.

namespace bestnet {

struct StepStats {
  int64_t accepted = 0;
  int64_t rejected = 0;
  double min_step = 0.0;
  double max_step = 0.0;
};

struct OdeSolution {
  std::vector<double> grid;  // accepted step endpoints, ascending
  std::vector<double> c;
  std::vector<double> v;
  std::vector<double> v_prime;
  double A_integral = 0.0;  // quadrature of c over the grid plus tails
  double A_limit = 0.0;     // z * v'(z) at the right endpoint
  StepStats step_stats;
};

// Adaptive Dormand-Prince 5(4) integration from z = 1e-8. z_end is extended
// (doubling) until c(z_end) < 1e-12 so the integral of c is captured in full;
// the step size is also capped so the grid stays dense enough for cubic
// Hermite resampling downstream. Throws ConvergenceError if the step size
// underflows or the extension cap is hit.
OdeSolution solve_cv_system(double z_end = 50.0, double tol = 1e-10);

// Average of A_integral and A_limit; throws ConvergenceError if they disagree
// by more than 5% (they are two discretizations of the same constant).
double estimate_A(const OdeSolution& solution);

// Consistency probe: w(y) = v(e^y) - 1 satisfies the Blasius equation
// w''' + w w'' = 0 exactly. Resamples w on a uniform y-grid by cubic Hermite
// interpolation and returns the max |w''' + w w''| by central differences.
// Throws ValidationError if the grid does not cover [e^y_min, e^y_max] or
// n_points is too small for the stencil.
double blasius_residual(const OdeSolution& solution, double y_min = -4.0,
                        double y_max = 3.0, int n_points = 2001);

}  // namespace bestnet
