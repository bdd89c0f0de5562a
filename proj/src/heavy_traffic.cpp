#include "bestnet/heavy_traffic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace bestnet {

namespace {

constexpr double kStartZ = 1e-8;
constexpr double kCFloor = 1e-12;  // trajectory is integrated until c drops here
constexpr double kZHardCap = 1e6;

using State = std::array<double, 3>;  // c, v, v'

inline State rhs(double z, const State& y) {
  return {-y[0] * y[1] / z, y[2], (y[0] - y[2]) / z};
}

// Dormand-Prince 5(4) pair, FSAL. Returns the 5th-order step and the
// embedded error estimate.
struct StepResult {
  State y5;
  State err;
  State k_last;  // f at the step end, reusable as k1 of the next step
};

StepResult dopri5_step(double z, double h, const State& y, const State& k1) {
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                   e3 = 500.0 / 1113 - 7571.0 / 16695,
                   e4 = 125.0 / 192 - 393.0 / 640,
                   e5 = -2187.0 / 6784 + 92097.0 / 339200,
                   e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  auto at = [&](const State& incr) {
    State out;
    for (int i = 0; i < 3; ++i) out[i] = y[i] + h * incr[i];
    return out;
  };

  State k2 = rhs(z + h / 5, at({a21 * k1[0], a21 * k1[1], a21 * k1[2]}));
  State s3;
  for (int i = 0; i < 3; ++i) s3[i] = a31 * k1[i] + a32 * k2[i];
  State k3 = rhs(z + 3 * h / 10, at(s3));
  State s4;
  for (int i = 0; i < 3; ++i) s4[i] = a41 * k1[i] + a42 * k2[i] + a43 * k3[i];
  State k4 = rhs(z + 4 * h / 5, at(s4));
  State s5;
  for (int i = 0; i < 3; ++i)
    s5[i] = a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
  State k5 = rhs(z + 8 * h / 9, at(s5));
  State s6;
  for (int i = 0; i < 3; ++i)
    s6[i] = a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
  State k6 = rhs(z + h, at(s6));

  StepResult r;
  for (int i = 0; i < 3; ++i)
    r.y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                          b6 * k6[i]);
  State k7 = rhs(z + h, r.y5);
  for (int i = 0; i < 3; ++i)
    r.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                    e6 * k6[i] + e7 * k7[i]);
  r.k_last = k7;
  return r;
}

// series start: c = 1 - z + (5/8)z^2, v = z - z^2/4 + (5/72)z^3,
// v' = 1 - z/2 + (5/24)z^2; truncation error O(z^3) ~ 1e-24 at z = 1e-8
State series_start(double z) {
  return {1.0 - z + 0.625 * z * z,
          z - 0.25 * z * z + (5.0 / 72.0) * z * z * z,
          1.0 - 0.5 * z + (5.0 / 24.0) * z * z};
}

// cubic Hermite on [z0, z1] with values/derivatives at both ends
inline double hermite(double z, double z0, double z1, double f0, double f1,
                      double d0, double d1) {
  const double h = z1 - z0;
  const double t = (z - z0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * h * d1;
}

}  // namespace

OdeSolution solve_cv_system(double z_end, double tol) {
  if (!(z_end > kStartZ)) throw ValidationError("solve_cv_system: z_end too small");
  if (!(tol > 0.0) || tol > 1e-2)
    throw ValidationError("solve_cv_system: tol must be in (0, 1e-2]");

  OdeSolution sol;
  sol.step_stats.min_step = std::numeric_limits<double>::infinity();

  double z = kStartZ;
  State y = series_start(z);
  State k1 = rhs(z, y);
  double h = 1e-6;
  double target = z_end;

  auto push = [&](double zz, const State& yy) {
    sol.grid.push_back(zz);
    sol.c.push_back(yy[0]);
    sol.v.push_back(yy[1]);
    sol.v_prime.push_back(yy[2]);
  };
  push(z, y);

  const double atol = 1e-14;
  while (true) {
    if (z >= target) {
      if (y[0] < kCFloor) break;  // integral of c fully captured
      if (target > kZHardCap)
        throw ConvergenceError(
            "solve_cv_system: c has not decayed below " +
                std::to_string(kCFloor) + " by z = " + std::to_string(target),
            y[0]);
      target *= 2.0;
    }
    // density cap keeps the grid fine enough for downstream Hermite
    // resampling (interpolation error ~ (dz)^4)
    const double h_cap = 0.004 * std::max(z, 0.05);
    h = std::min({h, h_cap, target - z});
    if (h < 1e-13 * std::max(z, 1.0))
      throw ConvergenceError("solve_cv_system: step size underflow at z = " +
                                 std::to_string(z),
                             h);

    StepResult st = dopri5_step(z, h, y, k1);
    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double scale =
          atol + tol * std::max(std::abs(y[i]), std::abs(st.y5[i]));
      err = std::max(err, std::abs(st.err[i]) / scale);
    }
    if (err <= 1.0) {
      z += h;
      y = st.y5;
      k1 = st.k_last;
      push(z, y);
      ++sol.step_stats.accepted;
      sol.step_stats.min_step = std::min(sol.step_stats.min_step, h);
      sol.step_stats.max_step = std::max(sol.step_stats.max_step, h);
    } else {
      ++sol.step_stats.rejected;  // k1 still matches (z, y), no refresh needed
    }
    const double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(grow, 0.2, 5.0);
  }

  // A as quadrature of c: Hermite-corrected trapezoid per interval (uses
  // c' = -cv/z at the nodes), plus the exact head integral below the series
  // start and an exponential tail beyond the endpoint.
  double integral = kStartZ - 0.5 * kStartZ * kStartZ;  // int_0^z0 (1 - z) dz
  for (size_t i = 0; i + 1 < sol.grid.size(); ++i) {
    const double dz = sol.grid[i + 1] - sol.grid[i];
    const double c0 = sol.c[i], c1 = sol.c[i + 1];
    const double d0 = -c0 * sol.v[i] / sol.grid[i];
    const double d1 = -c1 * sol.v[i + 1] / sol.grid[i + 1];
    integral += 0.5 * dz * (c0 + c1) + dz * dz / 12.0 * (d0 - d1);
  }
  {
    // local decay rate c'/c = -v/z gives the tail closure
    const double zb = sol.grid.back();
    const double rate = sol.v.back() / zb;
    if (rate > 0.0) integral += sol.c.back() / rate;
  }
  sol.A_integral = integral;
  sol.A_limit = sol.grid.back() * sol.v_prime.back();
  return sol;
}

double estimate_A(const OdeSolution& solution) {
  if (solution.grid.size() < 2)
    throw ValidationError("estimate_A: empty solution");
  const double a = solution.A_integral, b = solution.A_limit;
  const double avg = 0.5 * (a + b);
  if (std::abs(a - b) > 0.05 * avg)
    throw ConvergenceError("estimate_A: integral (" + std::to_string(a) +
                               ") and limit (" + std::to_string(b) +
                               ") estimators disagree by more than 5%",
                           std::abs(a - b));
  return avg;
}

double blasius_residual(const OdeSolution& solution, double y_min, double y_max,
                        int n_points) {
  if (n_points < 7)
    throw ValidationError("blasius_residual: need at least 7 grid points");
  if (!(y_max > y_min))
    throw ValidationError("blasius_residual: empty y range");
  if (solution.grid.size() < 4)
    throw ValidationError("blasius_residual: solution grid too small");
  const double z_lo = std::exp(y_min), z_hi = std::exp(y_max);
  if (solution.grid.front() > z_lo || solution.grid.back() < z_hi)
    throw ValidationError(
        "blasius_residual: solution grid does not cover [exp(y_min), "
        "exp(y_max)]");

  const double h = (y_max - y_min) / (n_points - 1);
  std::vector<double> w(n_points);
  size_t j = 0;
  for (int i = 0; i < n_points; ++i) {
    const double z = std::exp(y_min + h * i);
    while (j + 2 < solution.grid.size() && solution.grid[j + 1] < z) ++j;
    w[i] = hermite(z, solution.grid[j], solution.grid[j + 1], solution.v[j],
                   solution.v[j + 1], solution.v_prime[j],
                   solution.v_prime[j + 1]) -
           1.0;
  }

  double worst = 0.0;
  const double h2 = h * h, h3 = h2 * h;
  for (int i = 2; i + 2 < n_points; ++i) {
    const double w2 = (w[i - 1] - 2.0 * w[i] + w[i + 1]) / h2;
    const double w3 =
        (w[i + 2] - 2.0 * w[i + 1] + 2.0 * w[i - 1] - w[i - 2]) / (2.0 * h3);
    worst = std::max(worst, std::abs(w3 + w[i] * w2));
  }
  return worst;
}

}  // namespace bestnet
