#include "bestnet/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace bestnet {

namespace {

constexpr double kTailTarget = 1e-12;
constexpr int kMaxSupport = 1 << 21;  // truncation growth cap

double pow_int(double x, int n) {
  double acc = 1.0;
  while (n > 0) {
    if (n & 1) acc *= x;
    x *= x;
    n >>= 1;
  }
  return acc;
}

// S[y] = sum_{m<=y} m*alpha_m; returns abar = S[k_max].
double prefix_first_moment(const std::vector<double>& alpha,
                           std::vector<double>& S) {
  const size_t n = alpha.size();
  S.resize(n);
  double acc = 0.0;
  for (size_t y = 0; y < n; ++y) {
    acc += static_cast<double>(y) * alpha[y];
    S[y] = acc;
  }
  return acc;
}

// Normalized departure factors w_k = u_k / abar^(L-1) in (0, 1]:
//   w_k = k * [ sum_{y=k}^{K-1} (S_y/abar)^(L-1) / (y(y+1)) + 1/max(k,K) ]
// computed by one suffix sweep. Exact for distributions truncated at K.
void compute_w(const std::vector<double>& alpha, int route_len,
               std::vector<double>& w) {
  const int K = static_cast<int>(alpha.size()) - 1;
  w.assign(alpha.size(), 0.0);
  if (K < 1) return;
  if (route_len == 1) {
    std::fill(w.begin() + 1, w.end(), 1.0);
    return;
  }
  std::vector<double> S;
  const double abar = prefix_first_moment(alpha, S);
  if (!(abar > 0.0)) return;  // point mass at zero: factors vanish
  double suffix = 0.0;  // sum_{y=k}^{K-1} (S_y/abar)^(L-1)/(y(y+1))
  w[K] = 1.0;
  for (int k = K - 1; k >= 1; --k) {
    const double ratio = S[k] / abar;
    suffix += pow_int(ratio, route_len - 1) /
              (static_cast<double>(k) * (static_cast<double>(k) + 1.0));
    w[k] = static_cast<double>(k) * (suffix + 1.0 / static_cast<double>(K));
  }
}

double normalized_residual(const std::vector<double>& alpha,
                           const std::vector<double>& w, double rho) {
  double res = 0.0;
  for (size_t k = 0; k + 1 < alpha.size(); ++k)
    res = std::max(res, std::abs(alpha[k + 1] * w[k + 1] - rho * alpha[k]));
  return res;
}

// alpha_{k+1} = rho * alpha_k / w_{k+1}, built in log space (the raw product
// can overflow long before normalization near critical load), then rescaled
// to sum 1.
void rebuild(const std::vector<double>& w, double rho,
             std::vector<double>& out) {
  const size_t n = w.size();
  std::vector<double> lg(n);
  lg[0] = 0.0;
  const double log_rho = std::log(rho);
  double top = 0.0;
  for (size_t k = 0; k + 1 < n; ++k) {
    lg[k + 1] = lg[k] + log_rho - std::log(w[k + 1]);
    top = std::max(top, lg[k + 1]);
  }
  out.resize(n);
  double sum = 0.0;
  for (size_t k = 0; k < n; ++k) {
    out[k] = std::exp(lg[k] - top);
    sum += out[k];
  }
  for (double& a : out) a /= sum;
}

void normalize(std::vector<double>& v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;
}

std::vector<double> initial_alpha(const MeanFieldProblem& p, int k_max) {
  std::vector<double> alpha(k_max + 1);
  if (p.init == MeanFieldProblem::Init::Uniform) {
    std::fill(alpha.begin(), alpha.end(), 1.0);
  } else {
    double g = 1.0;
    for (int k = 0; k <= k_max; ++k, g *= p.rho) alpha[k] = g;
  }
  normalize(alpha);
  return alpha;
}

int auto_k_max(double rho) {
  const double gap = 1.0 - rho;
  return std::max(50, static_cast<int>(std::ceil(10.0 / (gap * gap))));
}

}  // namespace

std::vector<double> compute_u(const std::vector<double>& alpha, int route_len) {
  if (route_len < 1) throw ValidationError("compute_u: route_len must be >= 1");
  if (alpha.empty()) throw ValidationError("compute_u: empty distribution");
  double sum = 0.0;
  for (double a : alpha) {
    if (a < 0.0 || !std::isfinite(a))
      throw ValidationError("compute_u: distribution entries must be >= 0");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("compute_u: distribution must sum to 1");

  std::vector<double> S;
  const double abar = prefix_first_moment(alpha, S);
  std::vector<double> w;
  compute_w(alpha, route_len, w);
  const double scale = pow_int(abar, route_len - 1);
  std::vector<double> u(alpha.size(), 0.0);
  for (size_t k = 1; k < alpha.size(); ++k) u[k] = w[k] * scale;
  return u;
}

MeanFieldSolution fixed_point_solve(const MeanFieldProblem& problem) {
  if (!(problem.rho > 0.0))
    throw ValidationError("fixed_point_solve: rho must be > 0");
  if (problem.rho >= 1.0)
    throw ValidationError(
        "fixed_point_solve: rho = " + std::to_string(problem.rho) +
        " is at or above critical load; the network is not ergodic and no "
        "stationary distribution exists");
  if (problem.route_len < 1)
    throw ValidationError("fixed_point_solve: route_len must be >= 1");
  if (!(problem.damping > 0.0) || problem.damping > 1.0)
    throw ValidationError("fixed_point_solve: damping must be in (0,1]");
  if (!(problem.tol > 0.0))
    throw ValidationError("fixed_point_solve: tol must be > 0");

  const double rho = problem.rho;
  const int L = problem.route_len;
  int k_max = problem.k_max > 0 ? std::max(problem.k_max, 10) : auto_k_max(rho);

  std::vector<double> alpha = initial_alpha(problem, k_max);
  std::vector<double> w, rebuilt, next;
  double omega = problem.damping;
  double prev_res = std::numeric_limits<double>::infinity();
  double change = std::numeric_limits<double>::infinity();
  double res = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;

  while (true) {
    converged = false;
    while (iters < problem.max_iters) {
      compute_w(alpha, L, w);
      res = normalized_residual(alpha, w, rho);
      if (res <= problem.tol && change <= problem.tol) {
        converged = true;
        break;
      }
      // residual oscillation means the undamped map overshoots: damp harder
      if (res > prev_res * (1.0 + 1e-12)) omega = std::max(omega * 0.5, 1.0 / 64.0);
      prev_res = res;

      rebuild(w, rho, rebuilt);
      next.resize(alpha.size());
      change = 0.0;
      for (size_t k = 0; k < alpha.size(); ++k) {
        next[k] = (1.0 - omega) * alpha[k] + omega * rebuilt[k];
        change = std::max(change, std::abs(next[k] - alpha[k]));
      }
      normalize(next);
      alpha.swap(next);
      ++iters;
    }
    if (!converged)
      throw ConvergenceError(
          "fixed_point_solve: no convergence after " +
              std::to_string(iters) + " iterations (residual " +
              std::to_string(res) + ")",
          res);

    const double tail = alpha[k_max] * rho / (1.0 - rho);
    if (tail < kTailTarget) break;
    if (2 * k_max > kMaxSupport)
      throw ConvergenceError(
          "fixed_point_solve: truncation " + std::to_string(k_max) +
              " still leaks tail mass " + std::to_string(tail),
          tail);
    // grow support, continue from the current iterate padded geometrically
    const int old = k_max;
    k_max *= 2;
    alpha.resize(k_max + 1);
    double g = alpha[old];
    for (int k = old + 1; k <= k_max; ++k) alpha[k] = (g *= rho);
    normalize(alpha);
    change = std::numeric_limits<double>::infinity();
    prev_res = std::numeric_limits<double>::infinity();
  }

  MeanFieldSolution sol;
  sol.alpha = std::move(alpha);
  compute_w(sol.alpha, L, w);
  std::vector<double> S;
  sol.alpha_bar = prefix_first_moment(sol.alpha, S);
  const double scale = pow_int(sol.alpha_bar, L - 1);
  sol.u.assign(sol.alpha.size(), 0.0);
  for (size_t k = 1; k < sol.u.size(); ++k) sol.u[k] = w[k] * scale;
  sol.residual = normalized_residual(sol.alpha, w, rho);
  sol.iterations = iters;
  sol.tail_mass = sol.alpha.back() * rho / (1.0 - rho);
  sol.rho = rho;
  sol.route_len = L;
  // w is nondecreasing, so the ks with w_k < rho form a prefix
  sol.k0 = 0;
  for (size_t k = 1; k < w.size(); ++k)
    if (w[k] < rho) sol.k0 = static_cast<int>(k);
  return sol;
}

int peak_index(const MeanFieldSolution& solution) {
  if (solution.alpha.empty() || solution.u.empty())
    throw ValidationError("peak_index: empty solution");
  const double scale = pow_int(solution.alpha_bar, solution.route_len - 1);
  const double threshold = solution.rho * scale;
  int k0 = 0;
  for (size_t k = 1; k < solution.u.size(); ++k)
    if (solution.u[k] < threshold) k0 = static_cast<int>(k);
  return k0;
}

double mean_transfer_time(const MeanFieldSolution& solution,
                          double lambda_link) {
  if (!(lambda_link > 0.0))
    throw ValidationError("mean_transfer_time: lambda_link must be > 0");
  return solution.alpha_bar / lambda_link;
}

namespace {

// u_in_k  = c*sum_{y<k/c} y*a_y + k*sum_{y>=k/c} a_y   (threshold y: c*y vs k)
// u_out_k =   sum_{y<c*k} y*a_y + c*k*sum_{y>=c*k} a_y
// via prefix sums of a and y*a; both are finite sums on truncated support.
struct PrefixPair {
  std::vector<double> mass;    // sum_{y<=m} a_y
  std::vector<double> moment;  // sum_{y<=m} y*a_y
};

void build_prefix(const std::vector<double>& a, PrefixPair& p) {
  p.mass.resize(a.size());
  p.moment.resize(a.size());
  double m0 = 0.0, m1 = 0.0;
  for (size_t y = 0; y < a.size(); ++y) {
    m0 += a[y];
    m1 += static_cast<double>(y) * a[y];
    p.mass[y] = m0;
    p.moment[y] = m1;
  }
}

// largest integer y with y < x (clamped to [0, K]); boundary y = x is
// indifferent since both min() branches agree there
int below(double x, int K) {
  int m = static_cast<int>(std::ceil(x - 1e-12)) - 1;
  return std::clamp(m, 0, K);
}

void asym_factors(const std::vector<double>& a_in,
                  const std::vector<double>& a_out, double c,
                  std::vector<double>& u_in, std::vector<double>& u_out) {
  const int K = static_cast<int>(a_in.size()) - 1;
  PrefixPair pin, pout;
  build_prefix(a_in, pin);
  build_prefix(a_out, pout);
  u_in.assign(K + 1, 0.0);
  u_out.assign(K + 1, 0.0);
  for (int k = 1; k <= K; ++k) {
    const int m_in = below(static_cast<double>(k) / c, K);
    u_in[k] = c * pin.moment[m_in] +
              static_cast<double>(k) * (pin.mass[K] - pin.mass[m_in]);
    const int m_out = below(c * static_cast<double>(k), K);
    u_out[k] = pout.moment[m_out] +
               c * static_cast<double>(k) * (pout.mass[K] - pout.mass[m_out]);
  }
}

// log-space rebuild of alpha_{k+1} = coeff * alpha_k / u_{k+1}
void rebuild_asym(const std::vector<double>& u, double coeff,
                  std::vector<double>& out) {
  const size_t n = u.size();
  std::vector<double> lg(n, -std::numeric_limits<double>::infinity());
  lg[0] = 0.0;
  const double log_coeff = std::log(coeff);
  double top = 0.0;
  for (size_t k = 0; k + 1 < n; ++k) {
    if (!(u[k + 1] > 0.0)) break;  // no departures possible: chain ends
    lg[k + 1] = lg[k] + log_coeff - std::log(u[k + 1]);
    top = std::max(top, lg[k + 1]);
  }
  out.resize(n);
  double sum = 0.0;
  for (size_t k = 0; k < n; ++k) {
    out[k] = std::isfinite(lg[k]) ? std::exp(lg[k] - top) : 0.0;
    sum += out[k];
  }
  for (double& a : out) a /= sum;
}

}  // namespace

AsymStarSolution solve_asym_star(const AsymStarProblem& problem) {
  if (!(problem.rho_in > 0.0) || problem.rho_in >= 1.0)
    throw ValidationError("solve_asym_star: rho_in must be in (0,1)");
  if (!(problem.rho_out > 0.0) || problem.rho_out >= 1.0)
    throw ValidationError("solve_asym_star: rho_out must be in (0,1)");
  if (!(problem.c_ratio > 0.0))
    throw ValidationError("solve_asym_star: c_ratio must be > 0");
  if (!(problem.damping > 0.0) || problem.damping > 1.0)
    throw ValidationError("solve_asym_star: damping must be in (0,1]");

  const double c = problem.c_ratio;
  const double rho_in = problem.rho_in;
  int k_max = problem.k_max > 0
                  ? std::max(problem.k_max, 10)
                  : std::max(auto_k_max(problem.rho_in),
                             auto_k_max(problem.rho_out));

  auto geo = [&](double ratio) {
    std::vector<double> a(k_max + 1);
    double g = 1.0;
    for (int k = 0; k <= k_max; ++k, g *= ratio) a[k] = g;
    normalize(a);
    return a;
  };
  std::vector<double> a_in = geo(rho_in), a_out = geo(problem.rho_out);
  std::vector<double> u_in, u_out, nb_in, nb_out;

  double omega = problem.damping;
  double prev_res = std::numeric_limits<double>::infinity();
  double change = std::numeric_limits<double>::infinity();
  double res = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;

  while (true) {
    converged = false;
    while (iters < problem.max_iters) {
      asym_factors(a_in, a_out, c, u_in, u_out);
      double abar_in = 0.0, abar_out = 0.0;
      for (size_t y = 1; y < a_out.size(); ++y) {
        abar_in += static_cast<double>(y) * a_in[y];
        abar_out += static_cast<double>(y) * a_out[y];
      }
      if (!(abar_in > 0.0) || !(abar_out > 0.0))
        throw ConvergenceError("solve_asym_star: a side's mean collapsed", 0.0);

      // each side carries its own birth coefficient; the death factor comes
      // from the partner side, normalized by the partner mean because a
      // document samples its partner link size-biased by occupancy. at the
      // fixed point rho_in * abar_out == rho_out * c * abar_in: Little's law
      // per side over the one shared population of documents.
      const double coeff_in = rho_in * abar_out;
      const double coeff_out = problem.rho_out * c * abar_in;
      res = 0.0;
      for (size_t k = 0; k + 1 < a_in.size(); ++k) {
        res = std::max(res, std::abs(a_in[k + 1] * u_out[k + 1] -
                                     coeff_in * a_in[k]) /
                                abar_out);
        res = std::max(res, std::abs(a_out[k + 1] * u_in[k + 1] -
                                     coeff_out * a_out[k]) /
                                abar_in);
      }
      if (res <= problem.tol && change <= problem.tol) {
        converged = true;
        break;
      }
      if (res > prev_res * (1.0 + 1e-12)) omega = std::max(omega * 0.5, 1.0 / 64.0);
      prev_res = res;

      rebuild_asym(u_out, coeff_in, nb_in);
      rebuild_asym(u_in, coeff_out, nb_out);
      change = 0.0;
      for (size_t k = 0; k < a_in.size(); ++k) {
        const double ni = (1.0 - omega) * a_in[k] + omega * nb_in[k];
        const double no = (1.0 - omega) * a_out[k] + omega * nb_out[k];
        change = std::max(change, std::abs(ni - a_in[k]));
        change = std::max(change, std::abs(no - a_out[k]));
        a_in[k] = ni;
        a_out[k] = no;
      }
      normalize(a_in);
      normalize(a_out);
      ++iters;
    }
    if (!converged)
      throw ConvergenceError(
          "solve_asym_star: no convergence after " + std::to_string(iters) +
              " iterations (residual " + std::to_string(res) + ")",
          res);

    // geometric tail estimates from the last local ratio; a ratio >= 1 means
    // the marginal is not normalizable at this truncation (or at all)
    auto tail_of = [&](const std::vector<double>& a) {
      const double hi = a[k_max], lo = a[k_max - 1];
      if (!(hi > 0.0)) return 0.0;
      const double q = hi / lo;
      if (q >= 1.0) return std::numeric_limits<double>::infinity();
      return hi * q / (1.0 - q);
    };
    const double tail = std::max(tail_of(a_in), tail_of(a_out));
    if (tail < kTailTarget) break;
    if (2 * k_max > kMaxSupport)
      throw ConvergenceError(
          "solve_asym_star: truncation " + std::to_string(k_max) +
              " still leaks tail mass " + std::to_string(tail),
          std::isfinite(tail) ? tail : 1.0);
    const int old = k_max;
    k_max *= 2;
    auto grow = [&](std::vector<double>& a, double ratio) {
      a.resize(k_max + 1);
      double g = a[old];
      for (int k = old + 1; k <= k_max; ++k) a[k] = (g *= ratio);
      normalize(a);
    };
    grow(a_in, rho_in);
    grow(a_out, problem.rho_out);
    change = std::numeric_limits<double>::infinity();
    prev_res = std::numeric_limits<double>::infinity();
  }

  AsymStarSolution sol;
  asym_factors(a_in, a_out, c, u_in, u_out);
  sol.alpha_in = std::move(a_in);
  sol.alpha_out = std::move(a_out);
  sol.u_in = std::move(u_in);
  sol.u_out = std::move(u_out);
  sol.abar_in = 0.0;
  sol.abar_out = 0.0;
  for (size_t y = 1; y < sol.alpha_in.size(); ++y) {
    sol.abar_in += static_cast<double>(y) * sol.alpha_in[y];
    sol.abar_out += static_cast<double>(y) * sol.alpha_out[y];
  }
  sol.iterations = iters;
  sol.residual = res;
  auto tail_of = [&](const std::vector<double>& a) {
    const double hi = a.back(), lo = a[a.size() - 2];
    if (!(hi > 0.0) || !(hi < lo)) return 0.0;
    const double q = hi / lo;
    return hi * q / (1.0 - q);
  };
  sol.tail_mass = std::max(tail_of(sol.alpha_in), tail_of(sol.alpha_out));
  return sol;
}

}  // namespace bestnet
