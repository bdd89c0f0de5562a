#pragma once

#include <vector>

#include "bestnet/common.hpp"

// Stationary occupancy distribution of a single link in a large symmetric
// network where every route crosses route_len independently-loaded links.
// alpha_k is the fraction of links holding k transfers; the distribution
// solves the balance recursion
//
//   alpha_{k+1} * u_{k+1} = rho * abar^(L-1) * alpha_k,      abar = sum k*alpha_k
//
// where u_k is the expected per-link departure-rate factor seen by a link
// with k transfers whose routes' other L-1 links are drawn iid from alpha:
//
//   u_k = k * sum_{y>=k} S_y^(L-1) / (y(y+1)),   S_y = sum_{m<=y} m*alpha_m.
//
// On a truncated support [0, k_max] the tail has S_y = S_{k_max}, so the
// series closes in exact form via sum_{y>=m} 1/(y(y+1)) = 1/m:
//
//   u_k = k * [ sum_{y=k}^{k_max-1} S_y^(L-1)/(y(y+1)) + S_{k_max}^(L-1)/max(k,k_max) ].
//
// In particular u_{k_max} = abar^(L-1) and u is nondecreasing.

namespace bestnet {

struct MeanFieldProblem {
  double rho = 0.9;     // per-link load, must be in (0,1)
  int route_len = 2;    // L, links crossed per route
  int k_max = 0;        // 0: auto, max(50, 10/(1-rho)^2), grown until the
                        // tail mass estimate drops below 1e-12
  double damping = 0.5; // update weight on the rebuilt iterate
  double tol = 1e-10;   // sup-norm change and normalized residual target
  int max_iters = 10000;
  enum class Init { Geometric, Uniform } init = Init::Geometric;
};

struct MeanFieldSolution {
  std::vector<double> alpha;  // k = 0..k_max, sums to 1
  std::vector<double> u;      // u[k] for k >= 1; u[0] unused (0)
  double alpha_bar = 0.0;     // mean occupancy
  int k0 = 0;                 // last k with u_k < rho*abar^(L-1); 0 if none
  int iterations = 0;
  double residual = 0.0;      // max_k |alpha_{k+1}*u_{k+1} - rho*abar^(L-1)*alpha_k|
                              // measured on the abar^(L-1)-normalized recursion
  double tail_mass = 0.0;     // geometric estimate of truncated mass
  double rho = 0.0;           // problem echo
  int route_len = 0;
};

// Departure-rate factors for a given occupancy distribution (must sum to 1
// within 1e-9). Returned vector has u[0] = 0 and u[k] for k = 1..k_max.
std::vector<double> compute_u(const std::vector<double>& alpha, int route_len);

// Damped fixed-point iteration on the balance recursion. Throws
// ValidationError for rho outside (0,1) (no stationary distribution exists at
// or above critical load) and ConvergenceError when max_iters or the
// truncation growth cap is exhausted.
MeanFieldSolution fixed_point_solve(const MeanFieldProblem& problem);

// Mode of the distribution from the recursion: alpha increases exactly while
// u_k < rho*abar^(L-1). Returns 0 for a distribution peaked at 0.
int peak_index(const MeanFieldSolution& solution);

// Little's law per link: with per-link transfer arrival intensity
// lambda_link, mean transfer time is abar / lambda_link.
double mean_transfer_time(const MeanFieldSolution& solution,
                          double lambda_link);

// Two-sided star with asymmetric capacities: routes cross one inbound and one
// outbound link, C-ratio c = C_out/C_in. Marginal distributions alpha_in (on
// inbound links) and alpha_out solve the coupled recursions
//
//   alpha_in_{k+1}  * u_out_{k+1} = rho_in * abar_out * alpha_in_k
//   alpha_out_{k+1} * u_in_{k+1}  = rho_in * abar_out * alpha_out_k
//   u_in_k  = sum_y alpha_in_y  * min(k, c*y)
//   u_out_k = sum_y alpha_out_y * min(c*k, y)
//
// For c = 1 and rho_in = rho_out both marginals collapse to the symmetric
// route_len = 2 solution.
struct AsymStarProblem {
  double rho_in = 0.9;
  double rho_out = 0.9;
  double c_ratio = 1.0;  // C_out / C_in
  int k_max = 0;         // 0: auto
  double damping = 0.5;
  double tol = 1e-10;
  int max_iters = 10000;
};

struct AsymStarSolution {
  std::vector<double> alpha_in, alpha_out;
  std::vector<double> u_in, u_out;  // index 0 unused
  double abar_in = 0.0, abar_out = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double tail_mass = 0.0;
};

AsymStarSolution solve_asym_star(const AsymStarProblem& problem);

}  // namespace bestnet
