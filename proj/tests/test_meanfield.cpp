#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "bestnet/io.hpp"
#include "bestnet/meanfield.hpp"
#include "bestnet/network.hpp"
#include "bestnet/simulator.hpp"

using namespace bestnet;

namespace {

// departure-rate factors straight from the series definition, summed far past
// the truncation point (descending so small terms accumulate first) with the
// telescoped remainder beyond y_big. Independent of the solver's closed form.
std::vector<double> u_brute(const std::vector<double>& alpha, int route_len) {
  const int k_max = static_cast<int>(alpha.size()) - 1;
  const int y_big = 100000;
  std::vector<double> s(y_big + 1);  // s[y] = sum_{m<=y} m*alpha_m
  for (int y = 0; y <= y_big; ++y) {
    double acc = 0.0;
    for (int m = 1; m <= std::min(y, k_max); ++m) acc += m * alpha[m];
    if (y <= k_max) {
      s[y] = acc;
    } else {
      s[y] = s[k_max];
      break;
    }
  }
  for (int y = k_max + 1; y <= y_big; ++y) s[y] = s[k_max];

  std::vector<double> u(k_max + 1, 0.0);
  const double s_pow_tail = std::pow(s[k_max], route_len - 1);
  for (int k = 1; k <= k_max; ++k) {
    double acc = s_pow_tail / (y_big + 1);  // sum_{y>y_big} 1/(y(y+1)) = 1/(y_big+1)
    for (int y = y_big; y >= k; --y)
      acc += std::pow(s[y], route_len - 1) / (static_cast<double>(y) * (y + 1));
    u[k] = k * acc;
  }
  return u;
}

std::vector<double> random_pmf(std::mt19937& g, int k_max) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> pmf(k_max + 1);
  double total = 0.0;
  for (double& p : pmf) total += (p = d(g));
  for (double& p : pmf) p /= total;
  return pmf;
}

double mean_of(const std::vector<double>& pmf) {
  double m = 0.0;
  for (size_t k = 0; k < pmf.size(); ++k) m += k * pmf[k];
  return m;
}

}  // namespace

TEST_CASE("departure factors for a point mass at one transfer") {
  // all links hold exactly one transfer: every crossed link serves at rate 1
  std::vector<double> alpha(8, 0.0);
  alpha[1] = 1.0;
  for (int L : {1, 2, 3, 5}) {
    const std::vector<double> u = compute_u(alpha, L);
    CHECK(u[0] == 0.0);
    for (size_t k = 1; k < u.size(); ++k)
      CHECK(u[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("departure factors with all links empty") {
  std::vector<double> alpha(5, 0.0);
  alpha[0] = 1.0;
  // no competing traffic anywhere: factors collapse to the L=1 value 1
  const std::vector<double> u1 = compute_u(alpha, 1);
  for (size_t k = 1; k < u1.size(); ++k) CHECK(u1[k] == doctest::Approx(1.0));
  // with L >= 2 the other links are empty and the product of their shares is 0
  const std::vector<double> u2 = compute_u(alpha, 2);
  for (size_t k = 1; k < u2.size(); ++k) CHECK(u2[k] == doctest::Approx(0.0));
}

TEST_CASE("departure factors match the brute-force series on random pmfs") {
  std::mt19937 g(99);
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    const int k_max = std::uniform_int_distribution<int>(1, 30)(g);
    const int L = std::uniform_int_distribution<int>(1, 3)(g);
    const std::vector<double> pmf = random_pmf(g, k_max);
    const std::vector<double> u = compute_u(pmf, L);
    const std::vector<double> brute = u_brute(pmf, L);
    REQUIRE(u.size() == brute.size());
    for (size_t k = 1; k < u.size(); ++k)
      worst = std::max(worst, std::abs(u[k] - brute[k]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("departure factors are nondecreasing and end at abar^(L-1)") {
  std::mt19937 g(7);
  for (int it = 0; it < 20; ++it) {
    const std::vector<double> pmf = random_pmf(g, 25);
    for (int L : {1, 2, 4}) {
      const std::vector<double> u = compute_u(pmf, L);
      for (size_t k = 2; k < u.size(); ++k) CHECK(u[k] >= u[k - 1] * (1.0 - 1e-13));
      CHECK(u.back() ==
            doctest::Approx(std::pow(mean_of(pmf), L - 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("compute_u validates its input") {
  CHECK_THROWS_AS(compute_u({0.5, 0.4}, 2), ValidationError);   // mass 0.9
  CHECK_THROWS_AS(compute_u({1.5, -0.5}, 2), ValidationError);  // negative
  CHECK_THROWS_AS(compute_u({}, 2), ValidationError);
  CHECK_THROWS_AS(compute_u({1.0}, 0), ValidationError);
}

TEST_CASE("single-link routes give the processor-sharing geometric law") {
  for (double rho : {0.3, 0.5, 0.8}) {
    MeanFieldProblem p;
    p.rho = rho;
    p.route_len = 1;
    const MeanFieldSolution sol = fixed_point_solve(p);
    double worst = 0.0, g = 1.0 - rho;
    for (size_t k = 0; k < sol.alpha.size(); ++k, g *= rho)
      worst = std::max(worst, std::abs(sol.alpha[k] - g));
    CHECK(worst < 1e-10);
    CHECK(sol.alpha_bar == doctest::Approx(rho / (1.0 - rho)).epsilon(1e-8));
    CHECK(mean_transfer_time(sol, rho) ==
          doctest::Approx(1.0 / (1.0 - rho)).epsilon(1e-8));
  }
}

TEST_CASE("solution invariants across loads and route lengths") {
  for (double rho : {0.5, 0.9}) {
    for (int L : {2, 5}) {
      MeanFieldProblem p;
      p.rho = rho;
      p.route_len = L;
      const MeanFieldSolution sol = fixed_point_solve(p);

      double mass = 0.0;
      for (double a : sol.alpha) {
        CHECK(a >= 0.0);
        mass += a;
      }
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(sol.alpha_bar == doctest::Approx(mean_of(sol.alpha)).epsilon(1e-9));
      CHECK(sol.residual <= p.tol);
      CHECK(sol.tail_mass < 1e-12);

      // factors nondecreasing, ending exactly at abar^(L-1)
      for (size_t k = 2; k < sol.u.size(); ++k)
        CHECK(sol.u[k] >= sol.u[k - 1] * (1.0 - 1e-13));
      CHECK(sol.u.back() ==
            doctest::Approx(std::pow(sol.alpha_bar, L - 1)).epsilon(1e-12));

      // alpha rises until the factors cross rho*abar^(L-1), then falls
      const size_t peak = std::max_element(sol.alpha.begin(), sol.alpha.end()) -
                          sol.alpha.begin();
      CHECK(static_cast<size_t>(peak_index(sol)) == peak);
      for (size_t k = 0; k + 1 < sol.alpha.size(); ++k) {
        if (k + 1 <= peak)
          CHECK(sol.alpha[k + 1] >= sol.alpha[k] * (1.0 - 1e-9));
        else
          CHECK(sol.alpha[k + 1] <= sol.alpha[k] * (1.0 + 1e-9));
      }

      // deep-tail decay approaches the geometric rate rho
      const size_t last = sol.alpha.size() - 1;
      if (sol.alpha[last - 1] > 1e-250) {
        const double ratio = sol.alpha[last] / sol.alpha[last - 1];
        CHECK(ratio == doctest::Approx(rho).epsilon(0.1));
      }
    }
  }
}

TEST_CASE("k0 marks the last index where the factors sit below the drive") {
  MeanFieldProblem p;
  p.rho = 0.9;
  p.route_len = 2;
  const MeanFieldSolution sol = fixed_point_solve(p);
  const double drive = p.rho * std::pow(sol.alpha_bar, p.route_len - 1);
  int expected = 0;
  for (size_t k = 1; k < sol.u.size(); ++k)
    if (sol.u[k] < drive) expected = static_cast<int>(k);
  CHECK(sol.k0 == expected);
  CHECK(sol.k0 > 0);  // heavy load pushes the mode well away from zero
  CHECK(peak_index(sol) >= sol.k0 - 1);
}

TEST_CASE("fixed point is reached from both initial guesses") {
  MeanFieldProblem p;
  p.rho = 0.9;
  p.route_len = 2;
  p.init = MeanFieldProblem::Init::Geometric;
  const MeanFieldSolution a = fixed_point_solve(p);
  p.init = MeanFieldProblem::Init::Uniform;
  const MeanFieldSolution b = fixed_point_solve(p);
  REQUIRE(a.alpha.size() == b.alpha.size());
  double worst = 0.0;
  for (size_t k = 0; k < a.alpha.size(); ++k)
    worst = std::max(worst, std::abs(a.alpha[k] - b.alpha[k]));
  CHECK(worst < 100 * p.tol);
  // the mean amplifies per-k differences by k ~ 1e3, so its agreement is
  // two orders looser than the pointwise one
  CHECK(a.alpha_bar == doctest::Approx(b.alpha_bar).epsilon(1e-7));
}

TEST_CASE("mean occupancy grows near-affinely in the log of the route length") {
  const double rho = 0.9;
  std::vector<double> xs, ys;
  for (int L : {1, 2, 4, 8}) {
    MeanFieldProblem p;
    p.rho = rho;
    p.route_len = L;
    xs.push_back(std::log(static_cast<double>(L)));
    ys.push_back(fixed_point_solve(p).alpha_bar);
  }
  for (size_t i = 1; i < ys.size(); ++i) CHECK(ys[i] > ys[i - 1]);

  const size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) mx += xs[i], my += ys[i];
  mx /= n, my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  CHECK(r2 > 0.9);
}

TEST_CASE("solver refuses loads at or past the stability boundary") {
  for (double rho : {1.0, 1.1, 0.0, -0.2}) {
    MeanFieldProblem p;
    p.rho = rho;
    p.route_len = 2;
    CHECK_THROWS_AS(fixed_point_solve(p), ValidationError);
  }
  MeanFieldProblem p;
  p.rho = 0.5;
  p.route_len = 0;
  CHECK_THROWS_AS(fixed_point_solve(p), ValidationError);
  p.route_len = 2;
  p.damping = 0.0;
  CHECK_THROWS_AS(fixed_point_solve(p), ValidationError);
}

TEST_CASE("mean transfer time needs a positive arrival intensity") {
  MeanFieldProblem p;
  p.rho = 0.5;
  p.route_len = 2;
  const MeanFieldSolution sol = fixed_point_solve(p);
  CHECK(mean_transfer_time(sol, 0.5) ==
        doctest::Approx(sol.alpha_bar / 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(mean_transfer_time(sol, 0.0), ValidationError);
}

TEST_CASE("asym solver with equal sides collapses to the symmetric fixed point") {
  AsymStarProblem ap;
  ap.rho_in = ap.rho_out = 0.8;
  ap.c_ratio = 1.0;
  const AsymStarSolution as = solve_asym_star(ap);

  // the two marginals see a fully symmetric problem
  REQUIRE(as.alpha_in.size() == as.alpha_out.size());
  for (size_t k = 0; k < as.alpha_in.size(); ++k)
    CHECK(as.alpha_in[k] == doctest::Approx(as.alpha_out[k]).epsilon(1e-12));

  MeanFieldProblem p;
  p.rho = 0.8;
  p.route_len = 2;
  const MeanFieldSolution sym = fixed_point_solve(p);
  double worst = 0.0;
  const size_t n = std::min(sym.alpha.size(), as.alpha_in.size());
  for (size_t k = 0; k < n; ++k)
    worst = std::max(worst, std::abs(sym.alpha[k] - as.alpha_in[k]));
  CHECK(worst < 1e-6);
  CHECK(as.abar_in == doctest::Approx(sym.alpha_bar).epsilon(1e-6));
}

TEST_CASE("asym solver tracks both loads, not just the inbound one") {
  AsymStarProblem lo, hi;
  lo.rho_in = hi.rho_in = 0.5;
  lo.c_ratio = hi.c_ratio = 1.0;
  lo.rho_out = 0.8;
  hi.rho_out = 0.9;
  const AsymStarSolution a = solve_asym_star(lo);
  const AsymStarSolution b = solve_asym_star(hi);

  // the out marginal must at least clear the processor-sharing mean for its
  // own load: the min coupling with the other side only ever slows service
  CHECK(a.abar_out > 0.8 / 0.2);
  CHECK(b.abar_out > 0.9 / 0.1);
  CHECK(b.abar_out > a.abar_out);

  // Little's law over the one shared document population fixes the ratio of
  // the side means; the fixed point has to reproduce it on its own
  CHECK(a.abar_in / a.abar_out == doctest::Approx(0.5 / 0.8).epsilon(1e-8));
  CHECK(b.abar_in / b.abar_out == doctest::Approx(0.5 / 0.9).epsilon(1e-8));
}

TEST_CASE("asym fixed point matches a simulated two-sided star") {
  // 16 inbound and 10 outbound unit links with aggregate rate 0.8 per
  // outbound link realize loads of exactly 0.5 in and 0.8 out
  const NetworkSpec net = gen_asym_star(16, 10, 1.0, 1.0, 0.8, 1.0);

  SimConfig config;
  config.seed = 3;
  config.policy = Policy::Min;
  config.warmup_time = 10'000;
  config.measure_time = 40'000;
  const SimStats stats = run(net, config);
  REQUIRE(!stats.truncated);

  AsymStarProblem ap;
  ap.rho_in = 0.5;
  ap.rho_out = 0.8;
  ap.c_ratio = 1.0;
  const AsymStarSolution as = solve_asym_star(ap);

  // the simulator pools every link into one histogram, so weight the two
  // marginals by link count before comparing
  std::vector<double> mix(as.alpha_in.size(), 0.0);
  for (size_t k = 0; k < mix.size(); ++k)
    mix[k] = (16.0 * as.alpha_in[k] + 10.0 * as.alpha_out[k]) / 26.0;
  const DistanceReport d =
      distribution_distance(stats.link_occupancy_dist, mix);
  CHECK(d.sup_cdf_distance < 0.05);  // finite-size gap at 26 links: 0.035
}

TEST_CASE("asym solver either converges cleanly or refuses loudly") {
  AsymStarProblem ap;
  ap.rho_in = 0.5;
  ap.rho_out = 0.9;
  ap.c_ratio = 10.0;
  try {
    const AsymStarSolution as = solve_asym_star(ap);
    double mass_in = 0.0, mass_out = 0.0;
    for (double a : as.alpha_in) mass_in += a;
    for (double a : as.alpha_out) mass_out += a;
    CHECK(mass_in == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mass_out == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(as.residual <= ap.tol);
    CHECK(as.tail_mass < 1e-12);
  } catch (const ConvergenceError& e) {
    CHECK(e.residual >= 0.0);  // refusal carries the measured defect
  }
  ap.rho_out = 1.05;  // outbound side supercritical
  CHECK_THROWS_AS(solve_asym_star(ap), ValidationError);
}
