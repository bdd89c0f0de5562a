#pragma once

#include <string>
#include <vector>

#include "bestnet/common.hpp"

namespace bestnet {

struct LinkSpec {
  int id = 0;
  double capacity = 1.0;
};

struct RouteSpec {
  int id = 0;
  std::vector<int> links;  // links crossed, no duplicates
  double arrival_rate = 0.0;
  double mean_size = 1.0;
};

struct NetworkSpec {
  std::vector<LinkSpec> links;
  std::vector<RouteSpec> routes;
  std::string label;
};

enum class Stability { Ergodic, Transient, Boundary };
const char* to_string(Stability s);

struct LoadReport {
  std::vector<double> per_link_load;  // rho_l = sum_{r through l} rate*size / capacity
  double max_load = 0.0;
  Stability classification = Stability::Ergodic;
};

// Structural checks: ids dense and equal to their index, capacities > 0,
// routes nonempty with valid distinct links, rates >= 0, sizes > 0, at least
// one route. Throws ValidationError.
void validate(const NetworkSpec& spec);

// Offered load per link. The network is ergodic iff max_load < 1 and
// transient if max_load > 1, independent of the sharing policy.
LoadReport compute_link_loads(const NetworkSpec& spec);

Stability classify_stability(double max_load, double tol = 1e-12);
Stability classify_stability(const LoadReport& report, double tol = 1e-12);

// One route crossing all n_links in a row plus one single-link route per
// link. mean_size sigma everywhere.
NetworkSpec gen_linear(int n_links, double capacity, double lambda_long,
                       double lambda_short, double sigma);

// Star with n_links/2 branches; branch b owns inbound link 2b and outbound
// link 2b+1, all unit capacity. One route per ordered pair of distinct
// branches (inbound of the source, outbound of the destination), each with
// arrival rate 2*lambda/n_links where lambda = rho/sigma. Every link carries
// n_links/2 - 1 routes, so the realized per-link load is rho*(1 - 2/n_links).
NetworkSpec gen_star(int n_links, double rho, double sigma);

// Two-sided star: n_in inbound links of capacity c_in, n_out outbound links
// of capacity c_out, one route per (inbound, outbound) pair at rate
// lambda/n_in. Outbound links then see aggregate rate lambda
// (load lambda*sigma/c_out); inbound links see lambda*n_out/n_in.
NetworkSpec gen_asym_star(int n_in, int n_out, double c_in, double c_out,
                          double lambda, double sigma);

// Directed d-cube: every edge contributes two unit-capacity directed links
// (d*2^d links total). Routes are all coordinate-ordered shortest paths
// between ordered vertex pairs at Hamming distance route_len; every link then
// carries exactly R = route_len*(d-1)!/(d-route_len)! routes, and per-route
// rates are set to rho/(sigma*R) so each link's load is rho.
NetworkSpec gen_hypercube(int d, int route_len, double rho = 0.9,
                          double sigma = 1.0);

}  // namespace bestnet
