#include "bestnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace bestnet {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Ergodic:
      return "Ergodic";
    case Stability::Transient:
      return "Transient";
    case Stability::Boundary:
      return "Boundary";
  }
  return "?";
}

void validate(const NetworkSpec& spec) {
  if (spec.links.empty()) throw ValidationError("network has no links");
  if (spec.routes.empty()) throw ValidationError("network has no routes");
  const int n = static_cast<int>(spec.links.size());
  for (int i = 0; i < n; ++i) {
    const LinkSpec& l = spec.links[i];
    if (l.id != i)
      throw ValidationError("link ids must be dense and in order: index " +
                            std::to_string(i) + " has id " +
                            std::to_string(l.id));
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity))
      throw ValidationError("link " + std::to_string(l.id) +
                            " has non-positive capacity");
  }
  const int m = static_cast<int>(spec.routes.size());
  for (int i = 0; i < m; ++i) {
    const RouteSpec& r = spec.routes[i];
    if (r.id != i)
      throw ValidationError("route ids must be dense and in order: index " +
                            std::to_string(i) + " has id " +
                            std::to_string(r.id));
    if (r.links.empty())
      throw ValidationError("route " + std::to_string(r.id) +
                            " crosses no links");
    std::set<int> seen;
    for (int l : r.links) {
      if (l < 0 || l >= n)
        throw ValidationError("route " + std::to_string(r.id) +
                              " references missing link " + std::to_string(l));
      if (!seen.insert(l).second)
        throw ValidationError("route " + std::to_string(r.id) +
                              " crosses link " + std::to_string(l) + " twice");
    }
    if (r.arrival_rate < 0.0 || !std::isfinite(r.arrival_rate))
      throw ValidationError("route " + std::to_string(r.id) +
                            " has negative arrival rate");
    if (!(r.mean_size > 0.0) || !std::isfinite(r.mean_size))
      throw ValidationError("route " + std::to_string(r.id) +
                            " has non-positive mean size");
  }
}

LoadReport compute_link_loads(const NetworkSpec& spec) {
  validate(spec);
  LoadReport report;
  report.per_link_load.assign(spec.links.size(), 0.0);
  for (const RouteSpec& r : spec.routes) {
    const double work = r.arrival_rate * r.mean_size;
    for (int l : r.links) report.per_link_load[l] += work;
  }
  for (size_t l = 0; l < spec.links.size(); ++l)
    report.per_link_load[l] /= spec.links[l].capacity;
  report.max_load =
      *std::max_element(report.per_link_load.begin(), report.per_link_load.end());
  report.classification = classify_stability(report.max_load);
  return report;
}

Stability classify_stability(double max_load, double tol) {
  if (max_load < 1.0 - tol) return Stability::Ergodic;
  if (max_load > 1.0 + tol) return Stability::Transient;
  return Stability::Boundary;
}

Stability classify_stability(const LoadReport& report, double tol) {
  return classify_stability(report.max_load, tol);
}

NetworkSpec gen_linear(int n_links, double capacity, double lambda_long,
                       double lambda_short, double sigma) {
  if (n_links < 1) throw ValidationError("gen_linear: n_links must be >= 1");
  if (!(capacity > 0.0)) throw ValidationError("gen_linear: capacity must be > 0");
  if (lambda_long < 0.0 || lambda_short < 0.0)
    throw ValidationError("gen_linear: arrival rates must be >= 0");
  if (!(sigma > 0.0)) throw ValidationError("gen_linear: sigma must be > 0");

  NetworkSpec spec;
  spec.label = "linear-" + std::to_string(n_links);
  spec.links.resize(n_links);
  for (int l = 0; l < n_links; ++l) spec.links[l] = {l, capacity};

  RouteSpec through;
  through.id = 0;
  through.links.resize(n_links);
  std::iota(through.links.begin(), through.links.end(), 0);
  through.arrival_rate = lambda_long;
  through.mean_size = sigma;
  spec.routes.push_back(std::move(through));
  for (int l = 0; l < n_links; ++l)
    spec.routes.push_back({l + 1, {l}, lambda_short, sigma});
  return spec;
}

NetworkSpec gen_star(int n_links, double rho, double sigma) {
  if (n_links < 4 || n_links % 2 != 0)
    throw ValidationError("gen_star: n_links must be even and >= 4");
  if (!(rho > 0.0)) throw ValidationError("gen_star: rho must be > 0");
  if (!(sigma > 0.0)) throw ValidationError("gen_star: sigma must be > 0");

  const int branches = n_links / 2;
  const double lambda = rho / sigma;
  const double route_rate = 2.0 * lambda / n_links;

  NetworkSpec spec;
  spec.label = "star-" + std::to_string(n_links);
  spec.links.resize(n_links);
  for (int l = 0; l < n_links; ++l) spec.links[l] = {l, 1.0};

  int id = 0;
  for (int a = 0; a < branches; ++a) {
    for (int b = 0; b < branches; ++b) {
      if (a == b) continue;
      // inbound link of the source branch, outbound link of the destination
      spec.routes.push_back({id++, {2 * a, 2 * b + 1}, route_rate, sigma});
    }
  }
  return spec;
}

NetworkSpec gen_asym_star(int n_in, int n_out, double c_in, double c_out,
                          double lambda, double sigma) {
  if (n_in < 1 || n_out < 1)
    throw ValidationError("gen_asym_star: link counts must be >= 1");
  if (!(c_in > 0.0) || !(c_out > 0.0))
    throw ValidationError("gen_asym_star: capacities must be > 0");
  if (lambda < 0.0) throw ValidationError("gen_asym_star: lambda must be >= 0");
  if (!(sigma > 0.0)) throw ValidationError("gen_asym_star: sigma must be > 0");

  NetworkSpec spec;
  spec.label = "asym-star-" + std::to_string(n_in) + "x" + std::to_string(n_out);
  for (int l = 0; l < n_in; ++l) spec.links.push_back({l, c_in});
  for (int l = 0; l < n_out; ++l) spec.links.push_back({n_in + l, c_out});

  const double route_rate = lambda / n_in;
  int id = 0;
  for (int i = 0; i < n_in; ++i)
    for (int o = 0; o < n_out; ++o)
      spec.routes.push_back({id++, {i, n_in + o}, route_rate, sigma});
  return spec;
}

NetworkSpec gen_hypercube(int d, int route_len, double rho, double sigma) {
  if (d < 1 || d > 16) throw ValidationError("gen_hypercube: d must be in [1,16]");
  if (route_len < 1 || route_len > d)
    throw ValidationError("gen_hypercube: route_len must be in [1,d]");
  if (!(rho > 0.0)) throw ValidationError("gen_hypercube: rho must be > 0");
  if (!(sigma > 0.0)) throw ValidationError("gen_hypercube: sigma must be > 0");

  const int vertices = 1 << d;
  NetworkSpec spec;
  spec.label = "hypercube-" + std::to_string(d) + "-L" + std::to_string(route_len);
  // link v*d + j points from vertex v along coordinate j
  spec.links.resize(static_cast<size_t>(vertices) * d);
  for (int v = 0; v < vertices; ++v)
    for (int j = 0; j < d; ++j) spec.links[v * d + j] = {v * d + j, 1.0};

  // Every link carries R = route_len * (d-1)!/(d-route_len)! of the
  // coordinate-ordered shortest paths; rate per route makes the load rho.
  double routes_per_link = route_len;
  for (int i = d - route_len + 1; i <= d - 1; ++i) routes_per_link *= i;
  const double route_rate = rho / (sigma * routes_per_link);

  int id = 0;
  std::vector<int> dims(route_len);
  for (int u = 0; u < vertices; ++u) {
    // choose the set of coordinates to flip via mask enumeration
    for (int mask = 1; mask < vertices; ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) != route_len) continue;
      dims.clear();
      for (int j = 0; j < d; ++j)
        if (mask & (1 << j)) dims.push_back(j);
      std::sort(dims.begin(), dims.end());
      do {
        RouteSpec r;
        r.id = id++;
        r.arrival_rate = route_rate;
        r.mean_size = sigma;
        int cur = u;
        for (int j : dims) {
          r.links.push_back(cur * d + j);
          cur ^= 1 << j;
        }
        spec.routes.push_back(std::move(r));
      } while (std::next_permutation(dims.begin(), dims.end()));
    }
  }
  return spec;
}

}  // namespace bestnet
