#include "bestnet/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bestnet {

namespace {

void check_counts(const NetworkSpec& spec, const std::vector<int64_t>& counts) {
  if (counts.size() != spec.routes.size())
    throw ValidationError("counts size " + std::to_string(counts.size()) +
                          " does not match route count " +
                          std::to_string(spec.routes.size()));
  for (size_t r = 0; r < counts.size(); ++r)
    if (counts[r] < 0)
      throw ValidationError("route " + std::to_string(r) +
                            " has negative count");
}

void occupancy_into(const NetworkSpec& spec, const std::vector<int64_t>& counts,
                    std::vector<int64_t>& occ) {
  occ.assign(spec.links.size(), 0);
  for (size_t r = 0; r < spec.routes.size(); ++r) {
    if (counts[r] == 0) continue;
    for (int l : spec.routes[r].links) occ[l] += counts[r];
  }
}

}  // namespace

const char* to_string(Policy p) {
  return p == Policy::Min ? "min" : "maxmin";
}

std::vector<int64_t> link_occupancy(const NetworkSpec& spec,
                                    const RouteCounts& counts) {
  validate(spec);
  check_counts(spec, counts.counts);
  std::vector<int64_t> occ;
  occupancy_into(spec, counts.counts, occ);
  return occ;
}

void alloc_min_into(const NetworkSpec& spec, const std::vector<int64_t>& counts,
                    const std::vector<int64_t>& link_occ,
                    std::vector<double>& shares) {
  shares.assign(spec.routes.size(), 0.0);
  for (size_t r = 0; r < spec.routes.size(); ++r) {
    if (counts[r] == 0) continue;
    double share = std::numeric_limits<double>::infinity();
    for (int l : spec.routes[r].links)
      share = std::min(share, spec.links[l].capacity /
                                  static_cast<double>(link_occ[l]));
    shares[r] = share;
  }
}

void alloc_maxmin_into(const NetworkSpec& spec,
                       const std::vector<int64_t>& counts, AllocScratch& ws,
                       std::vector<double>& shares) {
  const size_t n_links = spec.links.size();
  const size_t n_routes = spec.routes.size();
  shares.assign(n_routes, 0.0);

  ws.residual.assign(n_links, 0.0);
  ws.unfrozen.assign(n_links, 0);
  ws.frozen.assign(n_routes, 0);
  for (size_t l = 0; l < n_links; ++l) ws.residual[l] = spec.links[l].capacity;
  int64_t remaining = 0;
  for (size_t r = 0; r < n_routes; ++r) {
    if (counts[r] == 0) {
      ws.frozen[r] = 1;  // nothing to allocate
      continue;
    }
    ++remaining;
    for (int l : spec.routes[r].links) ws.unfrozen[l] += counts[r];
  }

  // Progressive filling: all unfrozen flows rise together, so the next
  // bottleneck is the link minimizing residual capacity per unfrozen flow.
  while (remaining > 0) {
    int bottleneck = -1;
    double level = std::numeric_limits<double>::infinity();
    for (size_t l = 0; l < n_links; ++l) {
      if (ws.unfrozen[l] == 0) continue;
      const double cand =
          std::max(ws.residual[l], 0.0) / static_cast<double>(ws.unfrozen[l]);
      if (cand < level) {  // strict: ties keep the lowest link id
        level = cand;
        bottleneck = static_cast<int>(l);
      }
    }
    // every unfrozen route crosses a link with unfrozen flows (its own), so a
    // bottleneck always exists here
    for (size_t r = 0; r < n_routes; ++r) {
      if (ws.frozen[r]) continue;
      bool through = false;
      for (int l : spec.routes[r].links)
        if (l == bottleneck) {
          through = true;
          break;
        }
      if (!through) continue;
      shares[r] = level;
      ws.frozen[r] = 1;
      --remaining;
      const double consumed = level * static_cast<double>(counts[r]);
      for (int l : spec.routes[r].links) {
        ws.unfrozen[l] -= counts[r];
        ws.residual[l] -= consumed;
      }
    }
  }
}

Allocation alloc_min(const NetworkSpec& spec, const RouteCounts& counts) {
  validate(spec);
  check_counts(spec, counts.counts);
  Allocation alloc;
  alloc.policy = Policy::Min;
  std::vector<int64_t> occ;
  occupancy_into(spec, counts.counts, occ);
  alloc_min_into(spec, counts.counts, occ, alloc.shares);
  return alloc;
}

Allocation alloc_maxmin(const NetworkSpec& spec, const RouteCounts& counts) {
  validate(spec);
  check_counts(spec, counts.counts);
  Allocation alloc;
  alloc.policy = Policy::MaxMin;
  AllocScratch ws;
  alloc_maxmin_into(spec, counts.counts, ws, alloc.shares);
  return alloc;
}

bool verify_feasibility(const NetworkSpec& spec, const RouteCounts& counts,
                        const Allocation& alloc) {
  validate(spec);
  check_counts(spec, counts.counts);
  if (alloc.shares.size() != spec.routes.size()) return false;
  std::vector<double> used(spec.links.size(), 0.0);
  for (size_t r = 0; r < spec.routes.size(); ++r) {
    if (counts.counts[r] == 0) continue;
    if (!(alloc.shares[r] >= 0.0)) return false;
    const double flow = alloc.shares[r] * static_cast<double>(counts.counts[r]);
    for (int l : spec.routes[r].links) used[l] += flow;
  }
  for (size_t l = 0; l < spec.links.size(); ++l)
    if (used[l] > spec.links[l].capacity * (1.0 + 1e-9)) return false;
  return true;
}

bool verify_maxmin_conditions(const NetworkSpec& spec,
                              const RouteCounts& counts,
                              const Allocation& alloc) {
  validate(spec);
  check_counts(spec, counts.counts);
  if (alloc.shares.size() != spec.routes.size()) return false;

  std::vector<double> used(spec.links.size(), 0.0);
  std::vector<double> max_share(spec.links.size(), 0.0);
  for (size_t r = 0; r < spec.routes.size(); ++r) {
    if (counts.counts[r] == 0) continue;
    const double flow = alloc.shares[r] * static_cast<double>(counts.counts[r]);
    for (int l : spec.routes[r].links) {
      used[l] += flow;
      max_share[l] = std::max(max_share[l], alloc.shares[r]);
    }
  }
  // every occupied route needs a saturated link on which it is a maximal
  // shareholder
  for (size_t r = 0; r < spec.routes.size(); ++r) {
    if (counts.counts[r] == 0) continue;
    bool has_bottleneck = false;
    for (int l : spec.routes[r].links) {
      const double cap = spec.links[l].capacity;
      const bool saturated = std::abs(used[l] - cap) <= 1e-9 * std::max(1.0, cap);
      const bool maximal = alloc.shares[r] >= max_share[l] * (1.0 - 1e-9);
      if (saturated && maximal) {
        has_bottleneck = true;
        break;
      }
    }
    if (!has_bottleneck) return false;
  }
  return true;
}

}  // namespace bestnet
