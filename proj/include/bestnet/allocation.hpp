#pragma once

#include <cstdint>
#include <vector>

#include "bestnet/network.hpp"

namespace bestnet {

enum class Policy { Min, MaxMin };
const char* to_string(Policy p);

// Number of transfers in progress per route.
struct RouteCounts {
  std::vector<int64_t> counts;
};

struct Allocation {
  std::vector<double> shares;  // per-flow rate zeta_r; 0 on empty routes
  Policy policy = Policy::Min;
};

// X_l = sum of counts over routes crossing l.
std::vector<int64_t> link_occupancy(const NetworkSpec& spec,
                                    const RouteCounts& counts);

// Min policy: every flow on route r gets min over crossed links of C_l/X_l.
// Ignores what other routes actually consume, so it can leave capacity idle;
// it never exceeds it.
Allocation alloc_min(const NetworkSpec& spec, const RouteCounts& counts);

// Max-min fairness by progressive water-filling: raise all unfrozen flows
// together; the link that saturates first (ties: lowest id) freezes every
// flow through it at its fair share, repeat on residual capacity.
Allocation alloc_maxmin(const NetworkSpec& spec, const RouteCounts& counts);

// Capacity check: sum_{r through l} x_r*zeta_r <= C_l * (1 + 1e-9) on every
// link.
bool verify_feasibility(const NetworkSpec& spec, const RouteCounts& counts,
                        const Allocation& alloc);

// Bottleneck characterization of max-min fairness: every occupied route has a
// saturated link (within 1e-9) on which its share is maximal among occupied
// routes crossing that link.
bool verify_maxmin_conditions(const NetworkSpec& spec,
                              const RouteCounts& counts,
                              const Allocation& alloc);

// Allocation-free cores for per-event use in the simulator: identical results
// to alloc_min/alloc_maxmin, but reuse caller-owned buffers.
struct AllocScratch {
  std::vector<double> residual;
  std::vector<int64_t> unfrozen;
  std::vector<char> frozen;
};

void alloc_min_into(const NetworkSpec& spec, const std::vector<int64_t>& counts,
                    const std::vector<int64_t>& link_occ,
                    std::vector<double>& shares);

void alloc_maxmin_into(const NetworkSpec& spec,
                       const std::vector<int64_t>& counts, AllocScratch& ws,
                       std::vector<double>& shares);

}  // namespace bestnet
