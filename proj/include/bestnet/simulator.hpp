#pragma once

#include <cstdint>
#include <vector>

#include "bestnet/allocation.hpp"
#include "bestnet/network.hpp"

// Event-driven fluid simulation at the transfer level: Poisson arrivals per
// route, exponentially distributed document sizes, every in-progress transfer
// on route r served at the policy's per-flow rate zeta_r. Rates are
// recomputed after every arrival and departure; between events each transfer
// drains linearly, so the next departure is found exactly rather than by time
// stepping.

namespace bestnet {

struct SimConfig {
  uint64_t seed = 1;
  double warmup_time = 0.0;   // statistics discarded before this
  double measure_time = 0.0;  // statistics window after warmup
  Policy policy = Policy::Min;
  int64_t max_events = 50'000'000;  // safety cap; sets SimStats::truncated
  double trace_sample_dt = 0.0;     // >0: sample total transfer count
  bool check_invariants = false;    // per-event accounting checks (tests)
};

struct SimStats {
  // Time-average fraction of links with occupancy k, over the measure window.
  std::vector<double> link_occupancy_dist;
  std::vector<double> mean_per_route_count;  // time-average x_r
  std::vector<double> mean_transfer_time;    // mean sojourn of completed docs
  std::vector<int64_t> completions;          // completed docs per route
  int64_t events_processed = 0;              // arrivals + departures total
  int64_t events_measured = 0;               // events at t >= warmup
  double end_time = 0.0;
  double measured_time = 0.0;  // actual statistics window covered
  bool truncated = false;      // hit max_events before warmup+measure
  // Populated when trace_sample_dt > 0: total transfers at t = 0, dt, 2dt...
  double trace_dt = 0.0;
  std::vector<double> total_count_trace;
};

SimStats run(const NetworkSpec& spec, const SimConfig& config);

// Both policies driven by one shared sequence of arrival epochs and document
// sizes. After every event the per-link occupancy of the max-min system must
// not exceed the min system's; violations are counted, not thrown.
struct CoupledStats {
  SimStats maxmin;
  SimStats min;
  int64_t dominance_violations = 0;
};

CoupledStats run_coupled(const NetworkSpec& spec, const SimConfig& config);

// Cumulative distribution of link_occupancy_dist. Throws ValidationError on
// an empty measurement window.
std::vector<double> occupancy_cdf(const SimStats& stats);

}  // namespace bestnet
