#include "bestnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "bestnet/rng.hpp"

// Two engines share this file. Coupled runs and max-min runs use ExactSystem,
// which tracks every transfer's remaining work directly: subtracting the same
// share*dt from both systems' copy of a document can never reorder them in
// floating point (rounding is monotone), so the coupled dominance counter
// reflects real policy behavior instead of accumulated rounding noise. Plain
// min-policy runs use FastMinEngine, which does O(affected routes) work per
// event instead of O(all routes) and exists so large-network runs fit the
// time budget of a single core.

namespace bestnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr uint64_t kArrivalTag = 0xA1;
constexpr uint64_t kSizeTag = 0x51;

struct Arrival {
  double time;
  int route;
};

struct ArrivalLater {
  bool operator()(const Arrival& a, const Arrival& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.route > b.route;
  }
};

// Poisson arrival epochs and exponential document sizes, one independent
// stream pair per route, so a route's draws do not depend on how events
// interleave elsewhere in the network.
struct ArrivalStream {
  std::priority_queue<Arrival, std::vector<Arrival>, ArrivalLater> queue;
  std::vector<std::mt19937_64> arrival_rng;
  std::vector<std::mt19937_64> size_rng;
  const NetworkSpec& spec;

  ArrivalStream(const NetworkSpec& s, uint64_t seed) : spec(s) {
    const size_t R = spec.routes.size();
    arrival_rng.reserve(R);
    size_rng.reserve(R);
    for (size_t r = 0; r < R; ++r) {
      arrival_rng.push_back(make_stream(seed, r, kArrivalTag));
      size_rng.push_back(make_stream(seed, r, kSizeTag));
      if (spec.routes[r].arrival_rate > 0.0)
        queue.push({exp_draw(arrival_rng.back(),
                             1.0 / spec.routes[r].arrival_rate),
                    static_cast<int>(r)});
    }
  }

  double draw_size(int route) {
    return exp_draw(size_rng[route], spec.routes[route].mean_size);
  }

  void schedule_next(int route, double now) {
    queue.push({now + exp_draw(arrival_rng[route],
                               1.0 / spec.routes[route].arrival_rate),
                route});
  }
};

void validate_run_inputs(const NetworkSpec& spec, const SimConfig& config) {
  validate(spec);
  if (config.warmup_time < 0.0)
    throw ValidationError("simulate: warmup_time must be >= 0");
  if (!(config.measure_time > 0.0))
    throw ValidationError("simulate: measure_time must be > 0");
  if (config.max_events < 1)
    throw ValidationError("simulate: max_events must be >= 1");

  const LoadReport report = compute_link_loads(spec);
  if (report.classification == Stability::Transient)
    std::fprintf(stderr,
                 "warning: '%s' has max link load %.6g >= 1; transfer "
                 "counts will grow without bound\n",
                 spec.label.c_str(), report.max_load);
}

// overlap of [a, b] with the statistics window [lo, hi]
double window_overlap(double a, double b, double lo, double hi) {
  const double from = std::max(a, lo);
  const double to = std::min(b, hi);
  return std::max(to - from, 0.0);
}

SimStats make_stats(const NetworkSpec& spec, const SimConfig& config,
                    const std::vector<double>& occ_hist,
                    const std::vector<double>& count_integral,
                    const std::vector<double>& sojourn_sum,
                    const std::vector<int64_t>& completions,
                    std::vector<double> trace, int64_t events,
                    int64_t events_measured, double end_time, double measured,
                    bool truncated) {
  const size_t R = spec.routes.size();
  SimStats stats;
  stats.events_processed = events;
  stats.events_measured = events_measured;
  stats.end_time = end_time;
  stats.measured_time = measured;
  stats.truncated = truncated;
  stats.mean_per_route_count.assign(R, 0.0);
  stats.mean_transfer_time.assign(R, 0.0);
  stats.completions = completions;
  if (measured > 0.0) {
    const double norm = measured * static_cast<double>(spec.links.size());
    stats.link_occupancy_dist.resize(occ_hist.size());
    for (size_t k = 0; k < occ_hist.size(); ++k)
      stats.link_occupancy_dist[k] = occ_hist[k] / norm;
    for (size_t r = 0; r < R; ++r)
      stats.mean_per_route_count[r] = count_integral[r] / measured;
  }
  for (size_t r = 0; r < R; ++r)
    if (completions[r] > 0)
      stats.mean_transfer_time[r] =
          sojourn_sum[r] / static_cast<double>(completions[r]);
  if (config.trace_sample_dt > 0.0) {
    stats.trace_dt = config.trace_sample_dt;
    stats.total_count_trace = std::move(trace);
  }
  return stats;
}

void check_work_conservation(const std::vector<int64_t>& counts,
                             const std::vector<double>& shares, double dt,
                             double capacity_sum) {
  if (dt <= 0.0) return;
  double served_work = 0.0;
  for (size_t r = 0; r < counts.size(); ++r)
    if (counts[r] != 0)
      served_work += static_cast<double>(counts[r]) * shares[r] * dt;
  if (served_work > capacity_sum * dt * (1.0 + 1e-9))
    throw std::logic_error("work conservation violated: served " +
                           std::to_string(served_work) + " > capacity " +
                           std::to_string(capacity_sum * dt));
}

void check_occupancy_sync(const NetworkSpec& spec,
                          const std::vector<int64_t>& counts,
                          const std::vector<int64_t>& link_occ) {
  std::vector<int64_t> occ(spec.links.size(), 0);
  for (size_t r = 0; r < counts.size(); ++r)
    for (int l : spec.routes[r].links) occ[l] += counts[r];
  if (occ != link_occ)
    throw std::logic_error("incremental link occupancy out of sync");
}

// ---------------------------------------------------------------------------
// Exact engine: per-document remaining work.

// A transfer in progress. Entries live in a binary min-heap per route; all
// transfers on a route drain at one common rate, so advancing time subtracts
// the same amount from every entry and the heap order survives untouched.
struct RemDoc {
  double rem;
  double arrival_time;
};

struct RemLater {
  bool operator()(const RemDoc& a, const RemDoc& b) const {
    if (a.rem != b.rem) return a.rem > b.rem;
    return a.arrival_time > b.arrival_time;
  }
};

// One policy's network state plus its statistics accumulators.
struct ExactSystem {
  Policy policy = Policy::Min;
  std::vector<std::vector<RemDoc>> docs;  // min-heaps keyed by rem
  std::vector<int64_t> counts;
  std::vector<int64_t> link_occ;
  std::vector<double> shares;
  AllocScratch scratch;

  std::vector<double> occ_hist;  // time-weighted histogram over links
  std::vector<double> count_integral;
  std::vector<double> sojourn_sum;
  std::vector<int64_t> completions;
  std::vector<double> trace;

  void init(const NetworkSpec& spec, Policy p) {
    policy = p;
    const size_t R = spec.routes.size();
    docs.assign(R, {});
    counts.assign(R, 0);
    link_occ.assign(spec.links.size(), 0);
    shares.assign(R, 0.0);
    count_integral.assign(R, 0.0);
    sojourn_sum.assign(R, 0.0);
    completions.assign(R, 0);
  }

  void recompute_shares(const NetworkSpec& spec) {
    if (policy == Policy::Min)
      alloc_min_into(spec, counts, link_occ, shares);
    else
      alloc_maxmin_into(spec, counts, scratch, shares);
  }

  // earliest completion; ties resolved toward the lowest route id by scan
  // order
  double next_completion(double now, int& route) const {
    double best = kInf;
    route = -1;
    for (size_t r = 0; r < counts.size(); ++r) {
      if (counts[r] == 0) continue;
      const double gap = std::max(docs[r].front().rem, 0.0);
      const double t = now + gap / shares[r];
      if (t < best) {
        best = t;
        route = static_cast<int>(r);
      }
    }
    return best;
  }

  void advance(double dt) {
    if (dt <= 0.0) return;
    for (size_t r = 0; r < counts.size(); ++r) {
      if (counts[r] == 0) continue;
      const double dec = shares[r] * dt;
      for (RemDoc& d : docs[r]) d.rem -= dec;
    }
  }

  void accumulate(double weight) {
    if (weight <= 0.0) return;
    int64_t top = 0;
    for (int64_t x : link_occ) top = std::max(top, x);
    if (occ_hist.size() <= static_cast<size_t>(top))
      occ_hist.resize(top + 1, 0.0);
    for (int64_t x : link_occ) occ_hist[x] += weight;
    for (size_t r = 0; r < counts.size(); ++r)
      if (counts[r] != 0)
        count_integral[r] += static_cast<double>(counts[r]) * weight;
  }

  void add_doc(const NetworkSpec& spec, int route, double size, double now) {
    docs[route].push_back({size, now});
    std::push_heap(docs[route].begin(), docs[route].end(), RemLater{});
    ++counts[route];
    for (int l : spec.routes[route].links) ++link_occ[l];
  }

  RemDoc pop_doc(const NetworkSpec& spec, int route) {
    std::pop_heap(docs[route].begin(), docs[route].end(), RemLater{});
    const RemDoc doc = docs[route].back();
    docs[route].pop_back();
    --counts[route];
    for (int l : spec.routes[route].links) --link_occ[l];
    return doc;
  }

  int64_t total_count() const {
    int64_t total = 0;
    for (int64_t x : counts) total += x;
    return total;
  }
};

struct EngineResult {
  std::vector<SimStats> stats;
  int64_t dominance_violations = 0;
};

// One or two systems driven by a single arrival/size stream. With two
// systems, after every event the max-min system (index 0) must not hold more
// transfers than the min system on any link; breaches are counted, not
// thrown.
EngineResult run_exact(const NetworkSpec& spec, const SimConfig& config,
                       std::vector<Policy> policies, bool check_dominance) {
  const double t_end = config.warmup_time + config.measure_time;
  double capacity_sum = 0.0;
  for (const LinkSpec& l : spec.links) capacity_sum += l.capacity;

  std::vector<ExactSystem> systems(policies.size());
  for (size_t s = 0; s < systems.size(); ++s)
    systems[s].init(spec, policies[s]);

  ArrivalStream stream(spec, config.seed);
  const bool tracing = config.trace_sample_dt > 0.0;
  double next_trace = 0.0;

  double t = 0.0;
  int64_t events = 0, events_measured = 0;
  int64_t dominance_violations = 0;
  double measured = 0.0;
  bool truncated = false;

  while (true) {
    if (events >= config.max_events) {
      truncated = true;
      break;
    }
    // candidate times; completions win ties, system 0 before system 1
    double te = t_end;
    int kind = -1;  // -1 end, -2 trace, -3 arrival, s >= 0 completion in s
    int comp_route = -1;
    for (size_t s = 0; s < systems.size(); ++s) {
      int route;
      const double tc = systems[s].next_completion(t, route);
      if (tc < te) {
        te = tc;
        kind = static_cast<int>(s);
        comp_route = route;
      }
    }
    if (!stream.queue.empty() && stream.queue.top().time < te) {
      te = stream.queue.top().time;
      kind = -3;
    }
    if (tracing && next_trace <= te && next_trace <= t_end) {
      // sampling beats events at the same instant: state is pre-event there
      te = next_trace;
      kind = -2;
    }

    const double dt = te - t;
    const double weight = window_overlap(t, te, config.warmup_time, t_end);
    measured += weight;
    for (ExactSystem& sys : systems) {
      sys.accumulate(weight);
      if (config.check_invariants)
        check_work_conservation(sys.counts, sys.shares, dt, capacity_sum);
      sys.advance(dt);
    }
    t = te;

    if (kind == -1) break;
    if (kind == -2) {
      for (ExactSystem& sys : systems)
        sys.trace.push_back(static_cast<double>(sys.total_count()));
      next_trace += config.trace_sample_dt;
      continue;
    }

    if (kind >= 0) {
      ExactSystem& sys = systems[kind];
      if (config.check_invariants) {
        const double rem = sys.docs[comp_route].front().rem;
        if (std::abs(rem) > 1e-7)
          throw std::logic_error("completion fired with remaining work " +
                                 std::to_string(rem));
      }
      const RemDoc doc = sys.pop_doc(spec, comp_route);
      if (t >= config.warmup_time) {
        ++sys.completions[comp_route];
        sys.sojourn_sum[comp_route] += t - doc.arrival_time;
      }
      sys.recompute_shares(spec);
    } else {
      const Arrival a = stream.queue.top();
      stream.queue.pop();
      const double size = stream.draw_size(a.route);
      for (ExactSystem& sys : systems) {
        sys.add_doc(spec, a.route, size, t);
        sys.recompute_shares(spec);
      }
      stream.schedule_next(a.route, t);
    }
    ++events;
    if (t >= config.warmup_time) ++events_measured;

    if (check_dominance)
      for (size_t l = 0; l < spec.links.size(); ++l)
        if (systems[0].link_occ[l] > systems[1].link_occ[l]) {
          ++dominance_violations;
          break;
        }
    if (config.check_invariants && (events & 0xFFF) == 0)
      for (const ExactSystem& sys : systems)
        check_occupancy_sync(spec, sys.counts, sys.link_occ);
  }

  EngineResult result;
  result.dominance_violations = dominance_violations;
  for (ExactSystem& sys : systems)
    result.stats.push_back(make_stats(
        spec, config, sys.occ_hist, sys.count_integral, sys.sojourn_sum,
        sys.completions, std::move(sys.trace), events, events_measured, t,
        measured, truncated));
  return result;
}

// ---------------------------------------------------------------------------
// Fast engine: min policy, single system.

// A transfer keyed by its finish coordinate: the route's cumulative
// served-work coordinate at arrival plus the drawn size. All transfers on a
// route drain together, so the coordinate alone decides completion order.
struct Doc {
  double finish_coord;
  double arrival_time;
};

struct DocLater {
  bool operator()(const Doc& a, const Doc& b) const {
    if (a.finish_coord != b.finish_coord)
      return a.finish_coord > b.finish_coord;
    return a.arrival_time > b.arrival_time;
  }
};

// Min-policy engine for long single runs. Per event it touches only routes
// sharing a link with the route that changed: shares are re-derived from
// cached per-link levels C_l/X_l (the same expression alloc_min_into uses,
// so the periodic cross-check can compare bitwise), served-work coordinates
// advance lazily when a route's share changes, a tournament tree over
// absolute completion times yields the next departure, and histograms and
// count integrals settle only when the underlying value changes.
class FastMinEngine {
 public:
  FastMinEngine(const NetworkSpec& spec, const SimConfig& config)
      : spec_(spec),
        config_(config),
        R_(spec.routes.size()),
        L_(spec.links.size()),
        t_end_(config.warmup_time + config.measure_time) {
    routes_by_link_.assign(L_, {});
    for (size_t r = 0; r < R_; ++r)
      for (int l : spec_.routes[r].links)
        routes_by_link_[l].push_back(static_cast<int>(r));
    counts_.assign(R_, 0);
    link_occ_.assign(L_, 0);
    level_.assign(L_, kInf);
    share_.assign(R_, 0.0);
    served_flush_.assign(R_, 0.0);
    flush_time_.assign(R_, 0.0);
    docs_.assign(R_, {});
    tree_base_ = 1;
    while (tree_base_ < std::max<size_t>(R_, 1)) tree_base_ <<= 1;
    tree_.assign(2 * tree_base_, kInf);
    seen_.assign(R_, -1);
    link_flush_time_.assign(L_, 0.0);
    count_flush_time_.assign(R_, 0.0);
    count_integral_.assign(R_, 0.0);
    sojourn_sum_.assign(R_, 0.0);
    completions_.assign(R_, 0);
    for (const LinkSpec& l : spec_.links) capacity_sum_ += l.capacity;
  }

  SimStats run() {
    ArrivalStream stream(spec_, config_.seed);
    const bool tracing = config_.trace_sample_dt > 0.0;
    double next_trace = 0.0;

    double t = 0.0, measured = 0.0;
    int64_t events = 0, events_measured = 0;
    bool truncated = false;

    while (true) {
      if (events >= config_.max_events) {
        truncated = true;
        break;
      }
      double te = t_end_;
      int kind = -1;  // -1 end, -2 trace, -3 arrival, 0 completion
      if (tree_[1] < te) {
        te = tree_[1];
        kind = 0;
      }
      if (!stream.queue.empty() && stream.queue.top().time < te) {
        te = stream.queue.top().time;
        kind = -3;
      }
      if (tracing && next_trace <= te && next_trace <= t_end_) {
        te = next_trace;
        kind = -2;
      }

      measured += window_overlap(t, te, config_.warmup_time, t_end_);
      t = te;

      if (kind == -1) break;
      if (kind == -2) {
        trace_.push_back(static_cast<double>(total_docs_));
        next_trace += config_.trace_sample_dt;
        continue;
      }

      if (kind == 0) {
        on_completion(tree_argmin(), t);
      } else {
        const Arrival a = stream.queue.top();
        stream.queue.pop();
        on_arrival(a.route, stream.draw_size(a.route), t);
        stream.schedule_next(a.route, t);
      }
      ++events;
      if (t >= config_.warmup_time) ++events_measured;

      if (config_.check_invariants) {
        check_work_conservation(counts_, share_, 1.0, capacity_sum_);
        if ((events & 0xFFF) == 0) cross_check_state();
      }
    }

    for (size_t l = 0; l < L_; ++l) flush_link(static_cast<int>(l), t);
    for (size_t r = 0; r < R_; ++r) flush_count(static_cast<int>(r), t);
    return make_stats(spec_, config_, occ_hist_, count_integral_,
                      sojourn_sum_, completions_, std::move(trace_), events,
                      events_measured, t, measured, truncated);
  }

 private:
  double served_now(int r, double now) const {
    if (counts_[r] == 0) return served_flush_[r];
    return served_flush_[r] + share_[r] * (now - flush_time_[r]);
  }

  void flush_clock(int r, double now) {
    served_flush_[r] = served_now(r, now);
    flush_time_[r] = now;
  }

  double completion_time(int r, double now) const {
    if (counts_[r] == 0) return kInf;
    const double gap =
        std::max(docs_[r].top().finish_coord - served_now(r, now), 0.0);
    return now + gap / share_[r];
  }

  void tree_set(int r, double v) {
    size_t i = tree_base_ + static_cast<size_t>(r);
    tree_[i] = v;
    for (i >>= 1; i >= 1; i >>= 1) {
      const double m = std::min(tree_[2 * i], tree_[2 * i + 1]);
      if (tree_[i] == m) break;
      tree_[i] = m;
    }
  }

  // leftmost minimum, so ties resolve toward the lowest route id
  int tree_argmin() const {
    size_t i = 1;
    while (i < tree_base_) i = tree_[2 * i] <= tree_[2 * i + 1] ? 2 * i : 2 * i + 1;
    return static_cast<int>(i - tree_base_);
  }

  void flush_link(int l, double now) {
    const double w =
        window_overlap(link_flush_time_[l], now, config_.warmup_time, t_end_);
    if (w > 0.0) {
      const size_t x = static_cast<size_t>(link_occ_[l]);
      if (occ_hist_.size() <= x) occ_hist_.resize(x + 1, 0.0);
      occ_hist_[x] += w;
    }
    link_flush_time_[l] = now;
  }

  void flush_count(int r, double now) {
    const double w =
        window_overlap(count_flush_time_[r], now, config_.warmup_time, t_end_);
    if (w > 0.0 && counts_[r] > 0)
      count_integral_[r] += static_cast<double>(counts_[r]) * w;
    count_flush_time_[r] = now;
  }

  // after route r0's occupancy changed: refresh its links' levels, re-derive
  // shares of routes crossing those links, and reschedule completions
  void refresh_after_change(int r0, double now) {
    ++epoch_;
    for (int l : spec_.routes[r0].links)
      level_[l] = link_occ_[l] > 0
                      ? spec_.links[l].capacity /
                            static_cast<double>(link_occ_[l])
                      : kInf;
    for (int l : spec_.routes[r0].links)
      for (int r2 : routes_by_link_[l]) {
        if (seen_[r2] == epoch_) continue;
        seen_[r2] = epoch_;
        double m = kInf;
        for (int l2 : spec_.routes[r2].links) m = std::min(m, level_[l2]);
        // an occupied route keeps its own links busy, so an all-idle level
        // can only belong to an empty route; store a finite placeholder to
        // keep the clock arithmetic free of inf*0
        if (counts_[r2] == 0) m = 0.0;
        if (m != share_[r2]) {
          flush_clock(r2, now);
          share_[r2] = m;
          if (r2 != r0 && counts_[r2] > 0)
            tree_set(r2, completion_time(r2, now));
        }
      }
    // r0's queue head changed even if its share did not
    tree_set(r0, completion_time(r0, now));
  }

  void on_arrival(int r, double size, double now) {
    flush_clock(r, now);
    docs_[r].push({served_flush_[r] + size, now});
    flush_count(r, now);
    ++counts_[r];
    ++total_docs_;
    for (int l : spec_.routes[r].links) {
      flush_link(l, now);
      ++link_occ_[l];
    }
    refresh_after_change(r, now);
  }

  void on_completion(int r, double now) {
    flush_clock(r, now);
    const Doc doc = docs_[r].top();
    if (config_.check_invariants &&
        std::abs(served_flush_[r] - doc.finish_coord) >
            1e-9 * std::max(1.0, std::abs(doc.finish_coord)))
      throw std::logic_error("completion coordinate drift");
    docs_[r].pop();
    if (now >= config_.warmup_time) {
      ++completions_[r];
      sojourn_sum_[r] += now - doc.arrival_time;
    }
    flush_count(r, now);
    --counts_[r];
    --total_docs_;
    for (int l : spec_.routes[r].links) {
      flush_link(l, now);
      --link_occ_[l];
    }
    refresh_after_change(r, now);
  }

  // incremental state must equal a from-scratch recomputation
  void cross_check_state() const {
    check_occupancy_sync(spec_, counts_, link_occ_);
    std::vector<double> expect;
    alloc_min_into(spec_, counts_, link_occ_, expect);
    for (size_t r = 0; r < R_; ++r)
      if (counts_[r] > 0 && expect[r] != share_[r])
        throw std::logic_error("incremental share drift on route " +
                               std::to_string(r));
  }

  const NetworkSpec& spec_;
  const SimConfig& config_;
  size_t R_, L_;
  double t_end_;
  double capacity_sum_ = 0.0;

  std::vector<std::vector<int>> routes_by_link_;
  std::vector<int64_t> counts_;
  std::vector<int64_t> link_occ_;
  int64_t total_docs_ = 0;
  std::vector<double> level_;
  std::vector<double> share_;
  std::vector<double> served_flush_;
  std::vector<double> flush_time_;
  std::vector<std::priority_queue<Doc, std::vector<Doc>, DocLater>> docs_;
  size_t tree_base_ = 1;
  std::vector<double> tree_;
  std::vector<int64_t> seen_;
  int64_t epoch_ = 0;

  std::vector<double> occ_hist_;
  std::vector<double> link_flush_time_;
  std::vector<double> count_integral_;
  std::vector<double> count_flush_time_;
  std::vector<double> sojourn_sum_;
  std::vector<int64_t> completions_;
  std::vector<double> trace_;
};

}  // namespace

SimStats run(const NetworkSpec& spec, const SimConfig& config) {
  validate_run_inputs(spec, config);
  if (config.policy == Policy::Min) return FastMinEngine(spec, config).run();
  EngineResult result = run_exact(spec, config, {config.policy}, false);
  return std::move(result.stats[0]);
}

CoupledStats run_coupled(const NetworkSpec& spec, const SimConfig& config) {
  validate_run_inputs(spec, config);
  EngineResult result =
      run_exact(spec, config, {Policy::MaxMin, Policy::Min}, true);
  CoupledStats out;
  out.maxmin = std::move(result.stats[0]);
  out.min = std::move(result.stats[1]);
  out.dominance_violations = result.dominance_violations;
  return out;
}

std::vector<double> occupancy_cdf(const SimStats& stats) {
  if (stats.link_occupancy_dist.empty() || stats.measured_time <= 0.0)
    throw ValidationError("occupancy_cdf: empty measurement window");
  std::vector<double> cdf(stats.link_occupancy_dist.size());
  double acc = 0.0;
  for (size_t k = 0; k < cdf.size(); ++k) {
    acc += stats.link_occupancy_dist[k];
    cdf[k] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9)
    throw ValidationError("occupancy_cdf: distribution sums to " +
                          std::to_string(acc));
  return cdf;
}

}  // namespace bestnet
