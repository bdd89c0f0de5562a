// bestnet: generators, simulator, fixed-point solvers and comparison reports
// behind one binary. Every command that writes files also writes a
// <out>.manifest.json recording the resolved parameters; `bestnet rerun
// <manifest>` replays it and must reproduce the outputs byte for byte.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bestnet/allocation.hpp"
#include "bestnet/heavy_traffic.hpp"
#include "bestnet/io.hpp"
#include "bestnet/manifest.hpp"
#include "bestnet/meanfield.hpp"
#include "bestnet/network.hpp"
#include "bestnet/simulator.hpp"

namespace {

using nlohmann::json;
namespace bn = bestnet;

constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitInvariantViolation = 4;

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      const size_t a = cur.find_first_not_of(" \t");
      const size_t b = cur.find_last_not_of(" \t");
      if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

bn::Policy parse_policy(const std::string& name) {
  if (name == "min") return bn::Policy::Min;
  if (name == "maxmin") return bn::Policy::MaxMin;
  throw bn::ValidationError("unknown policy '" + name +
                            "' (expected min or maxmin)");
}

size_t thread_cap() {
  if (const char* env = std::getenv("BESTNET_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw bn::ValidationError("BESTNET_THREADS must be a positive integer");
    return static_cast<size_t>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// run `fn(i)` for i in [0, n) on up to thread_cap() workers
void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min(n, thread_cap());
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void emit_manifest(const std::string& command,
                   std::map<std::string, std::string> parameters,
                   const std::string& input_hash,
                   std::vector<std::string> outputs, uint64_t seed,
                   const std::string& out_base) {
  bn::RunManifest manifest;
  manifest.command = command;
  manifest.parameters = std::move(parameters);
  manifest.input_hash = input_hash;
  manifest.output_paths = std::move(outputs);
  manifest.seed = seed;
  manifest.timestamp = bn::utc_timestamp_now();
  bn::write_manifest(manifest, out_base + ".manifest.json");
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

json gen_report(const bn::NetworkSpec& spec,
                const std::vector<std::string>& outputs) {
  const bn::LoadReport report = bn::compute_link_loads(spec);
  return json{{"label", spec.label},
              {"links", spec.links.size()},
              {"routes", spec.routes.size()},
              {"load_report", report},
              {"outputs", outputs}};
}

json meanfield_summary(const bn::MeanFieldSolution& s) {
  return json{{"rho", s.rho},
              {"route_len", s.route_len},
              {"k_max", s.alpha.empty() ? 0 : s.alpha.size() - 1},
              {"alpha_bar", s.alpha_bar},
              {"k0", s.k0},
              {"peak", bn::peak_index(s)},
              {"iterations", s.iterations},
              {"residual", s.residual},
              {"tail_mass", s.tail_mass}};
}

struct GenCommon {
  std::string out;
};

void finish_gen(const std::string& command,
                std::map<std::string, std::string> params,
                const bn::NetworkSpec& spec, const std::string& out) {
  ensure_parent_dir(out);
  bn::save_network_spec(spec, out);
  const std::string hash = bn::fnv1a64_hex(bn::read_text_file(out));
  emit_manifest(command, std::move(params), hash, {out}, 0, out);
  print_json(gen_report(spec, {out}));
}

int run_cli(std::vector<std::string> args);

void add_gen(CLI::App& app) {
  CLI::App* gen = app.add_subcommand("gen", "generate a network spec file");
  gen->require_subcommand(1);

  {
    CLI::App* sub = gen->add_subcommand(
        "linear", "one long route across every link plus one short route per link");
    auto n = std::make_shared<int>(3);
    auto capacity = std::make_shared<double>(1.0);
    auto lambda_long = std::make_shared<double>(0.3);
    auto lambda_short = std::make_shared<double>(0.3);
    auto sigma = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    sub->add_option("--links", *n, "number of links")->required();
    sub->add_option("--capacity", *capacity, "capacity of every link");
    sub->add_option("--lambda-long", *lambda_long, "arrival rate of the long route")
        ->required();
    sub->add_option("--lambda-short", *lambda_short,
                    "arrival rate of each single-link route")
        ->required();
    sub->add_option("--sigma", *sigma, "mean document size");
    sub->add_option("--out", *out, "output spec path")->required();
    sub->callback([=] {
      finish_gen("gen linear",
                 {{"links", std::to_string(*n)},
                  {"capacity", fmt17(*capacity)},
                  {"lambda-long", fmt17(*lambda_long)},
                  {"lambda-short", fmt17(*lambda_short)},
                  {"sigma", fmt17(*sigma)},
                  {"out", *out}},
                 bn::gen_linear(*n, *capacity, *lambda_long, *lambda_short, *sigma),
                 *out);
    });
  }

  {
    CLI::App* sub = gen->add_subcommand(
        "star", "symmetric star, one route per ordered branch pair");
    auto n = std::make_shared<int>(20);
    auto rho = std::make_shared<double>(0.9);
    auto sigma = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    sub->add_option("--n", *n, "number of links (even, one in/out pair per branch)")
        ->required();
    sub->add_option("--rho", *rho, "nominal per-link load")->required();
    sub->add_option("--sigma", *sigma, "mean document size");
    sub->add_option("--out", *out, "output spec path")->required();
    sub->callback([=] {
      finish_gen("gen star",
                 {{"n", std::to_string(*n)},
                  {"rho", fmt17(*rho)},
                  {"sigma", fmt17(*sigma)},
                  {"out", *out}},
                 bn::gen_star(*n, *rho, *sigma), *out);
    });
  }

  {
    CLI::App* sub = gen->add_subcommand(
        "asym-star", "two-sided star with distinct in/out capacities");
    auto n_in = std::make_shared<int>(10);
    auto n_out = std::make_shared<int>(10);
    auto c_in = std::make_shared<double>(1.0);
    auto c_out = std::make_shared<double>(1.0);
    auto lambda = std::make_shared<double>(0.9);
    auto sigma = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    sub->add_option("--n-in", *n_in, "inbound links")->required();
    sub->add_option("--n-out", *n_out, "outbound links")->required();
    sub->add_option("--c-in", *c_in, "inbound capacity");
    sub->add_option("--c-out", *c_out, "outbound capacity");
    sub->add_option("--lambda", *lambda, "aggregate arrival rate per outbound link")
        ->required();
    sub->add_option("--sigma", *sigma, "mean document size");
    sub->add_option("--out", *out, "output spec path")->required();
    sub->callback([=] {
      finish_gen("gen asym-star",
                 {{"n-in", std::to_string(*n_in)},
                  {"n-out", std::to_string(*n_out)},
                  {"c-in", fmt17(*c_in)},
                  {"c-out", fmt17(*c_out)},
                  {"lambda", fmt17(*lambda)},
                  {"sigma", fmt17(*sigma)},
                  {"out", *out}},
                 bn::gen_asym_star(*n_in, *n_out, *c_in, *c_out, *lambda, *sigma),
                 *out);
    });
  }

  {
    CLI::App* sub = gen->add_subcommand(
        "hypercube", "directed d-cube with all shortest routes of a given length");
    auto d = std::make_shared<int>(5);
    auto route_len = std::make_shared<int>(2);
    auto rho = std::make_shared<double>(0.9);
    auto sigma = std::make_shared<double>(1.0);
    auto out = std::make_shared<std::string>();
    sub->add_option("--d", *d, "cube dimension")->required();
    sub->add_option("--route-len", *route_len, "links per route")->required();
    sub->add_option("--rho", *rho, "per-link load");
    sub->add_option("--sigma", *sigma, "mean document size");
    sub->add_option("--out", *out, "output spec path")->required();
    sub->callback([=] {
      finish_gen("gen hypercube",
                 {{"d", std::to_string(*d)},
                  {"route-len", std::to_string(*route_len)},
                  {"rho", fmt17(*rho)},
                  {"sigma", fmt17(*sigma)},
                  {"out", *out}},
                 bn::gen_hypercube(*d, *route_len, *rho, *sigma), *out);
    });
  }
}

void add_alloc(CLI::App& app) {
  CLI::App* sub = app.add_subcommand(
      "alloc", "per-flow rates for a fixed vector of route occupancies");
  auto network = std::make_shared<std::string>();
  auto counts_text = std::make_shared<std::string>();
  auto policy_name = std::make_shared<std::string>("min");
  auto out = std::make_shared<std::string>();
  sub->add_option("--network", *network, "network spec path")->required();
  sub->add_option("--counts", *counts_text,
                  "comma-separated transfers in progress per route")
      ->required();
  sub->add_option("--policy", *policy_name, "min or maxmin");
  sub->add_option("--out", *out, "optional report path");
  sub->callback([=] {
    const bn::NetworkSpec spec = bn::load_network_spec(*network);
    bn::RouteCounts counts;
    for (const std::string& tok : split_list(*counts_text)) {
      try {
        counts.counts.push_back(std::stoll(tok));
      } catch (const std::exception&) {
        throw bn::ValidationError("bad count '" + tok + "'");
      }
    }
    if (counts.counts.size() != spec.routes.size())
      throw bn::ValidationError("expected " + std::to_string(spec.routes.size()) +
                                " counts, got " +
                                std::to_string(counts.counts.size()));
    const bn::Policy policy = parse_policy(*policy_name);
    const bn::Allocation alloc = policy == bn::Policy::Min
                                     ? bn::alloc_min(spec, counts)
                                     : bn::alloc_maxmin(spec, counts);
    const json j = alloc;
    if (!out->empty()) {
      ensure_parent_dir(*out);
      bn::write_text_file(*out, j.dump(2) + "\n");
      emit_manifest("alloc",
                    {{"network", *network},
                     {"counts", *counts_text},
                     {"policy", *policy_name},
                     {"out", *out}},
                    bn::fnv1a64_hex(bn::read_text_file(*network)), {*out}, 0,
                    *out);
    }
    print_json(j);
  });
}

void add_simulate(CLI::App& app, int& exit_code) {
  CLI::App* sub = app.add_subcommand(
      "simulate", "event-driven simulation of one policy or both coupled");
  auto network = std::make_shared<std::string>();
  auto policy_name = std::make_shared<std::string>("min");
  auto seed = std::make_shared<uint64_t>(1);
  auto warmup = std::make_shared<double>(-1.0);
  auto measure = std::make_shared<double>(0.0);
  auto max_events = std::make_shared<int64_t>(50'000'000);
  auto trace_dt = std::make_shared<double>(0.0);
  auto coupled = std::make_shared<bool>(false);
  auto check = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  sub->add_option("--network", *network, "network spec path")->required();
  sub->add_option("--policy", *policy_name, "min or maxmin (single runs)");
  sub->add_option("--seed", *seed, "rng seed");
  sub->add_option("--warmup", *warmup, "discard window (default measure/4)");
  sub->add_option("--measure", *measure, "measurement window")->required();
  sub->add_option("--max-events", *max_events, "event cap");
  sub->add_option("--trace-dt", *trace_dt, "sample total transfer count every dt");
  sub->add_flag("--coupled", *coupled,
                "run min and maxmin on shared randomness, count dominance breaks");
  sub->add_flag("--check-invariants", *check, "per-event accounting checks");
  sub->add_option("--out", *out, "output prefix")->required();
  sub->callback([=, &exit_code] {
    const bn::NetworkSpec spec = bn::load_network_spec(*network);
    bn::SimConfig config;
    config.seed = *seed;
    config.measure_time = *measure;
    config.warmup_time = *warmup >= 0.0 ? *warmup : 0.25 * *measure;
    config.policy = parse_policy(*policy_name);
    config.max_events = *max_events;
    config.trace_sample_dt = *trace_dt;
    config.check_invariants = *check;

    std::map<std::string, std::string> params{
        {"network", *network},
        {"policy", *policy_name},
        {"seed", std::to_string(*seed)},
        {"warmup", fmt17(config.warmup_time)},
        {"measure", fmt17(*measure)},
        {"max-events", std::to_string(*max_events)},
        {"out", *out}};
    if (*trace_dt > 0.0) params["trace-dt"] = fmt17(*trace_dt);
    if (*coupled) params["coupled"] = "true";
    if (*check) params["check-invariants"] = "true";
    const std::string hash = bn::fnv1a64_hex(bn::read_text_file(*network));
    ensure_parent_dir(*out);

    std::vector<std::string> outputs;
    json report;
    if (*coupled) {
      const bn::CoupledStats stats = bn::run_coupled(spec, config);
      const std::string mm_csv = *out + "_maxmin_occupancy.csv";
      const std::string min_csv = *out + "_min_occupancy.csv";
      bn::write_occupancy_csv(stats.maxmin, mm_csv);
      bn::write_occupancy_csv(stats.min, min_csv);
      report = json{{"maxmin", stats.maxmin},
                    {"min", stats.min},
                    {"dominance_violations", stats.dominance_violations}};
      outputs = {mm_csv, min_csv, *out + "_stats.json"};
      if (stats.dominance_violations > 0) exit_code = kExitInvariantViolation;
    } else {
      const bn::SimStats stats = bn::run(spec, config);
      const std::string csv = *out + "_occupancy.csv";
      bn::write_occupancy_csv(stats, csv);
      report = json{{"policy", *policy_name}, {"stats", stats}};
      outputs = {csv, *out + "_stats.json"};
    }
    bn::write_text_file(*out + "_stats.json", report.dump(2) + "\n");
    emit_manifest("simulate", std::move(params), hash, outputs, *seed, *out);
    print_json(report);
  });
}

void add_meanfield(CLI::App& app) {
  CLI::App* sub = app.add_subcommand(
      "meanfield", "occupancy distribution from the fixed-point recursion");
  auto rho = std::make_shared<double>(-1.0);
  auto route_len = std::make_shared<int>(2);
  auto k_max = std::make_shared<int>(0);
  auto damping = std::make_shared<double>(0.5);
  auto tol = std::make_shared<double>(1e-10);
  auto max_iters = std::make_shared<int>(10000);
  auto rho_grid = std::make_shared<std::string>();
  auto asym = std::make_shared<bool>(false);
  auto rho_in = std::make_shared<double>(0.9);
  auto rho_out = std::make_shared<double>(0.9);
  auto c_ratio = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  sub->add_option("--rho", *rho, "per-link load");
  sub->add_option("--L", *route_len, "links crossed per route");
  sub->add_option("--k-max", *k_max, "support truncation (0: auto)");
  sub->add_option("--damping", *damping, "iteration damping weight");
  sub->add_option("--tol", *tol, "convergence tolerance");
  sub->add_option("--max-iters", *max_iters, "iteration cap");
  sub->add_option("--rho-grid", *rho_grid,
                  "comma-separated loads, solved in parallel");
  sub->add_flag("--asym", *asym, "two-sided star with a capacity ratio");
  CLI::Option* rho_in_opt =
      sub->add_option("--rho-in", *rho_in, "inbound load (with --asym)");
  CLI::Option* rho_out_opt =
      sub->add_option("--rho-out", *rho_out, "outbound load (with --asym)");
  sub->add_option("--c-ratio", *c_ratio, "C_out/C_in (with --asym)");
  sub->add_option("--out", *out, "output prefix")->required();
  sub->callback([=] {
    ensure_parent_dir(*out);

    if (*asym) {
      if (rho_in_opt->count() == 0 || rho_out_opt->count() == 0)
        throw bn::ValidationError(
            "meanfield --asym requires both --rho-in and --rho-out");
      bn::AsymStarProblem problem;
      problem.rho_in = *rho_in;
      problem.rho_out = *rho_out;
      problem.c_ratio = *c_ratio;
      problem.k_max = *k_max;
      problem.damping = *damping;
      problem.tol = *tol;
      problem.max_iters = *max_iters;
      const bn::AsymStarSolution solution = bn::solve_asym_star(problem);

      bn::MeanFieldSolution side;  // reuse the csv schema for each marginal
      side.alpha = solution.alpha_in;
      side.u = solution.u_in;
      const std::string in_csv = *out + "_in.csv";
      bn::write_meanfield_csv(side, in_csv);
      side.alpha = solution.alpha_out;
      side.u = solution.u_out;
      const std::string out_csv = *out + "_out.csv";
      bn::write_meanfield_csv(side, out_csv);

      emit_manifest("meanfield",
                    {{"asym", "true"},
                     {"rho-in", fmt17(*rho_in)},
                     {"rho-out", fmt17(*rho_out)},
                     {"c-ratio", fmt17(*c_ratio)},
                     {"k-max", std::to_string(*k_max)},
                     {"damping", fmt17(*damping)},
                     {"tol", fmt17(*tol)},
                     {"max-iters", std::to_string(*max_iters)},
                     {"out", *out}},
                    "", {in_csv, out_csv}, 0, *out);
      print_json(json{{"rho_in", *rho_in},
                      {"rho_out", *rho_out},
                      {"c_ratio", *c_ratio},
                      {"abar_in", solution.abar_in},
                      {"abar_out", solution.abar_out},
                      {"iterations", solution.iterations},
                      {"residual", solution.residual},
                      {"tail_mass", solution.tail_mass},
                      {"outputs", json::array({in_csv, out_csv})}});
      return;
    }

    bn::MeanFieldProblem base;
    base.route_len = *route_len;
    base.k_max = *k_max;
    base.damping = *damping;
    base.tol = *tol;
    base.max_iters = *max_iters;

    if (!rho_grid->empty()) {
      const std::vector<std::string> tokens = split_list(*rho_grid);
      if (tokens.empty()) throw bn::ValidationError("--rho-grid is empty");
      std::vector<double> loads;
      for (const std::string& tok : tokens) {
        try {
          loads.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw bn::ValidationError("bad load '" + tok + "' in --rho-grid");
        }
      }
      std::vector<bn::MeanFieldSolution> solutions(loads.size());
      std::vector<std::string> outputs(loads.size());
      parallel_for(loads.size(), [&](size_t i) {
        bn::MeanFieldProblem problem = base;
        problem.rho = loads[i];
        solutions[i] = bn::fixed_point_solve(problem);
        outputs[i] = *out + "_rho" + tokens[i] + ".csv";
        bn::write_meanfield_csv(solutions[i], outputs[i]);
      });
      emit_manifest("meanfield",
                    {{"rho-grid", *rho_grid},
                     {"L", std::to_string(*route_len)},
                     {"k-max", std::to_string(*k_max)},
                     {"damping", fmt17(*damping)},
                     {"tol", fmt17(*tol)},
                     {"max-iters", std::to_string(*max_iters)},
                     {"out", *out}},
                    "", outputs, 0, *out);
      json summaries = json::array();
      for (const bn::MeanFieldSolution& s : solutions)
        summaries.push_back(meanfield_summary(s));
      print_json(json{{"solutions", summaries}, {"outputs", outputs}});
      return;
    }

    if (*rho < 0.0)
      throw bn::ValidationError("need --rho, --rho-grid, or --asym");
    bn::MeanFieldProblem problem = base;
    problem.rho = *rho;
    const bn::MeanFieldSolution solution = bn::fixed_point_solve(problem);
    const std::string csv = *out + ".csv";
    bn::write_meanfield_csv(solution, csv);
    emit_manifest("meanfield",
                  {{"rho", fmt17(*rho)},
                   {"L", std::to_string(*route_len)},
                   {"k-max", std::to_string(*k_max)},
                   {"damping", fmt17(*damping)},
                   {"tol", fmt17(*tol)},
                   {"max-iters", std::to_string(*max_iters)},
                   {"out", *out}},
                  "", {csv}, 0, *out);
    json summary = meanfield_summary(solution);
    summary["outputs"] = json::array({csv});
    print_json(summary);
  });
}

void add_compare(CLI::App& app) {
  CLI::App* sub = app.add_subcommand(
      "compare", "sup CDF distance between two occupancy distributions");
  auto sim_path = std::make_shared<std::string>();
  auto solver_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  sub->add_option("--sim", *sim_path, "CSV with k and prob/alpha columns")
      ->required();
  sub->add_option("--solver", *solver_path, "CSV with k and prob/alpha columns")
      ->required();
  sub->add_option("--out", *out, "optional report path");
  sub->callback([=] {
    const std::vector<double> a = bn::read_distribution_csv(*sim_path);
    const std::vector<double> b = bn::read_distribution_csv(*solver_path);
    const bn::DistanceReport report = bn::distribution_distance(a, b);
    const json j{{"sup_cdf_distance", report.sup_cdf_distance},
                 {"mean_diff", report.mean_diff}};
    if (!out->empty()) {
      ensure_parent_dir(*out);
      bn::write_text_file(*out, j.dump(2) + "\n");
      emit_manifest("compare",
                    {{"sim", *sim_path}, {"solver", *solver_path}, {"out", *out}},
                    bn::fnv1a64_hex(bn::read_text_file(*sim_path) +
                                    bn::read_text_file(*solver_path)),
                    {*out}, 0, *out);
    }
    print_json(j);
  });
}

void add_const_a(CLI::App& app) {
  CLI::App* sub = app.add_subcommand(
      "const-a", "heavy-traffic constant from the scaling-limit ODE");
  auto tol = std::make_shared<double>(1e-10);
  auto z_end = std::make_shared<double>(50.0);
  auto out = std::make_shared<std::string>();
  sub->add_option("--tol", *tol, "integration tolerance");
  sub->add_option("--z-end", *z_end, "initial right endpoint (auto-extended)");
  sub->add_option("--out", *out, "optional output prefix for the trajectory");
  sub->callback([=] {
    const bn::OdeSolution solution = bn::solve_cv_system(*z_end, *tol);
    const double a = bn::estimate_A(solution);
    const json j{{"A", a},
                 {"A_integral", solution.A_integral},
                 {"A_limit", solution.A_limit},
                 {"blasius_residual", bn::blasius_residual(solution)},
                 {"steps_accepted", solution.step_stats.accepted},
                 {"steps_rejected", solution.step_stats.rejected},
                 {"z_end", solution.grid.back()},
                 {"points", solution.grid.size()}};
    if (!out->empty()) {
      ensure_parent_dir(*out);
      const std::string csv = *out + "_trajectory.csv";
      bn::write_trajectory_csv(solution, csv);
      const std::string report_path = *out + "_report.json";
      bn::write_text_file(report_path, j.dump(2) + "\n");
      emit_manifest("const-a",
                    {{"tol", fmt17(*tol)}, {"z-end", fmt17(*z_end)}, {"out", *out}},
                    "", {csv, report_path}, 0, *out);
    }
    print_json(j);
  });
}

// A replay only reproduces outputs byte for byte if the input files still
// hold the bytes that were hashed into the manifest. gen manifests hash the
// generated file itself, which the replay rewrites, so those skip the check.
void check_recorded_inputs(const bn::RunManifest& manifest) {
  if (manifest.input_hash.empty()) return;
  const auto param = [&](const char* key) -> const std::string* {
    const auto it = manifest.parameters.find(key);
    return it == manifest.parameters.end() ? nullptr : &it->second;
  };
  std::string bytes;
  if (manifest.command == "simulate" || manifest.command == "alloc") {
    const std::string* network = param("network");
    if (!network) return;
    bytes = bn::read_text_file(*network);
  } else if (manifest.command == "compare") {
    const std::string* sim = param("sim");
    const std::string* solver = param("solver");
    if (!sim || !solver) return;
    bytes = bn::read_text_file(*sim) + bn::read_text_file(*solver);
  } else {
    return;
  }
  const std::string hash = bn::fnv1a64_hex(bytes);
  if (hash != manifest.input_hash)
    throw bn::ValidationError(
        "rerun: input files changed since the manifest was written (fnv1a64 " +
        hash + ", recorded " + manifest.input_hash + ")");
}

void add_rerun(CLI::App& app, int& exit_code) {
  CLI::App* sub = app.add_subcommand(
      "rerun", "replay a manifest; outputs must reproduce byte for byte");
  auto path = std::make_shared<std::string>();
  sub->add_option("manifest", *path, "path to a .manifest.json")->required();
  sub->callback([=, &exit_code] {
    const bn::RunManifest manifest = bn::load_manifest(*path);
    check_recorded_inputs(manifest);
    exit_code = run_cli(bn::manifest_argv(manifest));
  });
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"flow-level bandwidth sharing: simulator, solvers, reports"};
  app.name("bestnet");
  app.require_subcommand(1);
  int exit_code = 0;

  add_gen(app);
  add_alloc(app);
  add_simulate(app, exit_code);
  add_meanfield(app);
  add_compare(app);
  add_const_a(app);
  add_rerun(app, exit_code);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  } catch (const bn::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const bn::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
