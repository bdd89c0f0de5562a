#include "bestnet/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bestnet {

using nlohmann::json;

void to_json(json& j, const NetworkSpec& spec) {
  j = json::object();
  j["label"] = spec.label;
  j["links"] = json::array();
  for (const LinkSpec& l : spec.links)
    j["links"].push_back({{"id", l.id}, {"capacity", l.capacity}});
  j["routes"] = json::array();
  for (const RouteSpec& r : spec.routes)
    j["routes"].push_back({{"id", r.id},
                           {"links", r.links},
                           {"arrival_rate", r.arrival_rate},
                           {"mean_size", r.mean_size}});
}

void from_json(const json& j, NetworkSpec& spec) {
  spec = NetworkSpec{};
  spec.label = j.value("label", "");
  for (const json& jl : j.at("links")) {
    LinkSpec l;
    l.id = jl.at("id").get<int>();
    l.capacity = jl.at("capacity").get<double>();
    spec.links.push_back(l);
  }
  for (const json& jr : j.at("routes")) {
    RouteSpec r;
    r.id = jr.at("id").get<int>();
    r.links = jr.at("links").get<std::vector<int>>();
    r.arrival_rate = jr.at("arrival_rate").get<double>();
    r.mean_size = jr.at("mean_size").get<double>();
    spec.routes.push_back(std::move(r));
  }
}

void to_json(json& j, const LoadReport& report) {
  j = json{{"per_link_load", report.per_link_load},
           {"max_load", report.max_load},
           {"classification", to_string(report.classification)}};
}

void to_json(json& j, const Allocation& alloc) {
  j = json{{"policy", to_string(alloc.policy)}, {"shares", alloc.shares}};
}

void to_json(json& j, const SimStats& stats) {
  j = json{{"link_occupancy_dist", stats.link_occupancy_dist},
           {"mean_per_route_count", stats.mean_per_route_count},
           {"mean_transfer_time", stats.mean_transfer_time},
           {"completions", stats.completions},
           {"events_processed", stats.events_processed},
           {"events_measured", stats.events_measured},
           {"end_time", stats.end_time},
           {"measured_time", stats.measured_time},
           {"truncated", stats.truncated}};
  if (stats.trace_dt > 0.0) {
    j["trace_dt"] = stats.trace_dt;
    j["total_count_trace"] = stats.total_count_trace;
  }
}

void to_json(json& j, const MeanFieldSolution& solution) {
  j = json{{"rho", solution.rho},
           {"route_len", solution.route_len},
           {"k_max", solution.alpha.empty() ? 0 : solution.alpha.size() - 1},
           {"alpha", solution.alpha},
           {"u", solution.u},
           {"alpha_bar", solution.alpha_bar},
           {"k0", solution.k0},
           {"iterations", solution.iterations},
           {"residual", solution.residual},
           {"tail_mass", solution.tail_mass}};
}

void to_json(json& j, const AsymStarSolution& solution) {
  j = json{{"alpha_in", solution.alpha_in},
           {"alpha_out", solution.alpha_out},
           {"u_in", solution.u_in},
           {"u_out", solution.u_out},
           {"abar_in", solution.abar_in},
           {"abar_out", solution.abar_out},
           {"iterations", solution.iterations},
           {"residual", solution.residual},
           {"tail_mass", solution.tail_mass}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
  if (!out.good()) throw ValidationError("write failed for " + path);
}

NetworkSpec load_network_spec(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  NetworkSpec spec;
  try {
    spec = j.get<NetworkSpec>();
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  validate(spec);
  return spec;
}

void save_network_spec(const NetworkSpec& spec, const std::string& path) {
  validate(spec);
  json j = spec;
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_occupancy_csv(const SimStats& stats, const std::string& path) {
  const std::vector<double> cdf = occupancy_cdf(stats);
  std::string out = "k,prob,cdf\n";
  for (size_t k = 0; k < cdf.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += fmt_double(stats.link_occupancy_dist[k]);
    out += ',';
    out += fmt_double(cdf[k]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_meanfield_csv(const MeanFieldSolution& solution,
                         const std::string& path) {
  std::string out = "k,alpha,u,cdf\n";
  double acc = 0.0;
  for (size_t k = 0; k < solution.alpha.size(); ++k) {
    acc += solution.alpha[k];
    out += std::to_string(k);
    out += ',';
    out += fmt_double(solution.alpha[k]);
    out += ',';
    out += fmt_double(k < solution.u.size() ? solution.u[k] : 0.0);
    out += ',';
    out += fmt_double(acc);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_trajectory_csv(const OdeSolution& solution,
                          const std::string& path) {
  std::string out = "z,c,v,v_prime\n";
  for (size_t i = 0; i < solution.grid.size(); ++i) {
    out += fmt_double(solution.grid[i]);
    out += ',';
    out += fmt_double(solution.c[i]);
    out += ',';
    out += fmt_double(solution.v[i]);
    out += ',';
    out += fmt_double(solution.v_prime[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<double> read_distribution_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": empty CSV");
  // header: locate k and the pmf column (named prob or alpha)
  int k_col = -1, p_col = -1, col = 0;
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) {
    if (cell == "k") k_col = col;
    if (cell == "prob" || cell == "alpha") p_col = col;
    ++col;
  }
  if (k_col < 0 || p_col < 0)
    throw ValidationError(path + ": need 'k' and 'prob'/'alpha' columns");

  std::vector<double> pmf;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    int c = 0;
    long k = -1;
    double p = 0.0;
    while (std::getline(row, cell, ',')) {
      try {
        if (c == k_col) k = std::stol(cell);
        if (c == p_col) p = std::stod(cell);
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": bad number '" + cell + "'");
      }
      ++c;
    }
    if (k < 0)
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": missing k");
    if (pmf.size() <= static_cast<size_t>(k)) pmf.resize(k + 1, 0.0);
    pmf[k] = p;
  }
  if (pmf.empty()) throw ValidationError(path + ": no data rows");
  return pmf;
}

DistanceReport distribution_distance(const std::vector<double>& a,
                                     const std::vector<double>& b) {
  DistanceReport report;
  const size_t n = std::max(a.size(), b.size());
  double ca = 0.0, cb = 0.0, ma = 0.0, mb = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double pa = k < a.size() ? a[k] : 0.0;
    const double pb = k < b.size() ? b[k] : 0.0;
    ca += pa;
    cb += pb;
    ma += static_cast<double>(k) * pa;
    mb += static_cast<double>(k) * pb;
    report.sup_cdf_distance = std::max(report.sup_cdf_distance,
                                       std::abs(ca - cb));
  }
  report.mean_diff = ma - mb;
  return report;
}

std::string fnv1a64_hex(const std::string& bytes) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace bestnet
