#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bestnet/allocation.hpp"
#include "bestnet/heavy_traffic.hpp"
#include "bestnet/meanfield.hpp"
#include "bestnet/network.hpp"
#include "bestnet/simulator.hpp"

// JSON and CSV formats for the CLI and for reproducibility tests. All float
// formatting is round-trip exact ("%.17g" for CSV, nlohmann's shortest
// round-trip for JSON) so identical runs produce identical bytes.

namespace bestnet {

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);
void to_json(nlohmann::json& j, const LoadReport& report);
void to_json(nlohmann::json& j, const Allocation& alloc);
void to_json(nlohmann::json& j, const SimStats& stats);
void to_json(nlohmann::json& j, const MeanFieldSolution& solution);
void to_json(nlohmann::json& j, const AsymStarSolution& solution);

// Parse + validate. Throws ValidationError on unreadable or malformed input.
NetworkSpec load_network_spec(const std::string& path);
void save_network_spec(const NetworkSpec& spec, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);  // ValidationError if missing

// "k,prob,cdf" rows over the occupancy distribution.
void write_occupancy_csv(const SimStats& stats, const std::string& path);
// "k,alpha,u,cdf" rows; u[0] written as 0.
void write_meanfield_csv(const MeanFieldSolution& solution,
                         const std::string& path);
// "z,c,v,v_prime" rows over the integration grid.
void write_trajectory_csv(const OdeSolution& solution, const std::string& path);

// Distribution read back from any CSV with a "k" column and a "prob" or
// "alpha" column (header required). Returns the pmf indexed by k.
std::vector<double> read_distribution_csv(const std::string& path);

struct DistanceReport {
  double sup_cdf_distance = 0.0;
  double mean_diff = 0.0;  // mean(a) - mean(b)
};

// Sup distance between the CDFs of two pmfs (shorter one zero-padded) plus
// the difference of their means.
DistanceReport distribution_distance(const std::vector<double>& a,
                                     const std::vector<double>& b);

// FNV-1a over raw bytes, hex-encoded; used to fingerprint input files in run
// manifests.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace bestnet
