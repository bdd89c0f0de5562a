#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bestnet {

// Written next to every CLI output. parameters holds the exact flag values
// as strings so a rerun reconstructs the original command line verbatim and
// reproduces the outputs byte for byte (the manifest's own timestamp is the
// only thing that may differ between a run and its rerun).
struct RunManifest {
  std::string command;  // subcommand path, e.g. "gen star"
  std::map<std::string, std::string> parameters;
  std::string input_hash;  // fnv1a64 of the input spec file, "" if none
  std::vector<std::string> output_paths;
  uint64_t seed = 0;
  std::string timestamp;  // ISO 8601 UTC
};

std::string utc_timestamp_now();

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// Command line (without argv[0]) that reproduces the run: subcommand tokens,
// then "--key value" per parameter ("true" valued keys emit just the flag).
std::vector<std::string> manifest_argv(const RunManifest& manifest);

}  // namespace bestnet
