#include "bestnet/manifest.hpp"

#include <cstdio>
#include <ctime>

#include "bestnet/io.hpp"

namespace bestnet {

using nlohmann::json;

std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["command"] = manifest.command;
  j["parameters"] = manifest.parameters;
  j["input_hash"] = manifest.input_hash;
  j["output_paths"] = manifest.output_paths;
  j["seed"] = manifest.seed;
  j["timestamp"] = manifest.timestamp;
  write_text_file(path, j.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  RunManifest manifest;
  try {
    manifest.command = j.at("command").get<std::string>();
    manifest.parameters =
        j.at("parameters").get<std::map<std::string, std::string>>();
    manifest.input_hash = j.value("input_hash", "");
    manifest.output_paths = j.at("output_paths").get<std::vector<std::string>>();
    manifest.seed = j.value("seed", uint64_t{0});
    manifest.timestamp = j.value("timestamp", "");
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return manifest;
}

std::vector<std::string> manifest_argv(const RunManifest& manifest) {
  std::vector<std::string> argv;
  // command may be a subcommand chain like "gen star"
  size_t start = 0;
  while (start < manifest.command.size()) {
    size_t end = manifest.command.find(' ', start);
    if (end == std::string::npos) end = manifest.command.size();
    if (end > start) argv.push_back(manifest.command.substr(start, end - start));
    start = end + 1;
  }
  for (const auto& [key, value] : manifest.parameters) {
    argv.push_back("--" + key);
    // boolean flags are stored as "true" and take no value argument
    if (value != "true") argv.push_back(value);
  }
  return argv;
}

}  // namespace bestnet
