#include "clinx/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "clinx/errors.hpp"

namespace clinx {

std::string to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["model_hashes"] = m.model_hashes;
  j["kernel_backend"] = m.kernel_backend;
  j["elapsed_ms"] = m.elapsed_ms;
  if (!m.metrics.empty()) j["metrics"] = m.metrics;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& m, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest: " + tmp);
    out << to_json(m);
    if (!out) throw IoError("error writing manifest: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace clinx
