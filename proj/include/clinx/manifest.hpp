#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace clinx {

// Everything needed to reproduce a run bit-for-bit: the command, the full
// config snapshot including the seed, input paths, output hashes and the
// kernel backend that executed the arithmetic. Written atomically at run end.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> model_hashes;  // path -> fnv1a64 hex
  std::string kernel_backend;
  std::int64_t elapsed_ms = 0;
  std::string metrics;  // machine-readable metric lines, when the run has any
};

std::string to_json(const RunManifest& m);

// write-to-temp + rename
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace clinx
