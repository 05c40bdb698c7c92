#pragma once

#include <cstdint>
#include <string>

#include "clinx/network.hpp"

namespace clinx {

// Model container: magic "CLNX", u16 format version, then length-prefixed
// sections. Weight tensors are row-major 32-bit little-endian reals, so the
// encoding is identical on every platform.
std::string save_model(const ModelBundle& model);
ModelBundle load_model(const std::string& bytes);

void save_model_file(const ModelBundle& model, const std::string& path);
ModelBundle load_model_file(const std::string& path);

// Rounds every trainable weight through f32. Trained bundles pass through
// this before saving, which makes load(save(m)) the identity on m.
void quantize_to_f32(ModelBundle& model);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace clinx
