#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "emobench/tensor.hpp"

namespace emobench {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Parameter checkpoint, little-endian binary:
//   magic "PATN" | version u32 | tensor count u32
//   per tensor: name length u32 | UTF-8 name | rank u32 | dims u64[rank]
//               | payload f64[numel]
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const NamedTensors& tensors);
NamedTensors load_checkpoint(const std::string& path);

// FNV-1a 64 over raw bytes; used for vocabulary/config compatibility hashes.
std::uint64_t fnv1a64(const void* bytes, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string hash_hex(std::uint64_t h);

}  // namespace emobench
