#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace minihls {

/// Memory images and scalar values at the kernel boundary. The same shape is
/// used for inputs and outputs and is what the `--vectors` JSON document
/// holds: `{"memories": {name: [ints]}, "scalars": {name: int}}`.
struct KernelIO {
  std::map<std::string, std::vector<int64_t>> memories;
  std::map<std::string, int64_t> scalars;

  bool operator==(const KernelIO &) const = default;
};

KernelIO parse_vectors_json(const std::string &text);
std::string to_json(const KernelIO &io);

}  // namespace minihls
