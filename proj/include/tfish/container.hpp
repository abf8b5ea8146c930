// container.hpp - the shared binary tensor file: magic "TFSH", version,
// JSON header (metadata + tensor manifest), then raw little-endian f32 data
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tfish {

struct TensorRecord {
  std::string name;
  std::vector<int64_t> dims;
  std::vector<float> data;  // row-major

  int64_t count() const {
    int64_t n = 1;
    for (int64_t d : dims) n *= d;
    return n;
  }
};

struct Container {
  uint32_t version = 1;
  nlohmann::json meta = nlohmann::json::object();  // free-form header fields
  std::vector<TensorRecord> tensors;

  const TensorRecord& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

// FNV-1a over the raw bytes of all tensors in order; used as model fingerprint.
uint64_t fnv1a_bytes(const void* data, size_t bytes, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace tfish
