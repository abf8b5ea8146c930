// container.cpp
#include "tfish/container.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tfish {

const TensorRecord& Container::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw std::runtime_error("container has no tensor named '" + name + "'");
}

bool Container::has_tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
  os.write(b, 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("container truncated");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

}  // namespace

void write_container(const std::string& path, const Container& c) {
  nlohmann::json header = c.meta;
  nlohmann::json manifest = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& t : c.tensors) {
    if (t.count() != static_cast<int64_t>(t.data.size()))
      throw std::invalid_argument("tensor '" + t.name + "' dims do not match data size");
    manifest.push_back({{"name", t.name}, {"dims", t.dims}, {"offset", offset}});
    offset += t.data.size() * sizeof(float);
  }
  header["tensors"] = std::move(manifest);
  const std::string header_str = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write("TFSH", 4);
  put_u32(os, c.version);
  put_u32(os, static_cast<uint32_t>(header_str.size()));
  os.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& t : c.tensors)
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  if (!os) throw std::runtime_error("write failed: " + path);
}

Container read_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TFSH", 4) != 0)
    throw std::runtime_error("not a TFSH container: " + path);

  Container c;
  c.version = get_u32(is);
  const uint32_t header_len = get_u32(is);
  std::string header_str(header_len, '\0');
  is.read(header_str.data(), header_len);
  if (!is) throw std::runtime_error("container truncated: " + path);

  nlohmann::json header = nlohmann::json::parse(header_str);
  const std::streampos data_start = is.tellg();
  for (const auto& entry : header.at("tensors")) {
    TensorRecord t;
    t.name = entry.at("name").get<std::string>();
    t.dims = entry.at("dims").get<std::vector<int64_t>>();
    const auto offset = entry.at("offset").get<uint64_t>();
    t.data.resize(static_cast<size_t>(t.count()));
    is.seekg(data_start + static_cast<std::streamoff>(offset));
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!is) throw std::runtime_error("container tensor truncated: " + path);
    c.tensors.push_back(std::move(t));
  }
  header.erase("tensors");
  c.meta = std::move(header);
  return c;
}

uint64_t fnv1a_bytes(const void* data, size_t bytes, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace tfish
