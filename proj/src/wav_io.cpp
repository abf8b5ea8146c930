// wav_io.cpp - mono PCM16 WAV
#include "tfish/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tfish {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
  char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
  os.write(b, 4);
}

void put_u16(std::ostream& os, uint16_t v) {
  char b[2] = {char(v), char(v >> 8)};
  os.write(b, 2);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

}  // namespace

void write_wav(const std::string& path, const Waveform& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  const uint32_t n = static_cast<uint32_t>(x.samples.size());
  const uint32_t data_bytes = n * 2;
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<uint32_t>(x.sample_rate_hz));
  put_u32(os, static_cast<uint32_t>(x.sample_rate_hz) * 2);
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (double s : x.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<int16_t>(std::lround(c * 32767.0));
    put_u16(os, static_cast<uint16_t>(q));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char tag[4];
  is.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw std::runtime_error("not a RIFF file: " + path);
  get_u32(is);
  is.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw std::runtime_error("not a WAVE file: " + path);

  Waveform w;
  uint16_t channels = 0, bits = 0;
  bool got_fmt = false;
  while (is.read(tag, 4)) {
    const uint32_t chunk = get_u32(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      const uint16_t fmt = get_u16(is);
      channels = get_u16(is);
      w.sample_rate_hz = static_cast<int>(get_u32(is));
      get_u32(is);
      get_u16(is);
      bits = get_u16(is);
      if (chunk > 16) is.seekg(chunk - 16, std::ios::cur);
      if (fmt != 1 || channels != 1 || bits != 16)
        throw std::runtime_error("only mono PCM16 supported: " + path);
      got_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!got_fmt) throw std::runtime_error("data chunk before fmt: " + path);
      const uint32_t n = chunk / 2;
      w.samples.resize(n);
      for (uint32_t i = 0; i < n; ++i)
        w.samples[i] = static_cast<int16_t>(get_u16(is)) / 32767.0;
      return w;
    } else {
      is.seekg(chunk + (chunk & 1), std::ios::cur);
    }
  }
  throw std::runtime_error("no data chunk: " + path);
}

}  // namespace tfish
