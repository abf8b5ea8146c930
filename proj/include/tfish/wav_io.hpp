// wav_io.hpp - minimal mono PCM16 WAV read/write for debugging dumps
#pragma once

#include <string>

#include "tfish/waveform.hpp"

namespace tfish {

// Samples clipped to [-1, 1] and quantized to 16-bit little-endian PCM.
void write_wav(const std::string& path, const Waveform& x);

Waveform read_wav(const std::string& path);

}  // namespace tfish
