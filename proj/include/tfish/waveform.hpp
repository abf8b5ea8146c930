// waveform.hpp - sampled audio clips and deterministic test-signal synthesis
#pragma once

#include <cstdint>
#include <vector>

namespace tfish {

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 0;

  int size() const { return static_cast<int>(samples.size()); }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
  // Mean of x[n]^2 over the whole clip.
  double mean_power() const;
};

Waveform synth_sine(double freq_hz, double amplitude, double duration_s,
                    int sample_rate_hz);

// 50% duty cycle, +amplitude for the first half of each period.
Waveform synth_square(double freq_hz, double amplitude, double duration_s,
                      int sample_rate_hz);

// I.i.d. zero-mean Gaussian samples, deterministic for a given seed.
Waveform synth_white_noise(double std_dev, double duration_s, int sample_rate_hz,
                           uint64_t seed);

Waveform synth_silence(double duration_s, int sample_rate_hz);

}  // namespace tfish
