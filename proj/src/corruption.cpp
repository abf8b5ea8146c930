// corruption.cpp - SNR mixing and the full low-pass + noise channel
#include "tfish/corruption.hpp"

#include <cmath>
#include <stdexcept>

namespace tfish {

Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db) {
  if (signal.sample_rate_hz != noise.sample_rate_hz)
    throw std::invalid_argument("mix_at_snr: sample-rate mismatch");
  if (signal.samples.size() != noise.samples.size())
    throw std::invalid_argument("mix_at_snr: length mismatch");
  const double p_signal = signal.mean_power();
  const double p_noise = noise.mean_power();
  if (p_signal <= 0.0) throw std::invalid_argument("mix_at_snr: zero-power signal");
  if (p_noise <= 0.0) throw std::invalid_argument("mix_at_snr: zero-power noise");
  const double gain = std::sqrt(p_signal / (p_noise * std::pow(10.0, snr_db / 10.0)));
  Waveform out = signal;
  for (size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += gain * noise.samples[i];
  return out;
}

Waveform corrupt(const Waveform& x, const CorruptionSpec& spec) {
  const IirFilter filter =
      design_butterworth_lowpass(spec.order, spec.cutoff_hz, x.sample_rate_hz);
  const Waveform lowpassed = apply_filter(filter, x);
  const Waveform noise =
      synth_white_noise(1.0, x.duration_s(), x.sample_rate_hz, spec.noise_seed);
  return mix_at_snr(lowpassed, noise, spec.snr_db);
}

}  // namespace tfish
