// corruption.hpp - low-pass + noise channel simulation with SNR control
#pragma once

#include <cstdint>

#include "tfish/iir.hpp"
#include "tfish/waveform.hpp"

namespace tfish {

struct CorruptionSpec {
  int order = 4;             // Butterworth order, 1..4
  double cutoff_hz = 1000.0;
  double snr_db = 0.0;       // SNR between the low-passed signal and the noise
  uint64_t noise_seed = 0;
};

// signal + g * noise with g chosen so the measured SNR of the two addends is
// exactly snr_db. Rejects zero-power inputs (SNR undefined).
Waveform mix_at_snr(const Waveform& signal, const Waveform& noise, double snr_db);

// Butterworth low-pass, then seeded Gaussian noise mixed at the given SNR.
Waveform corrupt(const Waveform& x, const CorruptionSpec& spec);

}  // namespace tfish
