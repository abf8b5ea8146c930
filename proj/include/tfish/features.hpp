// features.hpp - Hann STFT -> mel filterbank -> log-mel front end
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tfish/waveform.hpp"

namespace tfish {

struct FeatureConfig {
  int n_fft = 512;          // power of two
  int hop = 385;
  int n_mels = 128;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  int target_frames = 208;  // time axis is cropped/padded to exactly this
  double log_floor = 1e-10;
  int sample_rate_hz = 16000;

  void validate() const;
};

struct LogMelSpectrogram {
  Eigen::MatrixXd values;              // n_mels x target_frames, natural log power
  std::vector<double> mel_centers_hz;  // strictly increasing
};

// HTK mel scale.
double mel_scale(double f_hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  Eigen::MatrixXd weights;         // n_mels x (n_fft/2 + 1)
  std::vector<double> centers_hz;  // inverse-mel of the equally spaced centers
};

// Triangular filters with centers equally spaced on the mel axis. Weights are
// the triangle averaged over each FFT bin's frequency interval, so narrow
// low-frequency filters that fall between bin centers still collect energy.
MelFilterbank build_mel_filterbank(const FeatureConfig& cfg);

LogMelSpectrogram log_mel(const Waveform& x, const FeatureConfig& cfg);

// Same, with a prebuilt filterbank (bulk extraction avoids rebuilding it).
LogMelSpectrogram log_mel(const Waveform& x, const FeatureConfig& cfg,
                          const MelFilterbank& bank);

}  // namespace tfish
