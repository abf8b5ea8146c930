// features.cpp - log-mel extraction
#include "tfish/features.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace tfish {

void FeatureConfig::validate() const {
  if (n_fft < 8 || (n_fft & (n_fft - 1)) != 0)
    throw std::invalid_argument("n_fft must be a power of two");
  if (hop <= 0 || hop > n_fft) throw std::invalid_argument("hop must be in (0, n_fft]");
  if (n_mels < 1) throw std::invalid_argument("n_mels must be positive");
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  if (fmin_hz < 0.0 || fmax_hz <= fmin_hz || fmax_hz > 0.5 * sample_rate_hz)
    throw std::invalid_argument("need 0 <= fmin < fmax <= Nyquist");
  if (target_frames < 1) throw std::invalid_argument("target_frames must be positive");
  if (log_floor <= 0.0) throw std::invalid_argument("log_floor must be positive");
}

double mel_scale(double f_hz) {
  if (f_hz < 0.0) throw std::invalid_argument("mel_scale: negative frequency");
  return 2595.0 * std::log10(1.0 + f_hz / 700.0);
}

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

// Triangle in mel space: rises lo->mid, falls mid->hi; evaluated at f (Hz).
double triangle(double f_hz, double lo, double mid, double hi) {
  const double m = mel_scale(f_hz);
  if (m <= lo || m >= hi) return 0.0;
  return m < mid ? (m - lo) / (mid - lo) : (hi - m) / (hi - mid);
}

}  // namespace

MelFilterbank build_mel_filterbank(const FeatureConfig& cfg) {
  cfg.validate();
  const int bins = cfg.n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(cfg.sample_rate_hz) / cfg.n_fft;
  const double mel_lo = mel_scale(cfg.fmin_hz);
  const double mel_hi = mel_scale(cfg.fmax_hz);

  std::vector<double> points(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    points[i] = mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1);

  MelFilterbank bank;
  bank.weights = Eigen::MatrixXd::Zero(cfg.n_mels, bins);
  bank.centers_hz.resize(cfg.n_mels);

  constexpr int kQuadSteps = 16;
  for (int m = 0; m < cfg.n_mels; ++m) {
    bank.centers_hz[m] = mel_to_hz(points[m + 1]);
    const double f_lo = mel_to_hz(points[m]);
    const double f_hi = mel_to_hz(points[m + 2]);
    const int k_lo = std::max(0, static_cast<int>(std::floor((f_lo - 0.5 * bin_hz) / bin_hz)));
    const int k_hi = std::min(bins - 1, static_cast<int>(std::ceil((f_hi + 0.5 * bin_hz) / bin_hz)));
    for (int k = k_lo; k <= k_hi; ++k) {
      // Midpoint-rule average of the triangle over the bin's frequency span.
      const double span_lo = std::max(0.0, k * bin_hz - 0.5 * bin_hz);
      const double span_hi = k * bin_hz + 0.5 * bin_hz;
      double acc = 0.0;
      for (int q = 0; q < kQuadSteps; ++q) {
        const double f = span_lo + (span_hi - span_lo) * (q + 0.5) / kQuadSteps;
        acc += triangle(f, points[m], points[m + 1], points[m + 2]);
      }
      bank.weights(m, k) = acc / kQuadSteps;
    }
    if (bank.weights.row(m).sum() <= 0.0)
      throw std::invalid_argument("mel filter " + std::to_string(m) +
                                  " is empty; too many bands for this FFT resolution");
  }
  return bank;
}

LogMelSpectrogram log_mel(const Waveform& x, const FeatureConfig& cfg) {
  return log_mel(x, cfg, build_mel_filterbank(cfg));
}

LogMelSpectrogram log_mel(const Waveform& x, const FeatureConfig& cfg,
                          const MelFilterbank& bank) {
  cfg.validate();
  if (x.sample_rate_hz != cfg.sample_rate_hz)
    throw std::invalid_argument("log_mel: waveform sample rate does not match config");
  const int n = x.size();
  if (n < cfg.n_fft) throw std::invalid_argument("log_mel: clip shorter than one FFT frame");

  // Reflect-padded centered framing: frame t covers input samples
  // [t*hop - n_fft/2, t*hop + n_fft/2); 1 + floor(n/hop) frames total.
  const int half = cfg.n_fft / 2;
  const int frames = 1 + n / cfg.hop;
  const int bins = cfg.n_fft / 2 + 1;

  std::vector<double> window(cfg.n_fft);
  for (int i = 0; i < cfg.n_fft; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / cfg.n_fft));

  Eigen::FFT<double> fft;
  Eigen::MatrixXd power(bins, frames);
  std::vector<double> frame(cfg.n_fft);
  std::vector<std::complex<double>> spectrum;
  for (int t = 0; t < frames; ++t) {
    const int start = t * cfg.hop - half;
    for (int i = 0; i < cfg.n_fft; ++i) {
      int idx = start + i;
      if (idx < 0) idx = -idx;                       // reflect at the left edge
      if (idx >= n) idx = 2 * (n - 1) - idx;         // and at the right edge
      frame[i] = x.samples[idx] * window[i];
    }
    fft.fwd(spectrum, frame);
    for (int k = 0; k < bins; ++k) power(k, t) = std::norm(spectrum[k]);
  }

  LogMelSpectrogram out;
  out.mel_centers_hz = bank.centers_hz;
  out.values = Eigen::MatrixXd::Constant(cfg.n_mels, cfg.target_frames,
                                         std::log(cfg.log_floor));
  // Center-crop when too long, right-pad at the floor when too short.
  const int copy = std::min(frames, cfg.target_frames);
  const int src0 = frames > cfg.target_frames ? (frames - cfg.target_frames) / 2 : 0;
  const Eigen::MatrixXd mel = bank.weights * power.middleCols(src0, copy);
  for (int t = 0; t < copy; ++t)
    for (int m = 0; m < cfg.n_mels; ++m)
      out.values(m, t) = std::log(std::max(mel(m, t), cfg.log_floor));
  return out;
}

}  // namespace tfish
