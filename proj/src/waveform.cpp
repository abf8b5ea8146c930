// waveform.cpp - test-signal synthesis
#include "tfish/waveform.hpp"

#include <cmath>
#include <stdexcept>

#include "tfish/rng.hpp"

namespace tfish {

namespace {

int sample_count(double duration_s, int sample_rate_hz) {
  if (duration_s <= 0.0) throw std::invalid_argument("duration must be positive");
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  const double exact = duration_s * sample_rate_hz;
  const auto n = static_cast<long long>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(n)) > 1e-6)
    throw std::invalid_argument("duration * sample_rate must be an integer sample count");
  return static_cast<int>(n);
}

}  // namespace

double Waveform::mean_power() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return acc / static_cast<double>(samples.size());
}

Waveform synth_sine(double freq_hz, double amplitude, double duration_s,
                    int sample_rate_hz) {
  const int n = sample_count(duration_s, sample_rate_hz);
  if (freq_hz <= 0.0 || freq_hz >= 0.5 * sample_rate_hz)
    throw std::invalid_argument("sine frequency must lie in (0, Nyquist)");
  Waveform w{std::vector<double>(n), sample_rate_hz};
  const double step = 2.0 * M_PI * freq_hz / sample_rate_hz;
  for (int i = 0; i < n; ++i) w.samples[i] = amplitude * std::sin(step * i);
  return w;
}

Waveform synth_square(double freq_hz, double amplitude, double duration_s,
                      int sample_rate_hz) {
  const int n = sample_count(duration_s, sample_rate_hz);
  if (freq_hz <= 0.0) throw std::invalid_argument("square frequency must be positive");
  Waveform w{std::vector<double>(n), sample_rate_hz};
  for (int i = 0; i < n; ++i) {
    const double phase = std::fmod(freq_hz * i / sample_rate_hz, 1.0);
    w.samples[i] = phase < 0.5 ? amplitude : -amplitude;
  }
  return w;
}

Waveform synth_white_noise(double std_dev, double duration_s, int sample_rate_hz,
                           uint64_t seed) {
  const int n = sample_count(duration_s, sample_rate_hz);
  if (std_dev < 0.0) throw std::invalid_argument("noise std_dev must be non-negative");
  Waveform w{std::vector<double>(n), sample_rate_hz};
  if (std_dev == 0.0) return w;
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, std_dev);
  for (int i = 0; i < n; ++i) w.samples[i] = gauss(rng);
  return w;
}

Waveform synth_silence(double duration_s, int sample_rate_hz) {
  const int n = sample_count(duration_s, sample_rate_hz);
  return Waveform{std::vector<double>(n, 0.0), sample_rate_hz};
}

}  // namespace tfish
