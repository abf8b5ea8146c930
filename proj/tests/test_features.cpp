// test_features.cpp - mel scale, filterbank construction, log-mel front end
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tfish/features.hpp"

using namespace tfish;

TEST_CASE("mel scale anchor points and monotonicity") {
  CHECK(mel_scale(0.0) == 0.0);
  CHECK(mel_scale(700.0) == doctest::Approx(2595.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(mel_scale(700.0) == doctest::Approx(781.17).epsilon(1e-5));
  double prev = -1.0;
  for (double f = 0.0; f <= 8000.0; f += 37.0) {
    const double m = mel_scale(f);
    CHECK(m > prev);
    prev = m;
  }
  CHECK_THROWS_AS(mel_scale(-1.0), std::invalid_argument);
  CHECK(mel_to_hz(mel_scale(1234.5)) == doctest::Approx(1234.5).epsilon(1e-9));
}

TEST_CASE("filterbank: positive rows, equally spaced centers, in-range") {
  FeatureConfig cfg;
  const MelFilterbank bank = build_mel_filterbank(cfg);
  REQUIRE(bank.weights.rows() == 128);
  REQUIRE(bank.weights.cols() == 257);
  for (int m = 0; m < 128; ++m) CHECK(bank.weights.row(m).sum() > 0.0);

  const double step = mel_scale(cfg.fmax_hz) / 129.0;  // fmin = 0
  for (int m = 0; m < 128; ++m)
    CHECK(mel_scale(bank.centers_hz[m]) == doctest::Approx((m + 1) * step).epsilon(1e-9));

  CHECK(bank.centers_hz.front() > 0.0);
  CHECK(bank.centers_hz.front() < bank.centers_hz.back());
  CHECK(bank.centers_hz.back() <= 8000.0);
  for (int m = 1; m < 128; ++m) CHECK(bank.centers_hz[m] > bank.centers_hz[m - 1]);
}

TEST_CASE("filterbank rejects invalid configs") {
  FeatureConfig cfg;
  cfg.fmax_hz = 9000.0;  // above Nyquist
  CHECK_THROWS_AS(build_mel_filterbank(cfg), std::invalid_argument);
  cfg = FeatureConfig{};
  cfg.n_fft = 500;  // not a power of two
  CHECK_THROWS_AS(build_mel_filterbank(cfg), std::invalid_argument);
  cfg = FeatureConfig{};
  cfg.fmin_hz = 4000.0;
  cfg.fmax_hz = 3000.0;
  CHECK_THROWS_AS(build_mel_filterbank(cfg), std::invalid_argument);
}

TEST_CASE("silence maps to the exact log floor everywhere") {
  FeatureConfig cfg;
  const LogMelSpectrogram spec = log_mel(synth_silence(5.0, 16000), cfg);
  REQUIRE(spec.values.rows() == 128);
  REQUIRE(spec.values.cols() == 208);
  const double floor = std::log(cfg.log_floor);
  for (int m = 0; m < spec.values.rows(); ++m)
    for (int t = 0; t < spec.values.cols(); ++t) REQUIRE(spec.values(m, t) == floor);
}

TEST_CASE("1 kHz sine peaks at the mel row whose center is nearest 1 kHz") {
  FeatureConfig cfg;
  const LogMelSpectrogram spec = log_mel(synth_sine(1000.0, 1.0, 5.0, 16000), cfg);

  // Brute-force oracle: scan all centers for the closest one.
  int nearest = 0;
  for (int m = 1; m < 128; ++m)
    if (std::abs(1000.0 - spec.mel_centers_hz[m]) <
        std::abs(1000.0 - spec.mel_centers_hz[nearest]))
      nearest = m;

  const Eigen::VectorXd profile = spec.values.rowwise().mean();
  int peak = 0;
  for (int m = 1; m < 128; ++m)
    if (profile(m) > profile(peak)) peak = m;
  CHECK(peak == nearest);
}

TEST_CASE("doubling the amplitude adds log(4) to every above-floor cell") {
  FeatureConfig cfg;
  const LogMelSpectrogram a = log_mel(synth_sine(432.0, 0.25, 5.0, 16000), cfg);
  const LogMelSpectrogram b = log_mel(synth_sine(432.0, 0.5, 5.0, 16000), cfg);
  const double floor = std::log(cfg.log_floor);
  const double log4 = std::log(4.0);
  int checked = 0;
  for (int m = 0; m < a.values.rows(); ++m)
    for (int t = 0; t < a.values.cols(); ++t) {
      if (a.values(m, t) == floor || b.values(m, t) == floor) continue;
      REQUIRE(std::abs(b.values(m, t) - a.values(m, t) - log4) < 1e-6);
      ++checked;
    }
  CHECK(checked > 1000);
}

TEST_CASE("shape contract holds for any clip length of at least one frame") {
  FeatureConfig cfg;
  for (double dur : {0.033, 0.5, 5.0, 6.5}) {
    const LogMelSpectrogram spec = log_mel(synth_white_noise(1.0, dur, 16000, 5), cfg);
    CHECK(spec.values.rows() == 128);
    CHECK(spec.values.cols() == 208);
  }
  Waveform tiny{std::vector<double>(256, 0.1), 16000};
  CHECK_THROWS_AS(log_mel(tiny, cfg), std::invalid_argument);
}

TEST_CASE("louder input never decreases a mel cell") {
  FeatureConfig cfg;
  Waveform x = synth_white_noise(0.3, 5.0, 16000, 17);
  Waveform y = x;
  for (double& s : y.samples) s *= 2.0;
  const LogMelSpectrogram a = log_mel(x, cfg);
  const LogMelSpectrogram b = log_mel(y, cfg);
  for (int m = 0; m < a.values.rows(); ++m)
    for (int t = 0; t < a.values.cols(); ++t) REQUIRE(b.values(m, t) >= a.values(m, t));
}

TEST_CASE("shifting the input by one hop shifts interior columns by one") {
  FeatureConfig cfg;
  const Waveform long_noise = synth_white_noise(1.0, 80385.0 / 16000.0, 16000, 23);
  Waveform x1{std::vector<double>(long_noise.samples.begin(), long_noise.samples.begin() + 80000),
              16000};
  Waveform x2{std::vector<double>(long_noise.samples.begin() + 385, long_noise.samples.end()),
              16000};
  const LogMelSpectrogram a = log_mel(x1, cfg);
  const LogMelSpectrogram b = log_mel(x2, cfg);
  for (int t = 2; t < 206; ++t)
    for (int m = 0; m < 128; ++m)
      REQUIRE(b.values(m, t) ==
              doctest::Approx(a.values(m, t + 1)).epsilon(1e-5));
}

TEST_CASE("log_mel rejects a sample-rate mismatch") {
  FeatureConfig cfg;
  CHECK_THROWS_AS(log_mel(synth_sine(440.0, 1.0, 1.0, 8000), cfg), std::invalid_argument);
}
