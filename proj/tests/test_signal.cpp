// test_signal.cpp - synthesis, Butterworth design/filtering, SNR mixing
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "tfish/corruption.hpp"
#include "tfish/iir.hpp"
#include "tfish/waveform.hpp"

using namespace tfish;

namespace {

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

// Bilinear-exact Butterworth low-pass magnitude at f.
double analytic_magnitude(int order, double cutoff_hz, double fs, double f) {
  const double ratio = std::tan(M_PI * f / fs) / std::tan(M_PI * cutoff_hz / fs);
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * order));
}

// Naive DFT magnitude of a real sequence at one frequency (test-side oracle).
double dft_magnitude(const std::vector<double>& x, double freq_hz, double fs) {
  std::complex<double> acc(0.0, 0.0);
  for (size_t n = 0; n < x.size(); ++n)
    acc += x[n] * std::polar(1.0, -2.0 * M_PI * freq_hz * n / fs);
  return std::abs(acc);
}

}  // namespace

TEST_CASE("sine synthesis basics") {
  const Waveform w = synth_sine(1000.0, 1.0, 5.0, 16000);
  CHECK(w.size() == 80000);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.mean_power() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("sine at a quarter of the sample rate cycles 0,1,0,-1") {
  const Waveform w = synth_sine(4000.0, 1.0, 0.01, 16000);
  for (int i = 0; i + 3 < w.size(); i += 4) {
    CHECK(std::abs(w.samples[i]) < 1e-12);
    CHECK(w.samples[i + 1] == doctest::Approx(1.0));
    CHECK(std::abs(w.samples[i + 2]) < 1e-11);
    CHECK(w.samples[i + 3] == doctest::Approx(-1.0));
  }
}

TEST_CASE("sine rejects frequencies at or above Nyquist") {
  CHECK_THROWS_AS(synth_sine(8000.0, 1.0, 1.0, 16000), std::invalid_argument);
  CHECK_THROWS_AS(synth_sine(9000.0, 1.0, 1.0, 16000), std::invalid_argument);
  CHECK_THROWS_AS(synth_sine(0.0, 1.0, 1.0, 16000), std::invalid_argument);
}

TEST_CASE("square wave: one rising edge per period, mean power = A^2") {
  const Waveform w = synth_square(1.0, 1.0, 5.0, 16000);
  int rising = 0;
  for (int i = 0; i < w.size(); ++i)
    if (w.samples[i] > 0.0 && (i == 0 || w.samples[i - 1] < 0.0)) ++rising;
  CHECK(rising == 5);
  CHECK(w.mean_power() == doctest::Approx(1.0));

  const Waveform one = synth_square(1.0, 1.0, 1.0, 16000);
  for (int i = 0; i < 8000; ++i) REQUIRE(one.samples[i] == 1.0);
  for (int i = 8000; i < 16000; ++i) REQUIRE(one.samples[i] == -1.0);

  const Waveform loud = synth_square(3.0, 2.5, 1.0, 16000);
  CHECK(loud.mean_power() == doctest::Approx(2.5 * 2.5));
}

TEST_CASE("white noise is deterministic per seed and has the right variance") {
  const Waveform a = synth_white_noise(1.0, 5.0, 16000, 7);
  const Waveform b = synth_white_noise(1.0, 5.0, 16000, 7);
  REQUIRE(a.samples == b.samples);  // byte-identical

  const Waveform c = synth_white_noise(1.0, 5.0, 16000, 8);
  CHECK(a.samples != c.samples);

  // Chi-square bound: var of the sample variance at n = 80000 is ~2/n, so
  // +-0.03 is ~6 sigma.
  for (uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    const Waveform w = synth_white_noise(1.0, 5.0, 16000, seed);
    double mean = 0.0;
    for (double s : w.samples) mean += s;
    mean /= w.size();
    double var = 0.0;
    for (double s : w.samples) var += (s - mean) * (s - mean);
    var /= w.size();
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
  }

  const Waveform z = synth_white_noise(0.0, 1.0, 16000, 3);
  for (double s : z.samples) REQUIRE(s == 0.0);
}

TEST_CASE("silence is exactly zero and stays zero through any filter") {
  const Waveform s = synth_silence(5.0, 16000);
  CHECK(s.size() == 80000);
  CHECK(s.mean_power() == 0.0);
  for (double v : s.samples) REQUIRE(v == 0.0);
  for (int order = 1; order <= 4; ++order) {
    const Waveform y = apply_filter(design_butterworth_lowpass(order, 1234.5, 16000), s);
    for (double v : y.samples) REQUIRE(v == 0.0);
  }
}

TEST_CASE("butterworth: -3.01 dB at cutoff for every order") {
  for (int order = 1; order <= 4; ++order) {
    const IirFilter f = design_butterworth_lowpass(order, 1000.0, 16000);
    CHECK(static_cast<int>(f.sections.size()) == (order + 1) / 2);
    const double mag_db = to_db(std::pow(filter_magnitude(f, 1000.0), 2.0));
    CHECK(std::abs(mag_db + 3.0103) < 0.1);
  }
}

TEST_CASE("butterworth order 4: analog-prototype rolloff at twice the cutoff") {
  // With cutoff << Nyquist the bilinear warp is negligible; |H(2 fc)| should
  // be close to -10 log10(1 + 2^8) = -24.10 dB.
  const IirFilter f = design_butterworth_lowpass(4, 200.0, 16000);
  const double mag_db = to_db(std::pow(filter_magnitude(f, 400.0), 2.0));
  CHECK(std::abs(mag_db - (-24.0977)) < 0.5);
}

TEST_CASE("butterworth poles stay inside the unit circle (oracle: quadratic roots)") {
  for (int order = 1; order <= 4; ++order)
    for (double cutoff : {20.0, 150.0, 1000.0, 3000.0, 7000.0, 7990.0}) {
      const IirFilter f = design_butterworth_lowpass(order, cutoff, 16000);
      for (const SosSection& s : f.sections) {
        // Independent root computation from the published coefficients.
        if (s.a2 == 0.0) {
          CHECK(std::abs(-s.a1) < 1.0 - 1e-9);
        } else {
          const std::complex<double> disc =
              std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
          const std::complex<double> r1 = (-s.a1 + disc) / 2.0;
          const std::complex<double> r2 = (-s.a1 - disc) / 2.0;
          CHECK(std::abs(r1) < 1.0 - 1e-9);
          CHECK(std::abs(r2) < 1.0 - 1e-9);
        }
      }
      // Library helper agrees.
      for (const auto& p : filter_poles(f)) CHECK(std::abs(p) < 1.0 - 1e-9);
    }
}

TEST_CASE("magnitude response matches the bilinear-exact analytic curve") {
  for (int order = 1; order <= 4; ++order) {
    const IirFilter f = design_butterworth_lowpass(order, 1000.0, 16000);
    double worst_db = 0.0;
    for (int i = 1; i <= 400; ++i) {
      const double freq = 0.45 * 16000.0 * i / 401.0;
      const double got = filter_magnitude(f, freq);
      const double want = analytic_magnitude(order, 1000.0, 16000.0, freq);
      worst_db = std::max(worst_db, std::abs(to_db(got * got) - to_db(want * want)));
    }
    CHECK(worst_db < 0.1);
  }
}

TEST_CASE("designed filter rejects invalid parameters") {
  CHECK_THROWS_AS(design_butterworth_lowpass(0, 1000.0, 16000), std::invalid_argument);
  CHECK_THROWS_AS(design_butterworth_lowpass(5, 1000.0, 16000), std::invalid_argument);
  CHECK_THROWS_AS(design_butterworth_lowpass(2, 0.0, 16000), std::invalid_argument);
  CHECK_THROWS_AS(design_butterworth_lowpass(2, 8000.0, 16000), std::invalid_argument);
}

TEST_CASE("1 kHz sine through an order-1 filter at 1 kHz settles near -3 dB") {
  const Waveform x = synth_sine(1000.0, 1.0, 2.0, 16000);
  const Waveform y = apply_filter(design_butterworth_lowpass(1, 1000.0, 16000), x);
  double peak = 0.0;
  for (int i = 16000; i < y.size(); ++i) peak = std::max(peak, std::abs(y.samples[i]));
  CHECK(peak == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("impulse response spectrum matches the analytic magnitude (DFT oracle)") {
  for (int order : {1, 4}) {
    Waveform impulse{std::vector<double>(4096, 0.0), 16000};
    impulse.samples[0] = 1.0;
    const Waveform h = apply_filter(design_butterworth_lowpass(order, 1000.0, 16000), impulse);
    for (int i = 1; i <= 20; ++i) {
      const double freq = 3900.0 * i / 20.0;  // below Nyquist/2
      const double got = dft_magnitude(h.samples, freq, 16000.0);
      const double want = analytic_magnitude(order, 1000.0, 16000.0, freq);
      CHECK(std::abs(to_db(got * got) - to_db(want * want)) < 0.5);
    }
  }
}

TEST_CASE("apply_filter rejects a sample-rate mismatch") {
  const IirFilter f = design_butterworth_lowpass(2, 1000.0, 16000);
  const Waveform x = synth_sine(440.0, 1.0, 0.1, 8000);
  CHECK_THROWS_AS(apply_filter(f, x), std::invalid_argument);
}

TEST_CASE("snr mixing: unity gain for equal-power inputs at 0 dB") {
  const Waveform s = synth_sine(500.0, 1.0, 1.0, 16000);
  const Waveform m = mix_at_snr(s, s, 0.0);
  for (int i = 0; i < s.size(); ++i)
    REQUIRE(m.samples[i] == doctest::Approx(2.0 * s.samples[i]).epsilon(1e-12));
}

TEST_CASE("snr mixing: -10 dB scales noise power to ten times the signal power") {
  const Waveform s = synth_sine(500.0, 1.0, 1.0, 16000);
  const Waveform n = synth_white_noise(1.0, 1.0, 16000, 21);
  const Waveform m = mix_at_snr(s, n, -10.0);
  Waveform scaled = m;
  for (int i = 0; i < m.size(); ++i) scaled.samples[i] = m.samples[i] - s.samples[i];
  const double ratio_db = to_db(scaled.mean_power() / s.mean_power());
  CHECK(std::abs(ratio_db - 10.0) < 0.1);
}

TEST_CASE("snr mixing round-trip is exact to 0.01 dB on random pairs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> snr(-30.0, 30.0);
  std::uniform_real_distribution<double> amp(0.01, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Waveform s = synth_white_noise(amp(rng), 0.25, 16000, rng());
    const Waveform n = synth_white_noise(amp(rng), 0.25, 16000, rng());
    const double want = snr(rng);
    const Waveform m = mix_at_snr(s, n, want);
    Waveform scaled_noise = m;
    for (int i = 0; i < m.size(); ++i) scaled_noise.samples[i] -= s.samples[i];
    const double got = to_db(s.mean_power() / scaled_noise.mean_power());
    REQUIRE(std::abs(got - want) < 0.01);
  }
}

TEST_CASE("snr mixing rejects zero-power inputs") {
  const Waveform s = synth_sine(500.0, 1.0, 1.0, 16000);
  const Waveform z = synth_silence(1.0, 16000);
  CHECK_THROWS_AS(mix_at_snr(z, s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mix_at_snr(s, z, 0.0), std::invalid_argument);
}

TEST_CASE("corrupt is deterministic and respects its spec") {
  const Waveform x = synth_sine(440.0, 0.5, 1.0, 16000);
  const CorruptionSpec spec{2, 1000.0, -10.0, 1234};
  const Waveform a = corrupt(x, spec);
  const Waveform b = corrupt(x, spec);
  REQUIRE(a.samples == b.samples);

  // At +100 dB the noise term is negligible: power ratio 1e10 means the
  // relative L2 error against the plain low-passed signal is ~1e-5.
  const Waveform lp = apply_filter(design_butterworth_lowpass(2, 1000.0, 16000), x);
  const Waveform quiet = corrupt(x, CorruptionSpec{2, 1000.0, 100.0, 1234});
  double num = 0.0, den = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    num += (quiet.samples[i] - lp.samples[i]) * (quiet.samples[i] - lp.samples[i]);
    den += lp.samples[i] * lp.samples[i];
  }
  CHECK(std::sqrt(num / den) < 1e-4);

  CHECK_THROWS_AS(corrupt(synth_silence(1.0, 16000), spec), std::invalid_argument);
}
