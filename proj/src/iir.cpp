// iir.cpp - Butterworth design via prewarped bilinear transform
#include "tfish/iir.hpp"

#include <cmath>
#include <stdexcept>

namespace tfish {

IirFilter design_butterworth_lowpass(int order, double cutoff_hz, int sample_rate_hz) {
  if (order < 1 || order > 4) throw std::invalid_argument("filter order must be in [1,4]");
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  if (cutoff_hz <= 0.0 || cutoff_hz >= 0.5 * sample_rate_hz)
    throw std::invalid_argument("cutoff must lie in (0, Nyquist)");

  // Analog prototype poles on the circle of radius K = tan(pi fc / fs); the
  // bilinear map s -> (z-1)/(z+1) then lands the -3 dB point exactly on fc.
  const double warped = std::tan(M_PI * cutoff_hz / sample_rate_hz);
  std::vector<std::complex<double>> analog_poles(order);
  for (int k = 0; k < order; ++k) {
    const double theta = M_PI * (2.0 * k + order + 1.0) / (2.0 * order);
    analog_poles[k] = warped * std::complex<double>(std::cos(theta), std::sin(theta));
  }

  IirFilter filter;
  filter.order = order;
  filter.cutoff_hz = cutoff_hz;
  filter.sample_rate_hz = sample_rate_hz;

  // Pole k and pole order-1-k are conjugates; pair them into biquads, with a
  // single real-pole section left over for odd orders. All zeros sit at z=-1;
  // each section is scaled to unity DC gain.
  const int pairs = order / 2;
  for (int k = 0; k < pairs; ++k) {
    const std::complex<double> pa = analog_poles[k];
    const std::complex<double> pz = (1.0 + pa) / (1.0 - pa);
    SosSection s;
    s.a1 = -2.0 * pz.real();
    s.a2 = std::norm(pz);
    const double gain = (1.0 + s.a1 + s.a2) / 4.0;
    s.b0 = gain;
    s.b1 = 2.0 * gain;
    s.b2 = gain;
    filter.sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double pa = analog_poles[order / 2].real();  // the real pole
    const double pz = (1.0 + pa) / (1.0 - pa);
    SosSection s;
    s.a1 = -pz;
    s.a2 = 0.0;
    const double gain = (1.0 + s.a1) / 2.0;
    s.b0 = gain;
    s.b1 = gain;
    s.b2 = 0.0;
    filter.sections.push_back(s);
  }
  return filter;
}

Waveform apply_filter(const IirFilter& filter, const Waveform& x) {
  if (filter.sample_rate_hz != x.sample_rate_hz)
    throw std::invalid_argument("filter/waveform sample-rate mismatch");
  Waveform y = x;
  for (const SosSection& s : filter.sections) {
    double z1 = 0.0, z2 = 0.0;  // direct form II transposed state
    for (double& v : y.samples) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

double filter_magnitude(const IirFilter& filter, double freq_hz) {
  const double omega = 2.0 * M_PI * freq_hz / filter.sample_rate_hz;
  const std::complex<double> zinv = std::polar(1.0, -omega);
  std::complex<double> h(1.0, 0.0);
  for (const SosSection& s : filter.sections) {
    const std::complex<double> num = s.b0 + (s.b1 + s.b2 * zinv) * zinv;
    const std::complex<double> den = 1.0 + (s.a1 + s.a2 * zinv) * zinv;
    h *= num / den;
  }
  return std::abs(h);
}

std::vector<std::complex<double>> filter_poles(const IirFilter& filter) {
  std::vector<std::complex<double>> poles;
  for (const SosSection& s : filter.sections) {
    if (s.a2 == 0.0) {
      poles.emplace_back(-s.a1, 0.0);
      continue;
    }
    const std::complex<double> disc = std::sqrt(std::complex<double>(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    poles.push_back((-s.a1 + disc) / 2.0);
    poles.push_back((-s.a1 - disc) / 2.0);
  }
  return poles;
}

}  // namespace tfish
