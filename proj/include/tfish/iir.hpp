// iir.hpp - Butterworth low-pass design and second-order-section filtering
#pragma once

#include <complex>
#include <vector>

#include "tfish/waveform.hpp"

namespace tfish {

// One biquad with a0 normalized to 1.
struct SosSection {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct IirFilter {
  std::vector<SosSection> sections;  // ceil(order/2) entries
  int order = 0;
  double cutoff_hz = 0.0;
  int sample_rate_hz = 0;
};

// Digital Butterworth low-pass: analog prototype, cutoff-prewarped bilinear
// transform, factored into second-order sections with unity DC gain.
IirFilter design_butterworth_lowpass(int order, double cutoff_hz, int sample_rate_hz);

// Cascaded direct-form-II-transposed evaluation, zero initial state.
Waveform apply_filter(const IirFilter& filter, const Waveform& x);

// |H(e^{j 2 pi f / fs})| of the full cascade.
double filter_magnitude(const IirFilter& filter, double freq_hz);

// z-plane poles of every section (quadratic roots of the denominators).
std::vector<std::complex<double>> filter_poles(const IirFilter& filter);

}  // namespace tfish
