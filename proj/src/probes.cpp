// probes.cpp
#include "tfish/probes.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tfish {

namespace {
constexpr double kDegenerateVariance = 1e-12;
}

double time_differentiation(const ActivationTensor& x) {
  if (x.layout != Layout::Unfolded)
    throw std::invalid_argument("time_differentiation: tensor must be unfolded");
  if (x.time_bins < 2) throw std::invalid_argument("time_differentiation: need T' >= 2");
  double acc = 0.0;
  for (int b = 0; b < x.batch; ++b)
    for (int d = 0; d < x.dim; ++d)
      for (int f = 0; f < x.freq_bins; ++f)
        for (int t = 0; t + 1 < x.time_bins; ++t)
          acc += std::abs(static_cast<double>(x.at(b, d, f, t)) - x.at(b, d, f, t + 1));
  return acc / static_cast<double>(x.size());
}

double freq_differentiation(const ActivationTensor& x) {
  if (x.layout != Layout::Unfolded)
    throw std::invalid_argument("freq_differentiation: tensor must be unfolded");
  if (x.freq_bins < 2) throw std::invalid_argument("freq_differentiation: need F' >= 2");
  double acc = 0.0;
  for (int b = 0; b < x.batch; ++b)
    for (int d = 0; d < x.dim; ++d)
      for (int f = 0; f + 1 < x.freq_bins; ++f)
        for (int t = 0; t < x.time_bins; ++t)
          acc += std::abs(static_cast<double>(x.at(b, d, f, t)) - x.at(b, d, f + 1, t));
  return acc / static_cast<double>(x.size());
}

std::optional<double> kurtosis_metric(const ActivationTensor& x) {
  if (x.layout != Layout::Unfolded)
    throw std::invalid_argument("kurtosis_metric: tensor must be unfolded");
  if (x.time_bins < 4) throw std::invalid_argument("kurtosis_metric: need T' >= 4");
  const double n = x.time_bins;
  double acc = 0.0;
  int64_t rows = 0;
  for (int b = 0; b < x.batch; ++b)
    for (int d = 0; d < x.dim; ++d)
      for (int f = 0; f < x.freq_bins; ++f) {
        double mean = 0.0;
        for (int t = 0; t < x.time_bins; ++t) mean += x.at(b, d, f, t);
        mean /= n;
        double m2 = 0.0, m4 = 0.0;
        for (int t = 0; t < x.time_bins; ++t) {
          const double dev = x.at(b, d, f, t) - mean;
          const double dev2 = dev * dev;
          m2 += dev2;
          m4 += dev2 * dev2;
        }
        m2 /= n;
        m4 /= n;
        if (m2 < kDegenerateVariance) continue;  // constant row, kurtosis undefined
        acc += m4 / (m2 * m2) - 3.0;
        ++rows;
      }
  if (rows == 0) return std::nullopt;
  return acc / static_cast<double>(rows);
}

ProbeReport run_probe(const EncoderModel& model, ProbeSignal signal, uint64_t noise_seed) {
  const FeatureConfig& cfg = model.features;
  constexpr double kDuration = 5.0;
  Waveform wave;
  ProbeReport report;
  switch (signal) {
    case ProbeSignal::Sine:
      wave = synth_sine(1000.0, 1.0, kDuration, cfg.sample_rate_hz);
      report.input_label = "sine";
      break;
    case ProbeSignal::Square:
      wave = synth_square(1.0, 1.0, kDuration, cfg.sample_rate_hz);
      report.input_label = "pulse";
      break;
    case ProbeSignal::Noise:
      wave = synth_white_noise(1.0, kDuration, cfg.sample_rate_hz, noise_seed);
      report.input_label = "noise";
      break;
  }

  const LogMelSpectrogram spec = log_mel(wave, cfg);
  const ForwardResult r = forward(model, {spec}, {}, {.record_taps = true});

  auto measure = [](const ActivationTensor& tap, int block) {
    ProbeRecord rec;
    rec.block = block;
    rec.time_diff = time_differentiation(tap);
    rec.freq_diff = freq_differentiation(tap);
    rec.kurtosis = kurtosis_metric(tap);
    return rec;
  };
  report.embedding = measure(r.embedding_tap, -1);
  for (size_t i = 0; i < r.block_taps.size(); ++i)
    report.blocks.push_back(measure(r.block_taps[i], static_cast<int>(i)));
  return report;
}

void write_probe_csv(std::ostream& os, const ProbeReport& report) {
  os << "block,time_diff,freq_diff,kurtosis,input_label\n";
  auto row = [&os, &report](const ProbeRecord& rec) {
    os << rec.block << ',' << rec.time_diff << ',' << rec.freq_diff << ',';
    if (rec.kurtosis)
      os << *rec.kurtosis;
    else
      os << "degenerate";
    os << ',' << report.input_label << '\n';
  };
  row(report.embedding);
  for (const auto& rec : report.blocks) row(rec);
}

void write_probe_csv(const std::string& path, const ProbeReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_probe_csv(os, report);
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace tfish
