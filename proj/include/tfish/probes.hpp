// probes.hpp - quantitative checks that time-frequency structure survives in
// intermediate layers: differentiation along each grid axis plus kurtosis
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tfish/model.hpp"

namespace tfish {

// Mean absolute difference between adjacent time columns, summed over all
// (b, d, f) and normalized by B*D*F'*T' (the conventional normalizer, even
// though each row contributes T'-1 terms).
double time_differentiation(const ActivationTensor& x);

// Same along the frequency axis.
double freq_differentiation(const ActivationTensor& x);

// Excess kurtosis over the time axis per (b, d, f) row, population moments,
// averaged over rows; rows with variance < 1e-12 are excluded. Returns
// nullopt when every row is degenerate.
std::optional<double> kurtosis_metric(const ActivationTensor& x);

enum class ProbeSignal { Sine, Square, Noise };

struct ProbeRecord {
  int block = 0;  // -1 marks the embedding output
  double time_diff = 0.0;
  double freq_diff = 0.0;
  std::optional<double> kurtosis;
};

struct ProbeReport {
  ProbeRecord embedding;
  std::vector<ProbeRecord> blocks;  // one per encoder block
  std::string input_label;          // sine | pulse | noise | custom
};

// Runs the chosen 5-s test signal through the model with taps at every block.
ProbeReport run_probe(const EncoderModel& model, ProbeSignal signal,
                      uint64_t noise_seed = 0);

// CSV: block,time_diff,freq_diff,kurtosis,input_label ("degenerate" when the
// kurtosis has no defined value). Embedding row first with block = -1.
void write_probe_csv(std::ostream& os, const ProbeReport& report);
void write_probe_csv(const std::string& path, const ProbeReport& report);

}  // namespace tfish
