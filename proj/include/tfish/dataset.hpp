// dataset.hpp - synthetic labeled corpus: class-specific AM tone triplets in
// a low band, shared random distractor content in a high band
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfish/waveform.hpp"

namespace tfish {

struct DatasetSpec {
  int num_classes = 10;
  int clips_per_class = 40;
  double train_fraction = 0.75;
  // Class signature: tones_per_class frequencies drawn from the low band,
  // with a class-specific amplitude-modulation rate.
  int tones_per_class = 3;
  double tone_fmin_hz = 100.0;
  double tone_fmax_hz = 900.0;
  double tone_amplitude = 0.25;
  // Distractor: random per-clip tones in the shared high band.
  int distractor_tones = 3;
  double distractor_fmin_hz = 2000.0;
  double distractor_fmax_hz = 6000.0;
  double distractor_amplitude = 0.25;
  int sample_rate_hz = 16000;
  double duration_s = 5.0;
  uint64_t seed = 42;

  void validate() const;
};

struct ClassSignature {
  std::vector<double> tone_freqs_hz;
  double am_rate_hz = 1.0;
};

struct LabeledClip {
  Waveform audio;
  int label = 0;
  int index_in_class = 0;
  bool train = false;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<ClassSignature> signatures;   // one per class
  std::vector<LabeledClip> clips;           // class-major order

  std::vector<int> train_indices() const;
  std::vector<int> eval_indices() const;
};

// Deterministic per (class, index, seed); split stratified per class.
Dataset gen_dataset(const DatasetSpec& spec);

// One clip without materializing the whole dataset (used by the store too).
Waveform synth_clip(const DatasetSpec& spec, const ClassSignature& sig, int label,
                    int index_in_class);

// Directory store: manifest.json plus one container file per clip.
void save_dataset(const std::string& dir, const Dataset& dataset);
Dataset load_dataset(const std::string& dir);

}  // namespace tfish
