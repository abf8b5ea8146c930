// adaptation.hpp - trainingless frequency filtering: capture silent-input
// references, map the physical cutoff onto the patch grid, and substitute
// the non-informative bands of intermediate activations
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tfish/model.hpp"

namespace tfish {

// Per-block unfolded activations of the all-zero input, plus the embedding
// output; immutable after capture.
struct SilentReference {
  ActivationTensor embedding;            // (1, D, F', T')
  std::vector<ActivationTensor> blocks;  // one per encoder block
  uint64_t model_fingerprint = 0;
};

enum class FilterMode {
  Band,       // replace every bin f >= cutoff_bin
  SingleBin,  // replace only f == cutoff_bin
};

struct AdaptationSpec {
  double cutoff_hz = 1000.0;
  int cutoff_bin = 0;      // f'_c in [0, F']; F' selects nothing in Band mode
  int ending_block = 5;    // filtering applied at blocks [0, ending_block]
  bool include_embedding = false;
  FilterMode mode = FilterMode::Band;
};

// Nearest mel center to the cutoff (ties -> lowest index), then the
// proportional patch-grid bin: (m, floor(F' * m / M)).
std::pair<int, int> map_cutoff_bin(double cutoff_hz,
                                   const std::vector<double>& mel_centers_hz,
                                   int freq_patches);

// AdaptationSpec with cutoff_bin resolved through the model's mel centers.
AdaptationSpec make_adaptation_spec(double cutoff_hz, const EncoderModel& model,
                                    int ending_block, bool include_embedding = false,
                                    FilterMode mode = FilterMode::Band);

// Unmodified forward pass of the silent clip, taps at the embedding output
// and every block output.
SilentReference capture_silent_reference(const EncoderModel& model,
                                         const FeatureConfig& cfg);
SilentReference capture_silent_reference(const EncoderModel& model);

// x[b,d,f,t] <- ref[0,d,f,t] on the selected bins, reference broadcast over
// the batch; remaining bins untouched.
ActivationTensor apply_tf_filter(ActivationTensor x, const ActivationTensor& ref,
                                 int cutoff_bin, FilterMode mode = FilterMode::Band);

// forward() with the band substitution installed at every block up to and
// including ending_block (and at the embedding output when requested).
// Rejects references whose fingerprint does not match the model.
ForwardResult adapted_forward_result(const EncoderModel& model,
                                     const std::vector<LogMelSpectrogram>& batch,
                                     const AdaptationSpec& spec, const SilentReference& ref,
                                     bool record_taps = false);
Eigen::MatrixXf adapted_forward(const EncoderModel& model,
                                const std::vector<LogMelSpectrogram>& batch,
                                const AdaptationSpec& spec, const SilentReference& ref);

// Reference cache in the shared container format, fingerprint included.
void save_reference(const std::string& path, const SilentReference& ref);
SilentReference load_reference(const std::string& path);

}  // namespace tfish
