// experiment.hpp - corruption grids, baseline-vs-adapted evaluation, the
// ending-block sweep, and activation dumps
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tfish/adaptation.hpp"
#include "tfish/corruption.hpp"
#include "tfish/dataset.hpp"
#include "tfish/model.hpp"

namespace tfish {

struct EvalGrid {
  std::vector<double> snr_db = {-5.0, -10.0, -15.0};
  std::vector<int> order = {1, 2, 3, 4};
  double cutoff_hz = 1000.0;
};

struct ResultRow {
  uint64_t model_seed = 0;
  double snr_db = 0.0;
  int order = 0;
  double cutoff_hz = 0.0;
  int ending_block = -1;  // -1 on baseline rows
  int cutoff_bin = -1;    // resolved f'_c; -1 on baseline rows
  bool adapted = false;
  double accuracy = 0.0;  // n_correct / n_eval exactly
  int n_correct = 0;
  int n_eval = 0;
};

// Accuracy of argmax classification over a feature batch.
double evaluate_accuracy(const EncoderModel& model,
                         const std::vector<LogMelSpectrogram>& features,
                         const std::vector<int>& labels, int* n_correct = nullptr);
double evaluate_accuracy_adapted(const EncoderModel& model,
                                 const std::vector<LogMelSpectrogram>& features,
                                 const std::vector<int>& labels, const AdaptationSpec& spec,
                                 const SilentReference& ref, int* n_correct = nullptr);

// Accuracy on the clean (uncorrupted) eval split.
double clean_eval_accuracy(const EncoderModel& model, const Dataset& dataset);

// For every grid cell: corrupt the eval split, evaluate baseline and adapted,
// emit two rows. Cells are independent and run concurrently; the row order is
// the deterministic grid order regardless of scheduling.
std::vector<ResultRow> run_table(const EncoderModel& model, const Dataset& dataset,
                                 const EvalGrid& grid, const AdaptationSpec& adapt);

// Fixed corruption, one adapted row per ending block in [0, L-1], preceded by
// the baseline row and followed by a cutoff_bin = F' control row (which must
// reproduce the baseline accuracy exactly).
std::vector<ResultRow> sweep_ending_block(const EncoderModel& model, const Dataset& dataset,
                                          const CorruptionSpec& corruption,
                                          const AdaptationSpec& adapt);

// Unfolded per-block activations of one clip, one container file per block
// under dir (block_<i>.tfsh); returns the written paths.
std::vector<std::string> dump_activations(const EncoderModel& model, const Waveform& clip,
                                          const std::vector<int>& blocks,
                                          const std::string& dir);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace tfish
