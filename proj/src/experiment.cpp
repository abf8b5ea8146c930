// experiment.cpp
#include "tfish/experiment.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "tfish/container.hpp"
#include "tfish/rng.hpp"

namespace tfish {

namespace fs = std::filesystem;

namespace {

int count_correct(const Eigen::MatrixXf& logits, const std::vector<int>& labels) {
  int correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    if (classify(logits.row(i).transpose()) == labels[i]) ++correct;
  return correct;
}

struct EvalSplit {
  std::vector<const Waveform*> clips;
  std::vector<int> labels;
};

EvalSplit eval_split(const Dataset& dataset) {
  EvalSplit split;
  for (const auto& clip : dataset.clips)
    if (!clip.train) {
      split.clips.push_back(&clip.audio);
      split.labels.push_back(clip.label);
    }
  if (split.clips.empty()) throw std::invalid_argument("dataset has no eval clips");
  return split;
}

// Corrupt + featurize the eval split for one grid cell. Noise seeds depend
// only on (dataset seed, cell tag, clip position), so reruns are identical.
std::vector<LogMelSpectrogram> corrupted_features(const EvalSplit& split,
                                                  const FeatureConfig& cfg,
                                                  const MelFilterbank& bank,
                                                  const CorruptionSpec& base,
                                                  uint64_t dataset_seed, uint64_t cell_tag) {
  std::vector<LogMelSpectrogram> features;
  features.reserve(split.clips.size());
  for (size_t k = 0; k < split.clips.size(); ++k) {
    CorruptionSpec spec = base;
    spec.noise_seed = mix_seed(dataset_seed, cell_tag, static_cast<uint64_t>(k));
    features.push_back(log_mel(corrupt(*split.clips[k], spec), cfg, bank));
  }
  return features;
}

void run_cells_concurrently(int cells, const std::function<void(int)>& body) {
  const int workers =
      std::max(1, std::min<int>(cells, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int i = 0; i < cells; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < cells; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double evaluate_accuracy(const EncoderModel& model,
                         const std::vector<LogMelSpectrogram>& features,
                         const std::vector<int>& labels, int* n_correct) {
  if (features.size() != labels.size())
    throw std::invalid_argument("evaluate_accuracy: feature/label size mismatch");
  const int correct = count_correct(forward(model, features).logits, labels);
  if (n_correct) *n_correct = correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double evaluate_accuracy_adapted(const EncoderModel& model,
                                 const std::vector<LogMelSpectrogram>& features,
                                 const std::vector<int>& labels, const AdaptationSpec& spec,
                                 const SilentReference& ref, int* n_correct) {
  if (features.size() != labels.size())
    throw std::invalid_argument("evaluate_accuracy: feature/label size mismatch");
  const int correct = count_correct(adapted_forward(model, features, spec, ref), labels);
  if (n_correct) *n_correct = correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double clean_eval_accuracy(const EncoderModel& model, const Dataset& dataset) {
  const EvalSplit split = eval_split(dataset);
  const MelFilterbank bank = build_mel_filterbank(model.features);
  std::vector<LogMelSpectrogram> features;
  features.reserve(split.clips.size());
  for (const Waveform* clip : split.clips)
    features.push_back(log_mel(*clip, model.features, bank));
  return evaluate_accuracy(model, features, split.labels);
}

std::vector<ResultRow> run_table(const EncoderModel& model, const Dataset& dataset,
                                 const EvalGrid& grid, const AdaptationSpec& adapt) {
  if (!model.head_trained()) throw std::invalid_argument("run_table: head is untrained");
  if (grid.snr_db.empty() || grid.order.empty())
    throw std::invalid_argument("run_table: empty grid");

  const EvalSplit split = eval_split(dataset);
  const MelFilterbank bank = build_mel_filterbank(model.features);
  const SilentReference ref = capture_silent_reference(model);

  const int cells = static_cast<int>(grid.snr_db.size() * grid.order.size());
  std::vector<ResultRow> rows(2 * cells);
  run_cells_concurrently(cells, [&](int cell) {
    const size_t si = cell / grid.order.size();
    const size_t oi = cell % grid.order.size();
    CorruptionSpec corruption;
    corruption.order = grid.order[oi];
    corruption.cutoff_hz = grid.cutoff_hz;
    corruption.snr_db = grid.snr_db[si];
    const uint64_t cell_tag = mix_seed(0x7ab1e, si, oi);
    const std::vector<LogMelSpectrogram> features =
        corrupted_features(split, model.features, bank, corruption, dataset.spec.seed, cell_tag);

    ResultRow base;
    base.model_seed = model.config.seed;
    base.snr_db = grid.snr_db[si];
    base.order = grid.order[oi];
    base.cutoff_hz = grid.cutoff_hz;
    base.n_eval = static_cast<int>(split.labels.size());

    ResultRow baseline = base;
    baseline.adapted = false;
    baseline.accuracy = evaluate_accuracy(model, features, split.labels, &baseline.n_correct);

    ResultRow adapted = base;
    adapted.adapted = true;
    adapted.ending_block = adapt.ending_block;
    adapted.cutoff_bin = adapt.cutoff_bin;
    adapted.accuracy = evaluate_accuracy_adapted(model, features, split.labels, adapt, ref,
                                                 &adapted.n_correct);

    rows[2 * cell] = baseline;
    rows[2 * cell + 1] = adapted;
  });
  return rows;
}

std::vector<ResultRow> sweep_ending_block(const EncoderModel& model, const Dataset& dataset,
                                          const CorruptionSpec& corruption,
                                          const AdaptationSpec& adapt) {
  if (!model.head_trained()) throw std::invalid_argument("sweep_ending_block: head is untrained");
  const EvalSplit split = eval_split(dataset);
  const MelFilterbank bank = build_mel_filterbank(model.features);
  const SilentReference ref = capture_silent_reference(model);
  const std::vector<LogMelSpectrogram> features = corrupted_features(
      split, model.features, bank, corruption, dataset.spec.seed, 0x5feebu);

  ResultRow base;
  base.model_seed = model.config.seed;
  base.snr_db = corruption.snr_db;
  base.order = corruption.order;
  base.cutoff_hz = corruption.cutoff_hz;
  base.n_eval = static_cast<int>(split.labels.size());

  std::vector<ResultRow> rows;
  ResultRow baseline = base;
  baseline.adapted = false;
  baseline.accuracy = evaluate_accuracy(model, features, split.labels, &baseline.n_correct);
  rows.push_back(baseline);

  for (int ending = 0; ending < model.config.num_blocks; ++ending) {
    AdaptationSpec spec = adapt;
    spec.ending_block = ending;
    ResultRow row = base;
    row.adapted = true;
    row.ending_block = ending;
    row.cutoff_bin = spec.cutoff_bin;
    row.accuracy =
        evaluate_accuracy_adapted(model, features, split.labels, spec, ref, &row.n_correct);
    rows.push_back(row);
  }

  // Control: an empty replacement band must reproduce the baseline exactly.
  AdaptationSpec control = adapt;
  control.cutoff_bin = model.freq_patches();
  control.ending_block = model.config.num_blocks - 1;
  ResultRow control_row = base;
  control_row.adapted = true;
  control_row.ending_block = control.ending_block;
  control_row.cutoff_bin = control.cutoff_bin;
  control_row.accuracy = evaluate_accuracy_adapted(model, features, split.labels, control, ref,
                                                   &control_row.n_correct);
  rows.push_back(control_row);
  return rows;
}

std::vector<std::string> dump_activations(const EncoderModel& model, const Waveform& clip,
                                          const std::vector<int>& blocks,
                                          const std::string& dir) {
  for (int b : blocks)
    if (b < 0 || b >= model.config.num_blocks)
      throw std::invalid_argument("dump_activations: block index out of range: " +
                                  std::to_string(b));
  fs::create_directories(dir);
  const LogMelSpectrogram spec = log_mel(clip, model.features);
  const ForwardResult r = forward(model, {spec}, {}, {.record_taps = true});

  std::vector<std::string> written;
  for (int b : blocks) {
    const ActivationTensor& tap = r.block_taps[b];
    Container c;
    c.meta["kind"] = "activation";
    c.meta["block"] = b;
    TensorRecord t;
    t.name = "activation";
    t.dims = {tap.batch, tap.dim, tap.freq_bins, tap.time_bins};
    t.data = tap.data;
    c.tensors.push_back(std::move(t));
    const std::string path = (fs::path(dir) / ("block_" + std::to_string(b) + ".tfsh")).string();
    write_container(path, c);
    written.push_back(path);
  }
  return written;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "model_seed,snr_db,order,cutoff_hz,ending_block,cutoff_bin,adapted,accuracy,n_eval\n";
  for (const auto& r : rows) {
    os << r.model_seed << ',' << r.snr_db << ',' << r.order << ',' << r.cutoff_hz << ','
       << r.ending_block << ',' << r.cutoff_bin << ',' << (r.adapted ? 1 : 0) << ','
       << std::setprecision(10) << r.accuracy << ',' << r.n_eval << '\n';
  }
}

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_results_csv(os, rows);
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace tfish
