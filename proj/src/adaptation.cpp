// adaptation.cpp
#include "tfish/adaptation.hpp"

#include <cmath>
#include <stdexcept>

#include "tfish/container.hpp"

namespace tfish {

std::pair<int, int> map_cutoff_bin(double cutoff_hz,
                                   const std::vector<double>& mel_centers_hz,
                                   int freq_patches) {
  if (mel_centers_hz.empty()) throw std::invalid_argument("map_cutoff_bin: empty mel centers");
  if (freq_patches < 1) throw std::invalid_argument("map_cutoff_bin: freq_patches must be >= 1");
  const int count = static_cast<int>(mel_centers_hz.size());
  int best = 0;
  double best_dist = std::abs(cutoff_hz - mel_centers_hz[0]);
  for (int m = 1; m < count; ++m) {
    const double dist = std::abs(cutoff_hz - mel_centers_hz[m]);
    if (dist < best_dist) {
      best = m;
      best_dist = dist;
    }
  }
  const int bin = static_cast<int>(static_cast<int64_t>(freq_patches) * best / count);
  return {best, bin};
}

AdaptationSpec make_adaptation_spec(double cutoff_hz, const EncoderModel& model,
                                    int ending_block, bool include_embedding,
                                    FilterMode mode) {
  if (ending_block < 0 || ending_block >= model.config.num_blocks)
    throw std::invalid_argument("ending_block out of range");
  const MelFilterbank bank = build_mel_filterbank(model.features);
  AdaptationSpec spec;
  spec.cutoff_hz = cutoff_hz;
  spec.cutoff_bin = map_cutoff_bin(cutoff_hz, bank.centers_hz, model.freq_patches()).second;
  spec.ending_block = ending_block;
  spec.include_embedding = include_embedding;
  spec.mode = mode;
  return spec;
}

SilentReference capture_silent_reference(const EncoderModel& model,
                                         const FeatureConfig& cfg) {
  // Any length >= one FFT frame works: the front end pads/crops to the fixed
  // grid and silence is silence at every length.
  Waveform silence;
  silence.sample_rate_hz = cfg.sample_rate_hz;
  silence.samples.assign(static_cast<size_t>(cfg.hop) * cfg.target_frames, 0.0);
  const LogMelSpectrogram spec = log_mel(silence, cfg);
  ForwardResult r = forward(model, {spec}, {}, {.record_taps = true});

  SilentReference ref;
  ref.embedding = std::move(r.embedding_tap);
  ref.blocks = std::move(r.block_taps);
  ref.model_fingerprint = model.fingerprint();
  return ref;
}

SilentReference capture_silent_reference(const EncoderModel& model) {
  return capture_silent_reference(model, model.features);
}

ActivationTensor apply_tf_filter(ActivationTensor x, const ActivationTensor& ref,
                                 int cutoff_bin, FilterMode mode) {
  if (x.layout != Layout::Unfolded || ref.layout != Layout::Unfolded)
    throw std::invalid_argument("apply_tf_filter: tensors must be unfolded");
  if (ref.batch != 1 || ref.dim != x.dim || ref.freq_bins != x.freq_bins ||
      ref.time_bins != x.time_bins)
    throw std::invalid_argument("apply_tf_filter: reference shape mismatch");
  if (cutoff_bin < 0 || cutoff_bin > x.freq_bins)
    throw std::invalid_argument("apply_tf_filter: cutoff_bin out of range");

  const int f_lo = cutoff_bin;
  const int f_hi = mode == FilterMode::Band ? x.freq_bins : std::min(cutoff_bin + 1, x.freq_bins);
  for (int b = 0; b < x.batch; ++b)
    for (int d = 0; d < x.dim; ++d)
      for (int f = f_lo; f < f_hi; ++f)
        for (int t = 0; t < x.time_bins; ++t) x.at(b, d, f, t) = ref.at(0, d, f, t);
  return x;
}

ForwardResult adapted_forward_result(const EncoderModel& model,
                                     const std::vector<LogMelSpectrogram>& batch,
                                     const AdaptationSpec& spec, const SilentReference& ref,
                                     bool record_taps) {
  if (ref.model_fingerprint != model.fingerprint())
    throw std::invalid_argument("adapted_forward: stale silent reference (fingerprint mismatch)");
  if (static_cast<int>(ref.blocks.size()) != model.config.num_blocks)
    throw std::invalid_argument("adapted_forward: reference block count mismatch");
  if (spec.ending_block < 0 || spec.ending_block >= model.config.num_blocks)
    throw std::invalid_argument("adapted_forward: ending_block out of range");
  if (spec.cutoff_bin < 0 || spec.cutoff_bin > model.freq_patches())
    throw std::invalid_argument("adapted_forward: cutoff_bin out of range");

  std::vector<Intervention> interventions;
  interventions.reserve(spec.ending_block + 1);
  for (int block = 0; block <= spec.ending_block; ++block) {
    const ActivationTensor& block_ref = ref.blocks[block];
    interventions.push_back(Intervention{
        block, [&block_ref, &spec](ActivationTensor& x) {
          x = apply_tf_filter(std::move(x), block_ref, spec.cutoff_bin, spec.mode);
        }});
  }
  ForwardOptions options;
  options.record_taps = record_taps;
  if (spec.include_embedding) {
    options.embedding_action = [&ref, &spec](ActivationTensor& x) {
      x = apply_tf_filter(std::move(x), ref.embedding, spec.cutoff_bin, spec.mode);
    };
  }
  return forward(model, batch, interventions, options);
}

Eigen::MatrixXf adapted_forward(const EncoderModel& model,
                                const std::vector<LogMelSpectrogram>& batch,
                                const AdaptationSpec& spec, const SilentReference& ref) {
  return adapted_forward_result(model, batch, spec, ref, false).logits;
}

namespace {

TensorRecord record_activation(const std::string& name, const ActivationTensor& t) {
  TensorRecord r;
  r.name = name;
  r.dims = {t.batch, t.dim, t.freq_bins, t.time_bins};
  r.data = t.data;
  return r;
}

ActivationTensor load_activation(const Container& c, const std::string& name) {
  const TensorRecord& r = c.tensor(name);
  if (r.dims.size() != 4) throw std::runtime_error("activation tensor must be 4-d: " + name);
  ActivationTensor t;
  t.batch = static_cast<int>(r.dims[0]);
  t.dim = static_cast<int>(r.dims[1]);
  t.freq_bins = static_cast<int>(r.dims[2]);
  t.time_bins = static_cast<int>(r.dims[3]);
  t.layout = Layout::Unfolded;
  t.data = r.data;
  return t;
}

}  // namespace

void save_reference(const std::string& path, const SilentReference& ref) {
  Container c;
  c.meta["kind"] = "silent_reference";
  c.meta["fingerprint"] = ref.model_fingerprint;
  c.meta["num_blocks"] = ref.blocks.size();
  c.tensors.push_back(record_activation("embedding", ref.embedding));
  for (size_t i = 0; i < ref.blocks.size(); ++i)
    c.tensors.push_back(record_activation("block" + std::to_string(i), ref.blocks[i]));
  write_container(path, c);
}

SilentReference load_reference(const std::string& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", "") != "silent_reference")
    throw std::runtime_error("not a silent-reference container: " + path);
  SilentReference ref;
  ref.model_fingerprint = c.meta.at("fingerprint").get<uint64_t>();
  ref.embedding = load_activation(c, "embedding");
  const auto blocks = c.meta.at("num_blocks").get<size_t>();
  for (size_t i = 0; i < blocks; ++i)
    ref.blocks.push_back(load_activation(c, "block" + std::to_string(i)));
  return ref;
}

}  // namespace tfish
