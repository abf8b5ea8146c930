// dataset.cpp
#include "tfish/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "tfish/container.hpp"
#include "tfish/rng.hpp"

namespace tfish {

namespace fs = std::filesystem;

void DatasetSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset needs at least two classes");
  if (clips_per_class < 2) throw std::invalid_argument("need at least two clips per class");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  if (tones_per_class < 1 || distractor_tones < 0)
    throw std::invalid_argument("invalid tone counts");
  if (tone_fmin_hz <= 0.0 || tone_fmax_hz <= tone_fmin_hz)
    throw std::invalid_argument("invalid signature tone band");
  if (distractor_fmax_hz <= distractor_fmin_hz)
    throw std::invalid_argument("invalid distractor band");
  if (tone_fmax_hz >= distractor_fmin_hz)
    throw std::invalid_argument("signature and distractor bands overlap");
  if (distractor_fmax_hz >= 0.5 * sample_rate_hz)
    throw std::invalid_argument("distractor band exceeds Nyquist");
  if (sample_rate_hz <= 0 || duration_s <= 0.0)
    throw std::invalid_argument("invalid sample rate or duration");
}

std::vector<int> Dataset::train_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < clips.size(); ++i)
    if (clips[i].train) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Dataset::eval_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < clips.size(); ++i)
    if (!clips[i].train) out.push_back(static_cast<int>(i));
  return out;
}

namespace {

std::vector<ClassSignature> draw_signatures(const DatasetSpec& spec) {
  std::vector<ClassSignature> sigs(spec.num_classes);
  for (int c = 0; c < spec.num_classes; ++c) {
    auto rng = make_rng(mix_seed(spec.seed, 0x51671u, static_cast<uint64_t>(c)));
    std::uniform_real_distribution<double> tone(spec.tone_fmin_hz, spec.tone_fmax_hz);
    for (int k = 0; k < spec.tones_per_class; ++k)
      sigs[c].tone_freqs_hz.push_back(tone(rng));
    sigs[c].am_rate_hz = 0.5 + 0.6 * c;  // evenly spaced, one rate per class
  }
  return sigs;
}

}  // namespace

Waveform synth_clip(const DatasetSpec& spec, const ClassSignature& sig, int label,
                    int index_in_class) {
  const int n = static_cast<int>(std::llround(spec.duration_s * spec.sample_rate_hz));
  auto rng = make_rng(mix_seed(spec.seed, static_cast<uint64_t>(label),
                               static_cast<uint64_t>(index_in_class)));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::uniform_real_distribution<double> high(spec.distractor_fmin_hz, spec.distractor_fmax_hz);

  struct Tone {
    double freq, amp, phase, am_phase;
    bool modulated;
  };
  std::vector<Tone> tones;
  for (double f : sig.tone_freqs_hz)
    tones.push_back({f, spec.tone_amplitude * jitter(rng), phase(rng), phase(rng), true});
  for (int j = 0; j < spec.distractor_tones; ++j)
    tones.push_back({high(rng), spec.distractor_amplitude * jitter(rng), phase(rng), 0.0, false});

  Waveform w{std::vector<double>(n, 0.0), spec.sample_rate_hz};
  const double dt = 1.0 / spec.sample_rate_hz;
  for (const Tone& tone : tones) {
    const double step = 2.0 * M_PI * tone.freq;
    const double am_step = 2.0 * M_PI * sig.am_rate_hz;
    for (int i = 0; i < n; ++i) {
      const double t = i * dt;
      double env = 1.0;
      if (tone.modulated) env = 1.0 + 0.75 * std::sin(am_step * t + tone.am_phase);
      w.samples[i] += tone.amp * env * std::sin(step * t + tone.phase);
    }
  }
  return w;
}

Dataset gen_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.signatures = draw_signatures(spec);
  const int train_per_class =
      static_cast<int>(std::lround(spec.train_fraction * spec.clips_per_class));
  if (train_per_class < 1 || train_per_class >= spec.clips_per_class)
    throw std::invalid_argument("train_fraction leaves an empty split");
  for (int c = 0; c < spec.num_classes; ++c)
    for (int i = 0; i < spec.clips_per_class; ++i) {
      LabeledClip clip;
      clip.audio = synth_clip(spec, ds.signatures[c], c, i);
      clip.label = c;
      clip.index_in_class = i;
      clip.train = i < train_per_class;
      ds.clips.push_back(std::move(clip));
    }
  return ds;
}

namespace {

nlohmann::json spec_to_json(const DatasetSpec& s) {
  return {{"num_classes", s.num_classes},
          {"clips_per_class", s.clips_per_class},
          {"train_fraction", s.train_fraction},
          {"tones_per_class", s.tones_per_class},
          {"tone_fmin_hz", s.tone_fmin_hz},
          {"tone_fmax_hz", s.tone_fmax_hz},
          {"tone_amplitude", s.tone_amplitude},
          {"distractor_tones", s.distractor_tones},
          {"distractor_fmin_hz", s.distractor_fmin_hz},
          {"distractor_fmax_hz", s.distractor_fmax_hz},
          {"distractor_amplitude", s.distractor_amplitude},
          {"sample_rate_hz", s.sample_rate_hz},
          {"duration_s", s.duration_s},
          {"seed", s.seed}};
}

DatasetSpec spec_from_json(const nlohmann::json& j) {
  DatasetSpec s;
  s.num_classes = j.value("num_classes", s.num_classes);
  s.clips_per_class = j.value("clips_per_class", s.clips_per_class);
  s.train_fraction = j.value("train_fraction", s.train_fraction);
  s.tones_per_class = j.value("tones_per_class", s.tones_per_class);
  s.tone_fmin_hz = j.value("tone_fmin_hz", s.tone_fmin_hz);
  s.tone_fmax_hz = j.value("tone_fmax_hz", s.tone_fmax_hz);
  s.tone_amplitude = j.value("tone_amplitude", s.tone_amplitude);
  s.distractor_tones = j.value("distractor_tones", s.distractor_tones);
  s.distractor_fmin_hz = j.value("distractor_fmin_hz", s.distractor_fmin_hz);
  s.distractor_fmax_hz = j.value("distractor_fmax_hz", s.distractor_fmax_hz);
  s.distractor_amplitude = j.value("distractor_amplitude", s.distractor_amplitude);
  s.sample_rate_hz = j.value("sample_rate_hz", s.sample_rate_hz);
  s.duration_s = j.value("duration_s", s.duration_s);
  s.seed = j.value("seed", s.seed);
  return s;
}

std::string clip_filename(int label, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%02d_i%03d.tfsh", label, index);
  return buf;
}

}  // namespace

void save_dataset(const std::string& dir, const Dataset& dataset) {
  fs::create_directories(fs::path(dir) / "clips");
  nlohmann::json manifest;
  manifest["dataset"] = spec_to_json(dataset.spec);
  nlohmann::json sigs = nlohmann::json::array();
  for (const auto& s : dataset.signatures)
    sigs.push_back({{"tone_freqs_hz", s.tone_freqs_hz}, {"am_rate_hz", s.am_rate_hz}});
  manifest["signatures"] = sigs;

  nlohmann::json clips = nlohmann::json::array();
  for (const auto& clip : dataset.clips) {
    const std::string name = clip_filename(clip.label, clip.index_in_class);
    Container c;
    c.meta["kind"] = "waveform";
    c.meta["sample_rate_hz"] = clip.audio.sample_rate_hz;
    c.meta["label"] = clip.label;
    TensorRecord t;
    t.name = "samples";
    t.dims = {clip.audio.size()};
    t.data.assign(clip.audio.samples.begin(), clip.audio.samples.end());
    c.tensors.push_back(std::move(t));
    write_container((fs::path(dir) / "clips" / name).string(), c);
    clips.push_back({{"file", "clips/" + name},
                     {"label", clip.label},
                     {"index_in_class", clip.index_in_class},
                     {"split", clip.train ? "train" : "eval"}});
  }
  manifest["clips"] = clips;

  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + dir);
  os << manifest.dump(2) << '\n';
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw std::runtime_error("no manifest.json in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(is);

  Dataset ds;
  ds.spec = spec_from_json(manifest.at("dataset"));
  for (const auto& sj : manifest.at("signatures")) {
    ClassSignature sig;
    sig.tone_freqs_hz = sj.at("tone_freqs_hz").get<std::vector<double>>();
    sig.am_rate_hz = sj.at("am_rate_hz").get<double>();
    ds.signatures.push_back(std::move(sig));
  }
  for (const auto& cj : manifest.at("clips")) {
    const Container c = read_container((fs::path(dir) / cj.at("file").get<std::string>()).string());
    const TensorRecord& t = c.tensor("samples");
    LabeledClip clip;
    clip.audio.sample_rate_hz = c.meta.at("sample_rate_hz").get<int>();
    clip.audio.samples.assign(t.data.begin(), t.data.end());
    clip.label = cj.at("label").get<int>();
    clip.index_in_class = cj.at("index_in_class").get<int>();
    clip.train = cj.at("split").get<std::string>() == "train";
    ds.clips.push_back(std::move(clip));
  }
  return ds;
}

}  // namespace tfish
