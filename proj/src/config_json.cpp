// config_json.cpp
#include "tfish/config_json.hpp"

#include <fstream>
#include <stdexcept>

namespace tfish {

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
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

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.patch_size = j.value("patch_size", c.patch_size);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.num_blocks = j.value("num_blocks", c.num_blocks);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.seed = j.value("seed", c.seed);
  return c;
}

FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig c;
  c.n_fft = j.value("n_fft", c.n_fft);
  c.hop = j.value("hop", c.hop);
  c.n_mels = j.value("n_mels", c.n_mels);
  c.fmin_hz = j.value("fmin_hz", c.fmin_hz);
  c.fmax_hz = j.value("fmax_hz", c.fmax_hz);
  c.target_frames = j.value("target_frames", c.target_frames);
  c.log_floor = j.value("log_floor", c.log_floor);
  c.sample_rate_hz = j.value("sample_rate_hz", c.sample_rate_hz);
  return c;
}

AdaptationSpec adaptation_spec_from_json(const nlohmann::json& j) {
  AdaptationSpec s;
  s.cutoff_hz = j.value("cutoff_hz", s.cutoff_hz);
  s.cutoff_bin = j.value("cutoff_bin", s.cutoff_bin);
  s.ending_block = j.value("ending_block", s.ending_block);
  s.include_embedding = j.value("include_embedding", s.include_embedding);
  s.mode = j.value("single_bin", false) ? FilterMode::SingleBin : FilterMode::Band;
  return s;
}

ConfigFile load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j = nlohmann::json::parse(is);
  ConfigFile cfg;
  if (j.contains("dataset")) cfg.dataset = dataset_spec_from_json(j.at("dataset"));
  if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"));
  if (j.contains("features")) cfg.features = feature_config_from_json(j.at("features"));
  if (j.contains("adaptation")) cfg.adaptation = adaptation_spec_from_json(j.at("adaptation"));
  return cfg;
}

}  // namespace tfish
