// model.hpp - toy spectrogram transformer: patch embedding, shape-preserving
// pre-norm encoder blocks, per-block taps with intervention points, and a
// closed-form ridge classification head
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tfish/features.hpp"
#include "tfish/tensor.hpp"

namespace tfish {

struct ModelConfig {
  int patch_size = 16;  // square frequency x time patches
  int embed_dim = 64;
  int num_blocks = 6;
  int num_heads = 4;
  int mlp_hidden = 128;
  int num_classes = 10;
  uint64_t seed = 1;
};

struct BlockParams {
  Eigen::VectorXf ln1_gamma, ln1_beta;
  Eigen::MatrixXf wq, wk, wv, wo;  // embed_dim x embed_dim
  Eigen::VectorXf bq, bk, bv, bo;
  Eigen::VectorXf ln2_gamma, ln2_beta;
  Eigen::MatrixXf mlp_w1;  // mlp_hidden x embed_dim
  Eigen::VectorXf mlp_b1;
  Eigen::MatrixXf mlp_w2;  // embed_dim x mlp_hidden
  Eigen::VectorXf mlp_b2;
  int num_heads = 1;
};

struct EncoderModel {
  ModelConfig config;
  FeatureConfig features;          // preprocessing this model was built for
  Eigen::MatrixXf patch_kernel;    // embed_dim x (patch_size * patch_size)
  Eigen::VectorXf patch_bias;      // embed_dim
  std::vector<BlockParams> blocks;
  Eigen::MatrixXf head_weight;     // num_classes x embed_dim; zero until trained
  Eigen::VectorXf head_bias;       // num_classes

  int freq_patches() const { return features.n_mels / config.patch_size; }
  int time_patches() const { return features.target_frames / config.patch_size; }
  bool head_trained() const { return head_weight.cwiseAbs().maxCoeff() > 0.0f; }
  uint64_t fingerprint() const;  // hash of all weights
};

EncoderModel init_model(const ModelConfig& cfg, const FeatureConfig& features);

// Non-overlapping patch convolution, stride = patch_size; (B, D, F', T').
ActivationTensor patch_embed(const std::vector<LogMelSpectrogram>& batch,
                             const EncoderModel& model);

// Fixed sinusoidal position table over token index n = f * T' + t, scaled
// small so it marks grid position without drowning patch content.
Eigen::MatrixXf positional_encoding(int embed_dim, int freq_bins, int time_bins);

// Per-token (per-column) normalization over the embedding dimension,
// population variance, eps = 1e-5.
Eigen::MatrixXf layer_norm(const Eigen::MatrixXf& x, const Eigen::VectorXf& gamma,
                           const Eigen::VectorXf& beta);

// One pre-norm transformer block: x + MHA(LN1(x)), then + MLP(LN2(.)).
// Throws (naming block_index) if the output is not finite.
ActivationTensor encoder_block(const ActivationTensor& folded, const BlockParams& params,
                               int block_index);

// Shape-preserving transformation applied to the unfolded activation after
// the given block.
struct Intervention {
  int block_index = 0;
  std::function<void(ActivationTensor&)> action;
};

struct ForwardOptions {
  bool record_taps = false;
  // Optional transformation of the unfolded embedding output (position-encoded),
  // applied before the first block.
  std::function<void(ActivationTensor&)> embedding_action;
};

struct ForwardResult {
  Eigen::MatrixXf logits;                    // batch x num_classes
  ActivationTensor embedding_tap;            // unfolded; set when record_taps
  std::vector<ActivationTensor> block_taps;  // post-intervention, unfolded
};

// patch_embed -> +position -> fold -> blocks (with interventions in the
// unfolded domain) -> unfold -> mean pool over the grid -> head.
// Interventions must be sorted by block index with at most one per block.
ForwardResult forward(const EncoderModel& model, const std::vector<LogMelSpectrogram>& batch,
                      const std::vector<Intervention>& interventions = {},
                      const ForwardOptions& options = {});

// Mean-pooled final-block embeddings, one row per clip.
Eigen::MatrixXf pooled_embeddings(const EncoderModel& model,
                                  const std::vector<LogMelSpectrogram>& batch);

// Closed-form ridge fit of the head on pooled embeddings of clean clips
// against one-hot targets; encoder weights untouched, bias left at zero.
EncoderModel train_head(EncoderModel model, const std::vector<LogMelSpectrogram>& clips,
                        const std::vector<int>& labels, double ridge_lambda);

// Argmax with ties broken toward the lowest index.
int classify(const Eigen::VectorXf& logits);

void save_model(const std::string& path, const EncoderModel& model);
EncoderModel load_model(const std::string& path);

}  // namespace tfish
