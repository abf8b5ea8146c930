// model.cpp - toy spectrogram transformer
#include "tfish/model.hpp"

#include <cmath>
#include <stdexcept>

#include "tfish/container.hpp"
#include "tfish/rng.hpp"

namespace tfish {

namespace {

constexpr float kLayerNormEps = 1e-5f;
constexpr float kPositionScale = 0.1f;

using RowMajorMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void fill_gaussian(Eigen::MatrixXf& m, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, scale);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<float>(gauss(rng));
}

}  // namespace

Eigen::MatrixXf layer_norm(const Eigen::MatrixXf& x, const Eigen::VectorXf& gamma,
                           const Eigen::VectorXf& beta) {
  Eigen::MatrixXf y(x.rows(), x.cols());
  const auto d = static_cast<float>(x.rows());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const float mean = x.col(c).mean();
    const float var = (x.col(c).array() - mean).square().sum() / d;
    const float inv = 1.0f / std::sqrt(var + kLayerNormEps);
    y.col(c) = ((x.col(c).array() - mean) * inv).matrix().cwiseProduct(gamma) + beta;
  }
  return y;
}

namespace {

Eigen::MatrixXf gelu(Eigen::MatrixXf x) {
  for (float& v : x.reshaped())
    v = 0.5f * v * (1.0f + std::erf(v * static_cast<float>(M_SQRT1_2)));
  return x;
}

}  // namespace

uint64_t EncoderModel::fingerprint() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto add = [&h](const float* p, size_t n) { h = fnv1a_bytes(p, n * sizeof(float), h); };
  add(patch_kernel.data(), patch_kernel.size());
  add(patch_bias.data(), patch_bias.size());
  for (const auto& b : blocks) {
    for (const auto* m : {&b.wq, &b.wk, &b.wv, &b.wo, &b.mlp_w1, &b.mlp_w2})
      add(m->data(), m->size());
    for (const auto* v : {&b.ln1_gamma, &b.ln1_beta, &b.bq, &b.bk, &b.bv, &b.bo,
                          &b.ln2_gamma, &b.ln2_beta, &b.mlp_b1, &b.mlp_b2})
      add(v->data(), v->size());
  }
  add(head_weight.data(), head_weight.size());
  add(head_bias.data(), head_bias.size());
  return h;
}

EncoderModel init_model(const ModelConfig& cfg, const FeatureConfig& features) {
  features.validate();
  if (cfg.patch_size < 1 || cfg.embed_dim < 1 || cfg.num_blocks < 1 || cfg.num_heads < 1 ||
      cfg.mlp_hidden < 1 || cfg.num_classes < 2)
    throw std::invalid_argument("model config fields must be positive (num_classes >= 2)");
  if (features.n_mels % cfg.patch_size != 0)
    throw std::invalid_argument("n_mels must be divisible by patch_size");
  if (features.target_frames % cfg.patch_size != 0)
    throw std::invalid_argument("target_frames must be divisible by patch_size");
  if (cfg.embed_dim % cfg.num_heads != 0)
    throw std::invalid_argument("embed_dim must be divisible by num_heads");

  EncoderModel model;
  model.config = cfg;
  model.features = features;

  auto rng = make_rng(cfg.seed);
  const int d = cfg.embed_dim;
  const int pp = cfg.patch_size * cfg.patch_size;

  model.patch_kernel.resize(d, pp);
  fill_gaussian(model.patch_kernel, rng, 1.0 / std::sqrt(static_cast<double>(pp)));
  model.patch_bias = Eigen::VectorXf::Zero(d);

  model.blocks.resize(cfg.num_blocks);
  for (auto& b : model.blocks) {
    b.num_heads = cfg.num_heads;
    b.ln1_gamma = Eigen::VectorXf::Ones(d);
    b.ln1_beta = Eigen::VectorXf::Zero(d);
    b.ln2_gamma = Eigen::VectorXf::Ones(d);
    b.ln2_beta = Eigen::VectorXf::Zero(d);
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto* m : {&b.wq, &b.wk, &b.wv, &b.wo}) {
      m->resize(d, d);
      fill_gaussian(*m, rng, attn_scale);
    }
    b.bq = Eigen::VectorXf::Zero(d);
    b.bk = Eigen::VectorXf::Zero(d);
    b.bv = Eigen::VectorXf::Zero(d);
    b.bo = Eigen::VectorXf::Zero(d);
    b.mlp_w1.resize(cfg.mlp_hidden, d);
    fill_gaussian(b.mlp_w1, rng, 1.0 / std::sqrt(static_cast<double>(d)));
    b.mlp_b1 = Eigen::VectorXf::Zero(cfg.mlp_hidden);
    b.mlp_w2.resize(d, cfg.mlp_hidden);
    fill_gaussian(b.mlp_w2, rng, 1.0 / std::sqrt(static_cast<double>(cfg.mlp_hidden)));
    b.mlp_b2 = Eigen::VectorXf::Zero(d);
  }

  model.head_weight = Eigen::MatrixXf::Zero(cfg.num_classes, d);
  model.head_bias = Eigen::VectorXf::Zero(cfg.num_classes);
  return model;
}

ActivationTensor patch_embed(const std::vector<LogMelSpectrogram>& batch,
                             const EncoderModel& model) {
  if (batch.empty()) throw std::invalid_argument("patch_embed: empty batch");
  const int p = model.config.patch_size;
  const int fp = model.freq_patches();
  const int tp = model.time_patches();
  const int pp = p * p;

  ActivationTensor out = ActivationTensor::zeros(static_cast<int>(batch.size()),
                                                 model.config.embed_dim, fp, tp);
  Eigen::MatrixXf patches(pp, fp * tp);
  for (size_t b = 0; b < batch.size(); ++b) {
    const auto& spec = batch[b].values;
    if (spec.rows() != model.features.n_mels || spec.cols() != model.features.target_frames)
      throw std::invalid_argument("patch_embed: spectrogram dims do not match model");
    for (int f = 0; f < fp; ++f)
      for (int t = 0; t < tp; ++t) {
        const int n = f * tp + t;
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < p; ++j)
            patches(i * p + j, n) = static_cast<float>(spec(f * p + i, t * p + j));
      }
    out.item(static_cast<int>(b)).noalias() = model.patch_kernel * patches;
    out.item(static_cast<int>(b)).colwise() += model.patch_bias;
  }
  return out;
}

Eigen::MatrixXf positional_encoding(int embed_dim, int freq_bins, int time_bins) {
  const int tokens = freq_bins * time_bins;
  Eigen::MatrixXf pe(embed_dim, tokens);
  for (int n = 0; n < tokens; ++n)
    for (int d = 0; d < embed_dim; ++d) {
      const int pair = d / 2;
      const double rate = std::pow(10000.0, -2.0 * pair / embed_dim);
      const double angle = n * rate;
      pe(d, n) = kPositionScale *
                 static_cast<float>(d % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  return pe;
}

ActivationTensor encoder_block(const ActivationTensor& x, const BlockParams& params,
                               int block_index) {
  if (x.layout != Layout::Folded)
    throw std::invalid_argument("encoder_block: expected folded layout");
  const int d = static_cast<int>(params.wq.rows());
  const int heads = params.num_heads;
  const int head_dim = d / heads;
  const int n = x.tokens();
  const float attn_scale = 1.0f / std::sqrt(static_cast<float>(head_dim));

  ActivationTensor out = x;
  Eigen::MatrixXf q(d, n), k(d, n), v(d, n), attn(d, n), scores(n, n);
  for (int b = 0; b < x.batch; ++b) {
    auto xmap = out.item(b);
    Eigen::MatrixXf residual = xmap;

    // Attention sublayer.
    const Eigen::MatrixXf normed = layer_norm(residual, params.ln1_gamma, params.ln1_beta);
    q.noalias() = params.wq * normed;
    q.colwise() += params.bq;
    k.noalias() = params.wk * normed;
    k.colwise() += params.bk;
    v.noalias() = params.wv * normed;
    v.colwise() += params.bv;
    for (int h = 0; h < heads; ++h) {
      auto qh = q.middleRows(h * head_dim, head_dim);
      auto kh = k.middleRows(h * head_dim, head_dim);
      auto vh = v.middleRows(h * head_dim, head_dim);
      scores.noalias() = (qh.transpose() * kh) * attn_scale;  // row = query token
      for (int r = 0; r < n; ++r) {
        auto row = scores.row(r);
        row = (row.array() - row.maxCoeff()).exp();
        row /= row.sum();
      }
      attn.middleRows(h * head_dim, head_dim).noalias() = vh * scores.transpose();
    }
    Eigen::MatrixXf mixed = params.wo * attn;
    mixed.colwise() += params.bo;
    residual += mixed;

    // MLP sublayer.
    const Eigen::MatrixXf normed2 = layer_norm(residual, params.ln2_gamma, params.ln2_beta);
    Eigen::MatrixXf hidden = params.mlp_w1 * normed2;
    hidden.colwise() += params.mlp_b1;
    hidden = gelu(std::move(hidden));
    Eigen::MatrixXf mlp_out = params.mlp_w2 * hidden;
    mlp_out.colwise() += params.mlp_b2;
    residual += mlp_out;

    xmap = residual;
  }
  if (!out.all_finite())
    throw std::runtime_error("non-finite activation in block " + std::to_string(block_index));
  return out;
}

namespace {

void check_interventions(const std::vector<Intervention>& interventions, int num_blocks) {
  int prev = -1;
  for (const auto& iv : interventions) {
    if (iv.block_index < 0 || iv.block_index >= num_blocks)
      throw std::invalid_argument("intervention block index out of range: " +
                                  std::to_string(iv.block_index));
    if (iv.block_index == prev)
      throw std::invalid_argument("duplicate intervention at block " +
                                  std::to_string(iv.block_index));
    if (iv.block_index < prev)
      throw std::invalid_argument("interventions must be sorted by block index");
    prev = iv.block_index;
  }
}

}  // namespace

ForwardResult forward(const EncoderModel& model, const std::vector<LogMelSpectrogram>& batch,
                      const std::vector<Intervention>& interventions,
                      const ForwardOptions& options) {
  check_interventions(interventions, model.config.num_blocks);

  ActivationTensor x = patch_embed(batch, model);
  const Eigen::MatrixXf pe =
      positional_encoding(model.config.embed_dim, x.freq_bins, x.time_bins);
  for (int b = 0; b < x.batch; ++b) x.item(b) += pe;
  if (options.embedding_action) options.embedding_action(x);

  ForwardResult result;
  if (options.record_taps) result.embedding_tap = x;

  const int fp = x.freq_bins;
  const int tp = x.time_bins;
  ActivationTensor folded = fold(x);
  size_t next_iv = 0;
  for (int block = 0; block < model.config.num_blocks; ++block) {
    folded = encoder_block(folded, model.blocks[block], block);
    const bool has_iv =
        next_iv < interventions.size() && interventions[next_iv].block_index == block;
    if (has_iv) {
      ActivationTensor grid = unfold(folded, fp, tp);
      interventions[next_iv].action(grid);
      if (grid.batch != folded.batch || grid.dim != folded.dim || grid.freq_bins != fp ||
          grid.time_bins != tp)
        throw std::runtime_error("intervention at block " + std::to_string(block) +
                                 " changed the tensor shape");
      ++next_iv;
      if (options.record_taps) result.block_taps.push_back(grid);
      folded = fold(grid);
    } else if (options.record_taps) {
      result.block_taps.push_back(unfold(folded, fp, tp));
    }
  }

  // Mean pool over the token grid, then the affine head.
  result.logits.resize(folded.batch, model.config.num_classes);
  for (int b = 0; b < folded.batch; ++b) {
    const Eigen::VectorXf pooled = folded.item(b).rowwise().mean();
    result.logits.row(b) = (model.head_weight * pooled + model.head_bias).transpose();
  }
  return result;
}

Eigen::MatrixXf pooled_embeddings(const EncoderModel& model,
                                  const std::vector<LogMelSpectrogram>& batch) {
  ForwardResult r = forward(model, batch, {}, {.record_taps = true});
  const ActivationTensor& last = r.block_taps.back();
  Eigen::MatrixXf pooled(last.batch, last.dim);
  for (int b = 0; b < last.batch; ++b) pooled.row(b) = last.item(b).rowwise().mean().transpose();
  return pooled;
}

EncoderModel train_head(EncoderModel model, const std::vector<LogMelSpectrogram>& clips,
                        const std::vector<int>& labels, double ridge_lambda) {
  if (clips.empty()) throw std::invalid_argument("train_head: empty dataset");
  if (clips.size() != labels.size())
    throw std::invalid_argument("train_head: labels do not match clips");
  if (ridge_lambda < 0.0) throw std::invalid_argument("train_head: negative ridge lambda");
  const int classes = model.config.num_classes;
  for (int y : labels)
    if (y < 0 || y >= classes) throw std::invalid_argument("train_head: label out of range");

  const Eigen::MatrixXd phi = pooled_embeddings(model, clips).cast<double>();
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(phi.rows(), classes);
  for (Eigen::Index i = 0; i < phi.rows(); ++i) targets(i, labels[i]) = 1.0;

  Eigen::MatrixXd normal = phi.transpose() * phi;
  normal.diagonal().array() += ridge_lambda;
  Eigen::MatrixXd weights;  // embed_dim x classes
  if (ridge_lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (!lu.isInvertible())
      throw std::runtime_error("train_head: singular normal matrix with lambda = 0");
    weights = lu.solve(phi.transpose() * targets);
  } else {
    weights = normal.ldlt().solve(phi.transpose() * targets);
  }
  model.head_weight = weights.transpose().cast<float>();
  model.head_bias = Eigen::VectorXf::Zero(classes);
  return model;
}

int classify(const Eigen::VectorXf& logits) {
  if (logits.size() < 2) throw std::invalid_argument("classify: need at least two classes");
  int best = 0;
  for (int i = 1; i < logits.size(); ++i)
    if (logits(i) > logits(best)) best = i;
  return best;
}

namespace {

TensorRecord record_matrix(const std::string& name, const Eigen::MatrixXf& m,
                           std::vector<int64_t> dims) {
  TensorRecord t;
  t.name = name;
  t.dims = std::move(dims);
  t.data.resize(static_cast<size_t>(m.size()));
  // row-major on disk
  Eigen::Map<RowMajorMatrixXf>(t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

TensorRecord record_vector(const std::string& name, const Eigen::VectorXf& v) {
  TensorRecord t;
  t.name = name;
  t.dims = {v.size()};
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

Eigen::MatrixXf load_matrix(const Container& c, const std::string& name, int rows, int cols) {
  const TensorRecord& t = c.tensor(name);
  if (t.count() != static_cast<int64_t>(rows) * cols)
    throw std::runtime_error("tensor '" + name + "' has unexpected size");
  return Eigen::Map<const RowMajorMatrixXf>(t.data.data(), rows, cols);
}

Eigen::VectorXf load_vector(const Container& c, const std::string& name, int size) {
  const TensorRecord& t = c.tensor(name);
  if (t.count() != size) throw std::runtime_error("tensor '" + name + "' has unexpected size");
  return Eigen::Map<const Eigen::VectorXf>(t.data.data(), size);
}

nlohmann::json model_config_json(const ModelConfig& cfg) {
  return {{"patch_size", cfg.patch_size}, {"embed_dim", cfg.embed_dim},
          {"num_blocks", cfg.num_blocks}, {"num_heads", cfg.num_heads},
          {"mlp_hidden", cfg.mlp_hidden}, {"num_classes", cfg.num_classes},
          {"seed", cfg.seed}};
}

nlohmann::json feature_config_json(const FeatureConfig& cfg) {
  return {{"n_fft", cfg.n_fft},     {"hop", cfg.hop},
          {"n_mels", cfg.n_mels},   {"fmin_hz", cfg.fmin_hz},
          {"fmax_hz", cfg.fmax_hz}, {"target_frames", cfg.target_frames},
          {"log_floor", cfg.log_floor}, {"sample_rate_hz", cfg.sample_rate_hz}};
}

}  // namespace

void save_model(const std::string& path, const EncoderModel& model) {
  Container c;
  c.meta["kind"] = "model";
  c.meta["config"] = model_config_json(model.config);
  c.meta["features"] = feature_config_json(model.features);

  const int p = model.config.patch_size;
  c.tensors.push_back(record_matrix("patch_embed.kernel", model.patch_kernel,
                                    {model.config.embed_dim, 1, p, p}));
  c.tensors.push_back(record_vector("patch_embed.bias", model.patch_bias));
  for (size_t i = 0; i < model.blocks.size(); ++i) {
    const auto& b = model.blocks[i];
    const std::string prefix = "block" + std::to_string(i) + ".";
    auto mat = [&](const std::string& n, const Eigen::MatrixXf& m) {
      c.tensors.push_back(record_matrix(prefix + n, m, {m.rows(), m.cols()}));
    };
    auto vec = [&](const std::string& n, const Eigen::VectorXf& v) {
      c.tensors.push_back(record_vector(prefix + n, v));
    };
    vec("ln1.gamma", b.ln1_gamma);
    vec("ln1.beta", b.ln1_beta);
    mat("attn.wq", b.wq);
    mat("attn.wk", b.wk);
    mat("attn.wv", b.wv);
    mat("attn.wo", b.wo);
    vec("attn.bq", b.bq);
    vec("attn.bk", b.bk);
    vec("attn.bv", b.bv);
    vec("attn.bo", b.bo);
    vec("ln2.gamma", b.ln2_gamma);
    vec("ln2.beta", b.ln2_beta);
    mat("mlp.w1", b.mlp_w1);
    vec("mlp.b1", b.mlp_b1);
    mat("mlp.w2", b.mlp_w2);
    vec("mlp.b2", b.mlp_b2);
  }
  c.tensors.push_back(
      record_matrix("head.weight", model.head_weight,
                    {model.config.num_classes, model.config.embed_dim}));
  c.tensors.push_back(record_vector("head.bias", model.head_bias));
  write_container(path, c);
}

EncoderModel load_model(const std::string& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", "") != "model")
    throw std::runtime_error("not a model container: " + path);

  ModelConfig cfg;
  const auto& mj = c.meta.at("config");
  cfg.patch_size = mj.at("patch_size").get<int>();
  cfg.embed_dim = mj.at("embed_dim").get<int>();
  cfg.num_blocks = mj.at("num_blocks").get<int>();
  cfg.num_heads = mj.at("num_heads").get<int>();
  cfg.mlp_hidden = mj.at("mlp_hidden").get<int>();
  cfg.num_classes = mj.at("num_classes").get<int>();
  cfg.seed = mj.at("seed").get<uint64_t>();

  FeatureConfig fc;
  const auto& fj = c.meta.at("features");
  fc.n_fft = fj.at("n_fft").get<int>();
  fc.hop = fj.at("hop").get<int>();
  fc.n_mels = fj.at("n_mels").get<int>();
  fc.fmin_hz = fj.at("fmin_hz").get<double>();
  fc.fmax_hz = fj.at("fmax_hz").get<double>();
  fc.target_frames = fj.at("target_frames").get<int>();
  fc.log_floor = fj.at("log_floor").get<double>();
  fc.sample_rate_hz = fj.at("sample_rate_hz").get<int>();

  EncoderModel model = init_model(cfg, fc);
  const int d = cfg.embed_dim;
  model.patch_kernel = load_matrix(c, "patch_embed.kernel", d, cfg.patch_size * cfg.patch_size);
  model.patch_bias = load_vector(c, "patch_embed.bias", d);
  for (int i = 0; i < cfg.num_blocks; ++i) {
    auto& b = model.blocks[i];
    const std::string prefix = "block" + std::to_string(i) + ".";
    b.ln1_gamma = load_vector(c, prefix + "ln1.gamma", d);
    b.ln1_beta = load_vector(c, prefix + "ln1.beta", d);
    b.wq = load_matrix(c, prefix + "attn.wq", d, d);
    b.wk = load_matrix(c, prefix + "attn.wk", d, d);
    b.wv = load_matrix(c, prefix + "attn.wv", d, d);
    b.wo = load_matrix(c, prefix + "attn.wo", d, d);
    b.bq = load_vector(c, prefix + "attn.bq", d);
    b.bk = load_vector(c, prefix + "attn.bk", d);
    b.bv = load_vector(c, prefix + "attn.bv", d);
    b.bo = load_vector(c, prefix + "attn.bo", d);
    b.ln2_gamma = load_vector(c, prefix + "ln2.gamma", d);
    b.ln2_beta = load_vector(c, prefix + "ln2.beta", d);
    b.mlp_w1 = load_matrix(c, prefix + "mlp.w1", cfg.mlp_hidden, d);
    b.mlp_b1 = load_vector(c, prefix + "mlp.b1", cfg.mlp_hidden);
    b.mlp_w2 = load_matrix(c, prefix + "mlp.w2", d, cfg.mlp_hidden);
    b.mlp_b2 = load_vector(c, prefix + "mlp.b2", d);
  }
  model.head_weight = load_matrix(c, "head.weight", cfg.num_classes, d);
  model.head_bias = load_vector(c, "head.bias", cfg.num_classes);
  return model;
}

}  // namespace tfish
