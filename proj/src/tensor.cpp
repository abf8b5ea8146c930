// tensor.cpp
#include "tfish/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace tfish {

ActivationTensor ActivationTensor::zeros(int batch, int dim, int freq_bins, int time_bins,
                                         Layout layout) {
  ActivationTensor t;
  t.batch = batch;
  t.dim = dim;
  t.freq_bins = freq_bins;
  t.time_bins = time_bins;
  t.layout = layout;
  t.data.assign(static_cast<size_t>(batch) * dim * freq_bins * time_bins, 0.0f);
  return t;
}

Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
ActivationTensor::item(int b) {
  return {data.data() + static_cast<int64_t>(b) * dim * tokens(), dim, tokens()};
}

Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
ActivationTensor::item(int b) const {
  return {data.data() + static_cast<int64_t>(b) * dim * tokens(), dim, tokens()};
}

bool ActivationTensor::all_finite() const {
  for (float v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

ActivationTensor fold(const ActivationTensor& x) {
  if (x.layout != Layout::Unfolded) throw std::invalid_argument("fold: tensor already folded");
  ActivationTensor y = x;
  y.layout = Layout::Folded;
  return y;
}

ActivationTensor unfold(const ActivationTensor& x, int freq_bins, int time_bins) {
  if (x.layout != Layout::Folded) throw std::invalid_argument("unfold: tensor already unfolded");
  if (freq_bins * time_bins != x.tokens())
    throw std::invalid_argument("unfold: token count does not factor as F' * T'");
  ActivationTensor y = x;
  y.freq_bins = freq_bins;
  y.time_bins = time_bins;
  y.layout = Layout::Unfolded;
  return y;
}

}  // namespace tfish
