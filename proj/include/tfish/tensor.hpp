// tensor.hpp - intermediate-layer activations in token (folded) or grid
// (unfolded) layout; token n = f * T' + t, so the two layouts share bytes
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace tfish {

enum class Layout { Folded, Unfolded };

struct ActivationTensor {
  std::vector<float> data;  // (b, d, n) row-major; n = f * time_bins + t
  int batch = 0;
  int dim = 0;
  int freq_bins = 0;  // F', patch rows
  int time_bins = 0;  // T', patch columns
  Layout layout = Layout::Unfolded;

  int tokens() const { return freq_bins * time_bins; }
  int64_t size() const { return static_cast<int64_t>(batch) * dim * tokens(); }

  static ActivationTensor zeros(int batch, int dim, int freq_bins, int time_bins,
                                Layout layout = Layout::Unfolded);

  float& at(int b, int d, int f, int t) {
    return data[((static_cast<int64_t>(b) * dim + d) * freq_bins + f) * time_bins + t];
  }
  float at(int b, int d, int f, int t) const {
    return data[((static_cast<int64_t>(b) * dim + d) * freq_bins + f) * time_bins + t];
  }
  float& at_token(int b, int d, int n) {
    return data[(static_cast<int64_t>(b) * dim + d) * tokens() + n];
  }
  float at_token(int b, int d, int n) const {
    return data[(static_cast<int64_t>(b) * dim + d) * tokens() + n];
  }

  // dim x tokens view of one batch item (row = embedding dim, col = token).
  Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> item(int b);
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  item(int b) const;

  bool all_finite() const;
};

// Grid -> token layout (pure reindex over n = f * T' + t).
ActivationTensor fold(const ActivationTensor& x);

// Token -> grid layout; exact inverse of fold. N must equal F' * T'.
ActivationTensor unfold(const ActivationTensor& x, int freq_bins, int time_bins);

}  // namespace tfish
