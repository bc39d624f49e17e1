#pragma once

#include "proxrl/mdp.hpp"

#include <cstddef>
#include <random>
#include <vector>

namespace proxrl::deep {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;
using ConstBiasMap = Eigen::Map<const Vector>;

/// Feedforward Q-function with ReLU hidden layers and a linear output layer.
///
/// All weights and biases live in one flat vector. For each layer in order the
/// n_out x n_in weight matrix is stored row-major, followed by its n_out biases.
/// Layer l computes z = W h + b.
class QNetwork {
 public:
  /// All parameters zero.
  explicit QNetwork(std::vector<std::size_t> layer_sizes);
  QNetwork(std::vector<std::size_t> layer_sizes, Vector params);

  /// Weights uniform in +-sqrt(6 / (n_in + n_out)), biases zero.
  static QNetwork glorot(std::vector<std::size_t> layer_sizes, std::mt19937_64& rng);

  static std::size_t param_count(const std::vector<std::size_t>& layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t num_actions() const { return sizes_.back(); }

  const Vector& params() const { return params_; }
  void set_params(Vector params);

  ConstWeightMap weight(std::size_t layer) const;
  ConstBiasMap bias(std::size_t layer) const;
  /// Offset of a layer's weights inside params().
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  Vector forward(const Vector& state) const;
  /// States as columns (input_dim x B); returns |A| x B.
  Matrix forward_batch(const Matrix& states) const;

  /// Activations of a batch forward pass: inputs[l] feeds layer l, pre[l] is its output before ReLU.
  struct Cache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> pre;
    const Matrix& output() const { return pre.back(); }
  };
  Cache forward_cached(const Matrix& states) const;

  /// Back-propagates dLoss/dOutput (|A| x B) to a flat parameter gradient.
  Vector backward(const Cache& cache, const Matrix& output_grad) const;

 private:
  void build_offsets();

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  Vector params_;
};

}  // namespace proxrl::deep
