#include "proxrl/deep/qnetwork.hpp"

#include "proxrl/errors.hpp"

#include <cmath>
#include <string>

namespace proxrl::deep {

namespace {

using WeightMap = Eigen::Map<RowMajorMatrix>;

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw InvalidArgument("QNetwork needs at least an input and an output layer");
  for (std::size_t s : sizes) {
    if (s == 0) throw InvalidArgument("QNetwork layer sizes must be positive");
  }
}

}  // namespace

std::size_t QNetwork::param_count(const std::vector<std::size_t>& sizes) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) count += sizes[l] * sizes[l + 1] + sizes[l + 1];
  return count;
}

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  check_sizes(sizes_);
  params_ = Vector::Zero(static_cast<Eigen::Index>(param_count(sizes_)));
  build_offsets();
}

QNetwork::QNetwork(std::vector<std::size_t> layer_sizes, Vector params) : sizes_(std::move(layer_sizes)) {
  check_sizes(sizes_);
  build_offsets();
  set_params(std::move(params));
}

QNetwork QNetwork::glorot(std::vector<std::size_t> layer_sizes, std::mt19937_64& rng) {
  QNetwork net(std::move(layer_sizes));
  Vector params = Vector::Zero(net.params_.size());
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t n_in = net.sizes_[l];
    const std::size_t n_out = net.sizes_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    std::uniform_real_distribution<double> draw(-limit, limit);
    const std::size_t start = net.offsets_[l];
    for (std::size_t i = 0; i < n_in * n_out; ++i) params(static_cast<Eigen::Index>(start + i)) = draw(rng);
  }
  net.params_ = std::move(params);
  return net;
}

void QNetwork::build_offsets() {
  offsets_.clear();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(offset);
    offset += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
}

void QNetwork::set_params(Vector params) {
  if (static_cast<std::size_t>(params.size()) != param_count(sizes_)) {
    throw InvalidArgument("QNetwork expects " + std::to_string(param_count(sizes_)) + " parameters, got " +
                          std::to_string(params.size()));
  }
  params_ = std::move(params);
}

ConstWeightMap QNetwork::weight(std::size_t layer) const {
  return ConstWeightMap(params_.data() + offsets_[layer], static_cast<Eigen::Index>(sizes_[layer + 1]),
                        static_cast<Eigen::Index>(sizes_[layer]));
}

ConstBiasMap QNetwork::bias(std::size_t layer) const {
  return ConstBiasMap(params_.data() + offsets_[layer] + sizes_[layer] * sizes_[layer + 1],
                      static_cast<Eigen::Index>(sizes_[layer + 1]));
}

Vector QNetwork::forward(const Vector& state) const {
  if (static_cast<std::size_t>(state.size()) != input_dim()) {
    throw InvalidArgument("state has dimension " + std::to_string(state.size()) + ", network expects " +
                          std::to_string(input_dim()));
  }
  Vector h = state;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Vector z = weight(l) * h + bias(l);
    h = l + 1 < num_layers() ? Vector(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

Matrix QNetwork::forward_batch(const Matrix& states) const {
  if (static_cast<std::size_t>(states.rows()) != input_dim()) {
    throw InvalidArgument("batch rows must equal the network input dimension");
  }
  Matrix h = states;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * h;
    z.colwise() += bias(l);
    h = l + 1 < num_layers() ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

QNetwork::Cache QNetwork::forward_cached(const Matrix& states) const {
  if (static_cast<std::size_t>(states.rows()) != input_dim()) {
    throw InvalidArgument("batch rows must equal the network input dimension");
  }
  Cache cache;
  cache.inputs.reserve(num_layers());
  cache.pre.reserve(num_layers());
  cache.inputs.push_back(states);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = weight(l) * cache.inputs.back();
    z.colwise() += bias(l);
    if (l + 1 < num_layers()) cache.inputs.push_back(z.cwiseMax(0.0));
    cache.pre.push_back(std::move(z));
  }
  return cache;
}

Vector QNetwork::backward(const Cache& cache, const Matrix& output_grad) const {
  Vector grad = Vector::Zero(params_.size());
  Matrix delta = output_grad;
  for (std::size_t l = num_layers(); l-- > 0;) {
    WeightMap gw(grad.data() + offsets_[l], static_cast<Eigen::Index>(sizes_[l + 1]),
                 static_cast<Eigen::Index>(sizes_[l]));
    gw.noalias() = delta * cache.inputs[l].transpose();
    grad.segment(static_cast<Eigen::Index>(offsets_[l] + sizes_[l] * sizes_[l + 1]),
                 static_cast<Eigen::Index>(sizes_[l + 1])) = delta.rowwise().sum();
    if (l > 0) {
      Matrix upstream = weight(l).transpose() * delta;
      delta = (cache.pre[l - 1].array() > 0.0).select(upstream, 0.0);
    }
  }
  return grad;
}

}  // namespace proxrl::deep
