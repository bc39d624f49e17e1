#include "proxrl/deep/lipschitz.hpp"

#include "proxrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace proxrl::deep {

double spectral_norm(const Eigen::Ref<const Matrix>& w, std::size_t iterations) {
  if (w.size() == 0) return 0.0;
  Vector x = Vector::Ones(w.cols()) / std::sqrt(static_cast<double>(w.cols()));
  double sigma = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const Vector y = w.transpose() * (w * x);
    const double n = y.norm();
    if (n == 0.0) {
      // Start vector fell into the null space; fall back to the largest column.
      Eigen::Index col = 0;
      w.colwise().norm().maxCoeff(&col);
      if (w.col(col).norm() == 0.0) return 0.0;
      x = Vector::Unit(w.cols(), col);
      continue;
    }
    x = y / n;
    sigma = (w * x).norm();
  }
  return sigma;
}

namespace {

struct LayerNorms {
  std::vector<double> weight;
  std::vector<double> bias;
};

LayerNorms layer_norms(const QNetwork& net) {
  LayerNorms out;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    out.weight.push_back(spectral_norm(Matrix(net.weight(l))));
    out.bias.push_back(net.bias(l).norm());
  }
  return out;
}

double bound_from_norms(const LayerNorms& norms) {
  const std::size_t layers = norms.weight.size();
  // H_{l} for l = 0..L-1: norm bound on the input of layer l (one-hot input has norm 1).
  std::vector<double> input_norm(layers, 1.0);
  for (std::size_t l = 1; l < layers; ++l) {
    input_norm[l] = norms.weight[l - 1] * input_norm[l - 1] + norms.bias[l - 1];
  }
  double total = 0.0;
  double sensitivity = 1.0;
  for (std::size_t l = layers; l-- > 0;) {
    total += sensitivity * sensitivity * (input_norm[l] * input_norm[l] + 1.0);
    sensitivity *= norms.weight[l];
  }
  return std::sqrt(total);
}

}  // namespace

double lipschitz_upper_bound(const QNetwork& net) { return bound_from_norms(layer_norms(net)); }

double lipschitz_upper_bound(const QNetwork& a, const QNetwork& b) {
  if (a.layer_sizes() != b.layer_sizes()) throw InvalidArgument("Lipschitz bound needs matching architectures");
  LayerNorms na = layer_norms(a);
  const LayerNorms nb = layer_norms(b);
  for (std::size_t l = 0; l < na.weight.size(); ++l) {
    na.weight[l] = std::max(na.weight[l], nb.weight[l]);
    na.bias[l] = std::max(na.bias[l], nb.bias[l]);
  }
  return bound_from_norms(na);
}

}  // namespace proxrl::deep
