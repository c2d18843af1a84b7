#include <algorithm>
#include <cmath>

#include "annoserve/learning/kernels.hpp"

namespace annoserve::learning {

void softmax(std::span<double> logits) {
  if (logits.empty()) return;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
}

namespace serial {

void predict_proba(const LinearModel& model, std::span<const SparseRow> rows, std::span<double> out) {
  const std::size_t k = model.classes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::span<double> p = out.subspan(i * k, k);
    for (std::size_t c = 0; c < k; ++c) {
      double z = model.bias[c];
      const double* w = model.weights.data() + c * model.dims;
      for (std::size_t n = 0; n < rows[i].indices.size(); ++n) z += w[rows[i].indices[n]] * rows[i].values[n];
      p[c] = z;
    }
    softmax(p);
  }
}

LossGradient loss_and_gradient(const LinearModel& model, std::span<const SparseRow> rows,
                               std::span<const std::size_t> labels, double l2) {
  const std::size_t k = model.classes;
  LossGradient out;
  out.grad_weights.assign(model.weights.size(), 0.0);
  out.grad_bias.assign(k, 0.0);
  std::vector<double> p(k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    for (std::size_t c = 0; c < k; ++c) {
      double z = model.bias[c];
      const double* w = model.weights.data() + c * model.dims;
      for (std::size_t n = 0; n < row.indices.size(); ++n) z += w[row.indices[n]] * row.values[n];
      p[c] = z;
    }
    // log-sum-exp before normalising, for an accurate loss
    const double top = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(p[c] - top);
    const double lse = top + std::log(sum);
    out.loss += lse - p[labels[i]];
    for (std::size_t c = 0; c < k; ++c) {
      const double residual = std::exp(p[c] - lse) - (c == labels[i] ? 1.0 : 0.0);
      out.grad_bias[c] += residual;
      double* g = out.grad_weights.data() + c * model.dims;
      for (std::size_t n = 0; n < row.indices.size(); ++n) g[row.indices[n]] += residual * row.values[n];
    }
  }
  double norm = 0.0;
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    norm += model.weights[j] * model.weights[j];
    out.grad_weights[j] += l2 * model.weights[j];
  }
  out.loss += 0.5 * l2 * norm;
  return out;
}

}  // namespace serial
}  // namespace annoserve::learning
