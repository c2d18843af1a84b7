#include <omp.h>

#include <algorithm>
#include <cmath>

#include "annoserve/learning/kernels.hpp"

namespace annoserve::learning::kernels {

namespace {

inline void row_logits(const LinearModel& model, const SparseRow& row, double* z) {
  for (std::size_t c = 0; c < model.classes; ++c) {
    double acc = model.bias[c];
    const double* w = model.weights.data() + c * model.dims;
    for (std::size_t n = 0; n < row.indices.size(); ++n) acc += w[row.indices[n]] * row.values[n];
    z[c] = acc;
  }
}

}  // namespace

void predict_proba(const LinearModel& model, std::span<const SparseRow> rows, std::span<double> out) {
  const std::size_t k = model.classes;
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double* z = out.data() + static_cast<std::size_t>(i) * k;
    row_logits(model, rows[static_cast<std::size_t>(i)], z);
    softmax(std::span<double>(z, k));
  }
}

LossGradient loss_and_gradient(const LinearModel& model, std::span<const SparseRow> rows,
                               std::span<const std::size_t> labels, double l2) {
  const std::size_t k = model.classes;
  const std::size_t wsize = model.weights.size();
  const int threads = omp_get_max_threads();
  // per-thread partials: loss, bias grads, weight grads
  std::vector<double> partial_loss(static_cast<std::size_t>(threads), 0.0);
  std::vector<std::vector<double>> partial_w(static_cast<std::size_t>(threads));
  std::vector<std::vector<double>> partial_b(static_cast<std::size_t>(threads));
  const auto n = static_cast<std::ptrdiff_t>(rows.size());

#pragma omp parallel num_threads(threads)
  {
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    auto& gw = partial_w[t];
    auto& gb = partial_b[t];
    gw.assign(wsize, 0.0);
    gb.assign(k, 0.0);
    std::vector<double> z(k);
    double loss = 0.0;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      const std::size_t y = labels[static_cast<std::size_t>(i)];
      row_logits(model, row, z.data());
      const double top = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) sum += std::exp(z[c] - top);
      const double lse = top + std::log(sum);
      loss += lse - z[y];
      for (std::size_t c = 0; c < k; ++c) {
        const double residual = std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0);
        gb[c] += residual;
        double* g = gw.data() + c * model.dims;
        for (std::size_t m = 0; m < row.indices.size(); ++m) g[row.indices[m]] += residual * row.values[m];
      }
    }
    partial_loss[t] = loss;
  }

  LossGradient out;
  out.grad_weights.assign(wsize, 0.0);
  out.grad_bias.assign(k, 0.0);
  for (std::size_t t = 0; t < partial_w.size(); ++t) {
    if (partial_w[t].empty()) continue;
    out.loss += partial_loss[t];
    for (std::size_t c = 0; c < k; ++c) out.grad_bias[c] += partial_b[t][c];
  }
  const auto ws = static_cast<std::ptrdiff_t>(wsize);
  double norm = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : norm)
  for (std::ptrdiff_t j = 0; j < ws; ++j) {
    double acc = 0.0;
    for (std::size_t t = 0; t < partial_w.size(); ++t) {
      if (!partial_w[t].empty()) acc += partial_w[t][static_cast<std::size_t>(j)];
    }
    const double w = model.weights[static_cast<std::size_t>(j)];
    out.grad_weights[static_cast<std::size_t>(j)] = acc + l2 * w;
    norm += w * w;
  }
  out.loss += 0.5 * l2 * norm;
  return out;
}

}  // namespace annoserve::learning::kernels
